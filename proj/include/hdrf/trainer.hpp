#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hdrf/blocks.hpp"
#include "hdrf/checkpoint.hpp"
#include "hdrf/error.hpp"

namespace hdrf::models {

struct TrainConfig {
    int epochs = 50;
    int batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    int log_every = 0;  // batches between progress lines; 0 logs once per epoch
};

struct TrainOutcome {
    Checkpoint best;  // highest VERIFY1 block accuracy (last epoch when no verification set)
    Checkpoint last;  // final weights plus optimizer state, for resuming
    std::vector<EpochRecord> history;
};

/// Raised when the loss turns non-finite; carries the state from before the failing step.
class TrainingAborted : public NumericalError {
public:
    TrainingAborted(const std::string& what, Checkpoint last_good)
        : NumericalError(what), last_good_(std::move(last_good)) {}
    const Checkpoint& last_good() const { return last_good_; }

private:
    Checkpoint last_good_;
};

using LogFn = std::function<void(const std::string&)>;

/// Trains on normalized blocks with Adam and softmax cross-entropy.
/// Each epoch reshuffles with a generator derived from (seed, epoch) and reseeds dropout the
/// same way, so a run resumed from `last` continues exactly as if uninterrupted.
/// `stats` supplies the input conditioning recorded in the checkpoints.
struct ResumeFrom {
    const Checkpoint* last = nullptr;  // must carry training state
    const Checkpoint* best = nullptr;  // best snapshot so far; kept unless a later epoch beats it
};

TrainOutcome train(const ModelSpec& spec, const Checkpoint& stats, std::span<const dataset::LogLumBlock> train_set,
                   std::span<const dataset::LogLumBlock> verify_set, const TrainConfig& cfg,
                   const ResumeFrom& resume = {}, const LogFn& log = {});

/// Stacks blocks [begin, end) of `blocks` (by index list) into an (N, 1, S, S) tensor.
nn::TensorF make_batch(std::span<const dataset::LogLumBlock> blocks, std::span<const std::size_t> indices);

/// Frozen-weight inference. Inputs must already be normalized with norm_mean / norm_std.
class Classifier {
public:
    explicit Classifier(const Checkpoint& ckpt);

    /// (p_mhdr, p_ihdr) per block, EVAL mode. Throws ParameterError on non-finite input.
    std::vector<std::array<float, 2>> predict(std::span<const dataset::LogLumBlock> blocks, int batch = 128);
    std::array<float, 2> predict_block(const dataset::LogLumBlock& block);

    const Checkpoint& checkpoint() const { return ckpt_; }

private:
    Checkpoint ckpt_;
    std::unique_ptr<nn::Sequential<float>> net_;
};

/// Fraction of blocks whose argmax prediction matches the label.
double block_accuracy(Classifier& clf, std::span<const dataset::LogLumBlock> blocks);

}  // namespace hdrf::models
