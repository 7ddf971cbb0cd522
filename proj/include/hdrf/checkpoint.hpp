#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hdrf/binary_io.hpp"
#include "hdrf/manifest.hpp"
#include "hdrf/model.hpp"

namespace hdrf::models {

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double verify_accuracy = 0.0;
};

/// Optimizer and schedule state needed to continue a run exactly.
struct TrainingState {
    int epochs_done = 0;
    std::uint64_t adam_steps = 0;
    std::vector<std::vector<float>> adam_m, adam_v;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_verify_accuracy = -1.0;
};

/// Self-contained model snapshot: architecture, input conditioning, and every tensor.
///
/// On disk: "HDRFCKPT", u32 version, spec, input mode, f64 norm mean/std, a layer table
/// (kind, integer config, tensor shapes per leaf layer), the little-endian f32 tensors in
/// declaration order (parameters, then buffers, per leaf), and an optional training section.
struct Checkpoint {
    ModelSpec spec;
    dataset::InputMode input = dataset::InputMode::LOG_LUMINANCE;
    double norm_mean = 0.0;
    double norm_std = 1.0;
    std::vector<std::vector<float>> tensors;
    std::optional<TrainingState> training;
};

Checkpoint capture(nn::Sequential<float>& net, const ModelSpec& spec);
/// Copies the checkpoint's tensors into a network built from the same spec.
void restore(const Checkpoint& ckpt, nn::Sequential<float>& net);
/// Builds a fresh network from the checkpoint's spec and loads its tensors.
std::unique_ptr<nn::Sequential<float>> instantiate(const Checkpoint& ckpt);

io::Bytes serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hdrf::models
