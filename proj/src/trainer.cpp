#include "hdrf/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "hdrf/adam.hpp"
#include "hdrf/random.hpp"

namespace hdrf::models {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5A;
constexpr std::uint64_t kDropoutStream = 0xD7;

std::vector<int> labels_of(std::span<const dataset::LogLumBlock> blocks, std::span<const std::size_t> idx) {
    std::vector<int> y;
    y.reserve(idx.size());
    for (std::size_t i : idx) y.push_back(static_cast<int>(blocks[i].label));
    return y;
}

double eval_accuracy(nn::Sequential<float>& net, std::span<const dataset::LogLumBlock> blocks) {
    if (blocks.empty()) return std::nan("");
    std::size_t correct = 0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < blocks.size(); start += 128) {
        idx.resize(std::min<std::size_t>(128, blocks.size() - start));
        std::iota(idx.begin(), idx.end(), start);
        nn::TensorF logits = net.forward(make_batch(blocks, idx), nn::Mode::EVAL);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            int pred = logits[k * 2 + 1] > logits[k * 2] ? 1 : 0;
            if (pred == static_cast<int>(blocks[idx[k]].label)) ++correct;
        }
    }
    return double(correct) / double(blocks.size());
}

}  // namespace

nn::TensorF make_batch(std::span<const dataset::LogLumBlock> blocks, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ParameterError("make_batch: empty batch");
    const std::size_t px = blocks[indices[0]].pixels.size();
    const int side = static_cast<int>(std::lround(std::sqrt(double(px))));
    nn::TensorF x({static_cast<int>(indices.size()), 1, side, side});
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& p = blocks[indices[k]].pixels;
        if (p.size() != px) throw ParameterError("make_batch: blocks differ in size");
        std::copy(p.begin(), p.end(), x.data() + k * px);
    }
    return x;
}

TrainOutcome train(const ModelSpec& spec, const Checkpoint& stats, std::span<const dataset::LogLumBlock> train_set,
                   std::span<const dataset::LogLumBlock> verify_set, const TrainConfig& cfg, const ResumeFrom& resume,
                   const LogFn& log) {
    if (cfg.epochs < 1) throw ParameterError("train: epochs must be >= 1");
    if (cfg.batch < 2) throw ParameterError("train: batch must be >= 2");
    if (train_set.size() < 2) throw DataError("train: TRAIN split needs at least two blocks");

    auto net = build_layers<float>(spec, cfg.seed);
    nn::Adam adam({cfg.lr});
    auto params = net->params();

    auto snapshot = [&](const std::vector<EpochRecord>& history, int best_epoch, double best_acc, int epochs_done) {
        Checkpoint c = capture(*net, spec);
        c.input = stats.input;
        c.norm_mean = stats.norm_mean;
        c.norm_std = stats.norm_std;
        TrainingState s;
        s.epochs_done = epochs_done;
        s.adam_steps = adam.steps();
        s.adam_m = adam.first_moments();
        s.adam_v = adam.second_moments();
        s.history = history;
        s.best_epoch = best_epoch;
        s.best_verify_accuracy = best_acc;
        c.training = std::move(s);
        return c;
    };

    TrainOutcome out;
    int start_epoch = 0;
    int best_epoch = 0;
    double best_acc = -1.0;
    if (resume.last) {
        if (!resume.last->training) throw DataError("train: resume checkpoint carries no training state");
        restore(*resume.last, *net);
        const TrainingState& s = *resume.last->training;
        adam.first_moments() = s.adam_m;
        adam.second_moments() = s.adam_v;
        adam.set_steps(s.adam_steps);
        out.history = s.history;
        start_epoch = s.epochs_done;
        best_epoch = s.best_epoch;
        best_acc = s.best_verify_accuracy;
        if (resume.best) out.best = *resume.best;
    }

    std::vector<std::size_t> order(train_set.size());
    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStream + 1000ull * epoch));
        shuffle_rng.shuffle(std::span(order));
        net->reseed(mix_seed(cfg.seed, kDropoutStream + 1000ull * epoch));

        double loss_sum = 0.0;
        std::size_t seen = 0, correct = 0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start + 2 <= order.size(); start += cfg.batch, ++batch_no) {
            std::size_t n = std::min<std::size_t>(cfg.batch, order.size() - start);
            std::span<const std::size_t> idx(order.data() + start, n);
            nn::TensorF x = make_batch(train_set, idx);
            std::vector<int> y = labels_of(train_set, idx);
            nn::TensorF logits = net->forward(x, nn::Mode::TRAIN);
            auto res = nn::softmax_cross_entropy(logits, y);
            if (!std::isfinite(res.loss)) {
                // Parameters have not been touched by this batch yet.
                throw TrainingAborted("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                          std::to_string(batch_no),
                                      snapshot(out.history, best_epoch, best_acc, epoch));
            }
            nn::zero_grads(params);
            net->backward(res.grad);
            try {
                adam.step(params);
            } catch (const NumericalError& e) {
                throw TrainingAborted(std::string(e.what()) + " at epoch " + std::to_string(epoch + 1),
                                      snapshot(out.history, best_epoch, best_acc, epoch));
            }
            loss_sum += res.loss * n;
            seen += n;
            for (std::size_t k = 0; k < n; ++k) {
                int pred = logits[k * 2 + 1] > logits[k * 2] ? 1 : 0;
                if (pred == y[k]) ++correct;
            }
            if (log && cfg.log_every > 0 && (batch_no + 1) % cfg.log_every == 0) {
                std::ostringstream os;
                os << "epoch " << epoch + 1 << " batch " << batch_no + 1 << " loss " << loss_sum / seen;
                log(os.str());
            }
        }
        EpochRecord rec{epoch + 1, loss_sum / seen, double(correct) / seen, eval_accuracy(*net, verify_set)};
        out.history.push_back(rec);
        if (log) {
            std::ostringstream os;
            os << "epoch " << rec.epoch << " loss " << rec.train_loss << " train_acc " << rec.train_accuracy
               << " verify_acc " << rec.verify_accuracy;
            log(os.str());
        }
        bool improved = verify_set.empty() ? true : rec.verify_accuracy > best_acc;
        if (improved) {
            best_acc = verify_set.empty() ? best_acc : rec.verify_accuracy;
            best_epoch = rec.epoch;
            out.best = snapshot(out.history, best_epoch, best_acc, epoch + 1);
        }
    }
    out.last = snapshot(out.history, best_epoch, best_acc, cfg.epochs);
    if (out.best.tensors.empty()) out.best = out.last;
    out.best.training.reset();
    return out;
}

Classifier::Classifier(const Checkpoint& ckpt) : ckpt_(ckpt), net_(instantiate(ckpt)) {}

std::vector<std::array<float, 2>> Classifier::predict(std::span<const dataset::LogLumBlock> blocks, int batch) {
    std::vector<std::array<float, 2>> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        for (float v : b.pixels) {
            if (!std::isfinite(v)) throw ParameterError("predict: block contains non-finite values");
        }
    }
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < blocks.size(); start += batch) {
        idx.resize(std::min<std::size_t>(batch, blocks.size() - start));
        std::iota(idx.begin(), idx.end(), start);
        nn::TensorF p = nn::softmax(net_->forward(make_batch(blocks, idx), nn::Mode::EVAL));
        for (std::size_t k = 0; k < idx.size(); ++k) out.push_back({p[k * 2], p[k * 2 + 1]});
    }
    return out;
}

std::array<float, 2> Classifier::predict_block(const dataset::LogLumBlock& block) {
    return predict(std::span(&block, 1)).front();
}

double block_accuracy(Classifier& clf, std::span<const dataset::LogLumBlock> blocks) {
    if (blocks.empty()) return std::nan("");
    auto probs = clf.predict(blocks);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        int pred = probs[i][1] > probs[i][0] ? 1 : 0;
        if (pred == static_cast<int>(blocks[i].label)) ++correct;
    }
    return double(correct) / double(blocks.size());
}

}  // namespace hdrf::models
