#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hdrf::eval {

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) first and (1,1) last
    double auc = 0.0;
};

/// Sweeps thresholds over the distinct scores, highest first. labels are 0/1 and
/// `positive` names the class treated as positive. Throws DataError unless both classes occur.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, int positive = 1);

/// Fraction of positions where preds == labels.
double accuracy(std::span<const int> preds, std::span<const int> labels);

/// counts[truth][predicted] for labels in {0, 1}.
using Confusion = std::array<std::array<std::uint64_t, 2>, 2>;
Confusion confusion(std::span<const int> preds, std::span<const int> labels);

struct BlockVote {
    int cls = 0;
    double confidence = 0.0;  // probability (or score) assigned to cls
};

struct VoteResult {
    std::uint32_t image_id = 0;
    std::vector<BlockVote> blocks;
    std::array<int, 2> votes{0, 0};
    std::array<double, 2> confidence_sum{0.0, 0.0};
    int final_class = 0;
    double mean_confidence = 0.0;
    bool tie_broken = false;  // equal votes, decided by summed confidence
};

/// Most votes wins; an even split goes to the class with the larger summed confidence,
/// and to class 0 if those are equal too.
VoteResult majority_vote(std::span<const BlockVote> blocks, std::uint32_t image_id = 0);

}  // namespace hdrf::eval
