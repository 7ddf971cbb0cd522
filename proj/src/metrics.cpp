#include "hdrf/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "hdrf/error.hpp"

namespace hdrf::eval {

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels, int positive) {
    if (scores.size() != labels.size()) throw ParameterError("roc_auc: scores and labels differ in length");
    std::size_t npos = 0, nneg = 0;
    for (int l : labels) (l == positive ? npos : nneg)++;
    if (npos == 0 || nneg == 0) throw DataError("roc_auc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    double area2 = 0.0;  // twice the area in count units, exact for integer counts
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        std::size_t tp0 = tp, fp0 = fp;
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == positive ? tp : fp)++;
            ++i;
        }
        area2 += double(fp - fp0) * double(tp + tp0);
        roc.points.emplace_back(double(fp) / double(nneg), double(tp) / double(npos));
    }
    roc.auc = area2 / (2.0 * double(npos) * double(nneg));
    return roc;
}

double accuracy(std::span<const int> preds, std::span<const int> labels) {
    if (preds.size() != labels.size()) throw ParameterError("accuracy: length mismatch");
    if (preds.empty()) throw DataError("accuracy: no predictions");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i] == labels[i];
    return double(hit) / double(preds.size());
}

Confusion confusion(std::span<const int> preds, std::span<const int> labels) {
    if (preds.size() != labels.size()) throw ParameterError("confusion: length mismatch");
    Confusion c{};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if ((preds[i] != 0 && preds[i] != 1) || (labels[i] != 0 && labels[i] != 1)) {
            throw ParameterError("confusion: classes must be 0 or 1");
        }
        ++c[labels[i]][preds[i]];
    }
    return c;
}

VoteResult majority_vote(std::span<const BlockVote> blocks, std::uint32_t image_id) {
    if (blocks.empty()) throw DataError("majority_vote: no blocks for image " + std::to_string(image_id));
    VoteResult v;
    v.image_id = image_id;
    v.blocks.assign(blocks.begin(), blocks.end());
    // Sum in sorted order so the result does not depend on the input permutation.
    std::array<std::vector<double>, 2> conf;
    for (const auto& b : blocks) {
        if (b.cls != 0 && b.cls != 1) throw ParameterError("majority_vote: classes must be 0 or 1");
        ++v.votes[b.cls];
        conf[b.cls].push_back(b.confidence);
    }
    for (int c = 0; c < 2; ++c) {
        std::sort(conf[c].begin(), conf[c].end());
        v.confidence_sum[c] = std::accumulate(conf[c].begin(), conf[c].end(), 0.0);
    }
    if (v.votes[0] != v.votes[1]) {
        v.final_class = v.votes[1] > v.votes[0] ? 1 : 0;
    } else {
        v.tie_broken = true;
        v.final_class = v.confidence_sum[1] > v.confidence_sum[0] ? 1 : 0;
    }
    v.mean_confidence = v.confidence_sum[v.final_class] / v.votes[v.final_class];
    return v;
}

}  // namespace hdrf::eval
