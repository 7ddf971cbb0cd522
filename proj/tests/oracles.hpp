#pragma once

#include <cstddef>
#include <span>

namespace testutil {

/// Mann-Whitney statistic by exhaustive pairs: P(s+ > s-) + P(s+ == s-) / 2.
inline double brute_force_auc(std::span<const double> scores, std::span<const int> labels, int positive = 1) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != positive) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] == positive) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

}  // namespace testutil
