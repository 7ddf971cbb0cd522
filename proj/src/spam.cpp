#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hdrf/error.hpp"
#include "hdrf/features.hpp"

namespace hdrf::features {
namespace {

constexpr int kSide = 64;
constexpr int kT = 3;
constexpr int kLevels = 2 * kT + 1;
constexpr int kCube = kLevels * kLevels * kLevels;

// Second-order transition probabilities along one direction, indexed
// [d1][d2][d3] = Pr(D(i+2) = d3 | D(i) = d1, D(i+1) = d2). Unseen conditions are uniform.
std::array<double, kCube> transitions(const std::vector<int>& q, int dx, int dy) {
    std::array<double, kCube> counts{};
    auto diff = [&](int x, int y) {
        int d = q[static_cast<std::size_t>(y) * kSide + x] - q[static_cast<std::size_t>(y + dy) * kSide + x + dx];
        return std::clamp(d, -kT, kT) + kT;
    };
    auto inside = [](int x, int y) { return x >= 0 && x < kSide && y >= 0 && y < kSide; };
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            // Three consecutive differences need four pixels along the direction.
            if (!inside(x + 3 * dx, y + 3 * dy)) continue;
            int d1 = diff(x, y), d2 = diff(x + dx, y + dy), d3 = diff(x + 2 * dx, y + 2 * dy);
            counts[(d1 * kLevels + d2) * kLevels + d3] += 1.0;
        }
    }
    for (int c = 0; c < kLevels * kLevels; ++c) {
        double* row = &counts[c * kLevels];
        double s = 0.0;
        for (int k = 0; k < kLevels; ++k) s += row[k];
        for (int k = 0; k < kLevels; ++k) row[k] = s > 0 ? row[k] / s : 1.0 / kLevels;
    }
    return counts;
}

}  // namespace

FeatureVector spam(std::span<const float> block) {
    if (block.size() != static_cast<std::size_t>(kSide * kSide)) {
        throw ParameterError("spam: expected a 64x64 block, got " + std::to_string(block.size()) + " values");
    }
    FeatureVector f{FeatureKind::SPAM, std::vector<float>(kSpamDims, 0.0f)};
    auto [lo, hi] = std::minmax_element(block.begin(), block.end());
    double mn = *lo, mx = *hi;
    if (!(mx > mn)) {
        std::fill(f.values.begin(), f.values.end(), static_cast<float>(1.0 / kLevels));
        return f;
    }
    std::vector<int> q(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) {
        q[i] = static_cast<int>(std::lround(255.0 * (block[i] - mn) / (mx - mn)));
    }
    static constexpr int straight[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    static constexpr int diagonal[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    for (int group = 0; group < 2; ++group) {
        const auto& dirs = group == 0 ? straight : diagonal;
        std::array<double, kCube> acc{};
        for (const auto& d : dirs) {
            auto t = transitions(q, d[0], d[1]);
            for (int i = 0; i < kCube; ++i) acc[i] += t[i] / 4.0;
        }
        for (int i = 0; i < kCube; ++i) f.values[group * kCube + i] = static_cast<float>(acc[i]);
    }
    return f;
}

}  // namespace hdrf::features
