#include <string>

#include "hdrf/error.hpp"
#include "hdrf/features.hpp"

namespace hdrf::features {
namespace {

constexpr int kSide = 64;
constexpr int kRegion = 16;
constexpr int kUniformBins = 59;

int transitions(int code) {
    int t = 0;
    for (int i = 0; i < 8; ++i) {
        int a = (code >> i) & 1, b = (code >> ((i + 1) % 8)) & 1;
        t += a != b;
    }
    return t;
}

}  // namespace

const std::vector<int>& uniform_lbp_table() {
    static const std::vector<int> table = [] {
        std::vector<int> t(256, kUniformBins - 1);
        int next = 0;
        for (int code = 0; code < 256; ++code) {
            if (transitions(code) <= 2) t[code] = next++;
        }
        return t;
    }();
    return table;
}

FeatureVector lbp_uniform(std::span<const float> block) {
    if (block.size() != static_cast<std::size_t>(kSide * kSide)) {
        throw ParameterError("lbp: expected a 64x64 block, got " + std::to_string(block.size()) + " values");
    }
    const auto& table = uniform_lbp_table();
    // Clockwise from the top-left neighbour.
    static constexpr int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
    static constexpr int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
    FeatureVector f{FeatureKind::LBP, std::vector<float>(kLbpDims, 0.0f)};
    for (int ry = 0; ry < kSide / kRegion; ++ry) {
        for (int rx = 0; rx < kSide / kRegion; ++rx) {
            float* hist = f.values.data() + (ry * (kSide / kRegion) + rx) * kUniformBins;
            for (int y = ry * kRegion + 1; y < (ry + 1) * kRegion - 1; ++y) {
                for (int x = rx * kRegion + 1; x < (rx + 1) * kRegion - 1; ++x) {
                    float c = block[static_cast<std::size_t>(y) * kSide + x];
                    int code = 0;
                    for (int k = 0; k < 8; ++k) {
                        if (block[static_cast<std::size_t>(y + dy[k]) * kSide + x + dx[k]] > c) code |= 1 << k;
                    }
                    hist[table[code]] += 1.0f;
                }
            }
        }
    }
    return f;
}

}  // namespace hdrf::features
