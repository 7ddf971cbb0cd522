#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hdrf/error.hpp"
#include "hdrf/features.hpp"

namespace hdrf::features {
namespace {

constexpr int kSide = 64;
constexpr int kCell = 16;
constexpr int kCells = kSide / kCell;
constexpr int kBins = 9;

void require_block(std::span<const float> block, const char* what) {
    if (block.size() != static_cast<std::size_t>(kSide * kSide)) {
        throw ParameterError(std::string(what) + ": expected a 64x64 block, got " + std::to_string(block.size()) +
                             " values");
    }
}

}  // namespace

std::string_view to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::HOG: return "HOG";
        case FeatureKind::LBP: return "LBP";
        case FeatureKind::SPAM: return "SPAM";
    }
    return "HOG";
}

FeatureKind parse_feature_kind(std::string_view s) {
    if (s == "HOG" || s == "hog") return FeatureKind::HOG;
    if (s == "LBP" || s == "lbp") return FeatureKind::LBP;
    if (s == "SPAM" || s == "spam") return FeatureKind::SPAM;
    throw ParameterError("unknown feature kind '" + std::string(s) + "' (expected HOG, LBP or SPAM)");
}

int feature_dims(FeatureKind k) {
    switch (k) {
        case FeatureKind::HOG: return kHogDims;
        case FeatureKind::LBP: return kLbpDims;
        case FeatureKind::SPAM: return kSpamDims;
    }
    return 0;
}

FeatureVector extract(FeatureKind kind, std::span<const float> block) {
    switch (kind) {
        case FeatureKind::HOG: return hog(block);
        case FeatureKind::LBP: return lbp_uniform(block);
        case FeatureKind::SPAM: return spam(block);
    }
    throw ParameterError("extract: bad feature kind");
}

FeatureVector hog(std::span<const float> block) {
    require_block(block, "hog");
    auto px = [&](int x, int y) {
        return double(block[static_cast<std::size_t>(std::clamp(y, 0, kSide - 1)) * kSide + std::clamp(x, 0, kSide - 1)]);
    };
    std::vector<double> cells(kCells * kCells * kBins, 0.0);
    const double bin_width = 180.0 / kBins;
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            double gx = px(x + 1, y) - px(x - 1, y);
            double gy = px(x, y + 1) - px(x, y - 1);
            double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            if (angle < 0) angle += 180.0;
            if (angle >= 180.0) angle -= 180.0;
            double pos = angle / bin_width;  // bin k is centred on k * bin_width
            int b0 = static_cast<int>(std::floor(pos)) % kBins;
            int b1 = (b0 + 1) % kBins;
            double frac = pos - std::floor(pos);
            double* cell = &cells[((y / kCell) * kCells + x / kCell) * kBins];
            cell[b0] += mag * (1.0 - frac);
            cell[b1] += mag * frac;
        }
    }
    FeatureVector f{FeatureKind::HOG, {}};
    f.values.reserve(kHogDims);
    constexpr double eps = 1e-6;
    for (int by = 0; by + 1 < kCells; ++by) {
        for (int bx = 0; bx + 1 < kCells; ++bx) {
            std::vector<double> v;
            for (int cy = by; cy < by + 2; ++cy) {
                for (int cx = bx; cx < bx + 2; ++cx) {
                    const double* cell = &cells[(cy * kCells + cx) * kBins];
                    v.insert(v.end(), cell, cell + kBins);
                }
            }
            auto l2 = [&] {
                double ss = 0.0;
                for (double a : v) ss += a * a;
                return std::sqrt(ss + eps * eps);
            };
            double n = l2();
            for (double& a : v) a = std::min(a / n, 0.2);
            n = l2();
            for (double a : v) f.values.push_back(static_cast<float>(a / n));
        }
    }
    return f;
}

}  // namespace hdrf::features
