#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace hdrf::features {

enum class FeatureKind { HOG, LBP, SPAM };

std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view s);
/// Descriptor length: HOG 324, LBP 944, SPAM 686.
int feature_dims(FeatureKind k);

struct FeatureVector {
    FeatureKind kind = FeatureKind::HOG;
    std::vector<float> values;
};

inline constexpr int kHogDims = 324;
inline constexpr int kLbpDims = 944;
inline constexpr int kSpamDims = 686;

/// 16x16-pixel cells (4x4 grid), 9 unsigned orientation bins centred on 0, 20, ..., 160 degrees
/// with linear vote splitting, 2x2-cell blocks at one-cell stride, L2-Hys (clip 0.2) per block.
FeatureVector hog(std::span<const float> block);

/// Radius-1 8-neighbour LBP (bit set when neighbour > centre), 59-bin uniform histograms
/// computed inside each 16x16 region of a 4x4 grid over the region's 14x14 interior.
FeatureVector lbp_uniform(std::span<const float> block);

/// Second-order SPAM with T = 3 on the min-max 8-bit quantized block: transition
/// probabilities averaged over {left, right, up, down} and over the four diagonals.
FeatureVector spam(std::span<const float> block);

FeatureVector extract(FeatureKind kind, std::span<const float> block);

/// Maps each of the 256 LBP codes to its uniform bin (0..57) or the shared non-uniform bin 58.
const std::vector<int>& uniform_lbp_table();

}  // namespace hdrf::features
