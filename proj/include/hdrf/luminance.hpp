#pragma once

#include <cstddef>
#include <vector>

#include "hdrf/image.hpp"

namespace hdrf::dataset {

/// Single-channel scalar map, row-major. Holds linear luminance or its log.
struct LuminanceMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    LuminanceMap() = default;
    LuminanceMap(int w, int h, float fill = 0.0f)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr double kLumR = 0.2126;
inline constexpr double kLumG = 0.7152;
inline constexpr double kLumB = 0.0722;
inline constexpr double kLogEpsilon = 1e-6;

/// Rec. 709 relative luminance per pixel.
LuminanceMap compute_luminance(const io::HdrImage& img);

/// ln(L + epsilon) elementwise. Throws ParameterError for epsilon <= 0.
LuminanceMap log_transform(const LuminanceMap& lum, double epsilon = kLogEpsilon);

/// Box-filter downscale so that max(w, h) == max_dim; identity when already small enough.
LuminanceMap resize_area(const LuminanceMap& map, int max_dim = 1024);

/// Per-image min-max mapping of luminance to [0, 1]; a constant image maps to 0.5.
LuminanceMap normalize_pixels_8bit(const io::HdrImage& img);

}  // namespace hdrf::dataset
