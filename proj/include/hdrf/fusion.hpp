#pragma once

#include <span>
#include <vector>

#include "hdrf/image.hpp"

namespace hdrf::dataset {

/// Hat weight on 8-bit code values: 0 at both ends, ~1 at mid-gray.
inline double hat_weight(int z) {
    double t = 2.0 * z / 255.0 - 1.0;
    return 1.0 - (t < 0 ? -t : t);
}

/// Merges a bracketed LDR stack into a radiance map.
/// Each code is linearised as (z/255)^gamma and divided by its exposure time; frames are
/// averaged with hat weights. Where every frame has zero weight the lower-median exposure
/// supplies the value. Throws ParameterError on mismatched sizes or non-positive times.
io::HdrImage fuse_exposures(std::span<const io::LdrImage> stack, std::span<const double> exposure_times,
                            double gamma = 2.2);

}  // namespace hdrf::dataset
