#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "hdrf/binary_io.hpp"
#include "hdrf/image.hpp"

namespace hdrf::io {

// Radiance RGBE (.hdr). Only the "-Y h +X w" orientation is accepted.
HdrImage decode_rgbe(std::span<const std::uint8_t> bytes);
/// Header plus flat scanlines. Throws FormatError on a non-finite or negative component.
Bytes encode_rgbe(const HdrImage& img);

/// Shared-exponent packing of one pixel; mantissas are rounded to nearest.
std::array<std::uint8_t, 4> float_to_rgbe(float r, float g, float b);
std::array<float, 3> rgbe_to_float(std::array<std::uint8_t, 4> q);

// Portable float map, colour ("PF") only. Rows are stored bottom-to-top on disk.
HdrImage decode_pfm(std::span<const std::uint8_t> bytes);
Bytes encode_pfm(const HdrImage& img);

// Binary PPM, maxval 255.
LdrImage decode_ppm(std::span<const std::uint8_t> bytes);
Bytes encode_ppm(const LdrImage& img);

}  // namespace hdrf::io
