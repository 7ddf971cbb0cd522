#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hdrf::io {

/// Linear RGB radiance map, row-major RGB triplets.
struct HdrImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    HdrImage() = default;
    HdrImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    float* pixel(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const float* pixel(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
};

/// 8-bit display-referred RGB image.
struct LdrImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    LdrImage() = default;
    LdrImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::uint8_t* pixel(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* pixel(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
};

/// True when dimensions are positive, the buffer matches, and every component is finite and >= 0.
bool is_valid(const HdrImage& img);

}  // namespace hdrf::io
