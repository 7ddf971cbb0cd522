#include "hdrf/luminance.hpp"

#include <algorithm>
#include <cmath>

#include "hdrf/error.hpp"

namespace hdrf::dataset {

LuminanceMap compute_luminance(const io::HdrImage& img) {
    LuminanceMap out(img.width, img.height);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const float* p = img.data.data() + i * 3;
        out.values[i] = static_cast<float>(kLumR * p[0] + kLumG * p[1] + kLumB * p[2]);
    }
    return out;
}

LuminanceMap log_transform(const LuminanceMap& lum, double epsilon) {
    if (!(epsilon > 0.0)) throw ParameterError("log_transform: epsilon must be > 0");
    LuminanceMap out(lum.width, lum.height);
    for (std::size_t i = 0; i < lum.values.size(); ++i) {
        out.values[i] = static_cast<float>(std::log(double(lum.values[i]) + epsilon));
    }
    return out;
}

LuminanceMap resize_area(const LuminanceMap& map, int max_dim) {
    if (max_dim < 64) throw ParameterError("resize_area: max_dim must be >= 64");
    int longest = std::max(map.width, map.height);
    if (longest <= max_dim) return map;

    double scale = double(longest) / max_dim;  // source pixels per output pixel
    int ow = std::max(1, static_cast<int>(std::lround(map.width / scale)));
    int oh = std::max(1, static_cast<int>(std::lround(map.height / scale)));
    if (map.width >= map.height) ow = max_dim; else oh = max_dim;
    double sx = double(map.width) / ow;
    double sy = double(map.height) / oh;

    // Separable area averaging: each output sample integrates its source footprint exactly.
    auto footprint = [](int o, double s, int limit, auto&& visit) {
        double a = o * s, b = (o + 1) * s;
        int i0 = static_cast<int>(std::floor(a));
        int i1 = std::min(limit, static_cast<int>(std::ceil(b)));
        for (int i = i0; i < i1; ++i) {
            double w = std::min(b, double(i + 1)) - std::max(a, double(i));
            if (w > 0) visit(i, w / s);
        }
    };

    std::vector<double> rows(static_cast<std::size_t>(ow) * map.height, 0.0);
    for (int y = 0; y < map.height; ++y) {
        for (int ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            footprint(ox, sx, map.width, [&](int x, double w) { acc += w * map.at(x, y); });
            rows[static_cast<std::size_t>(y) * ow + ox] = acc;
        }
    }
    LuminanceMap out(ow, oh);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double acc = 0.0;
            footprint(oy, sy, map.height, [&](int y, double w) { acc += w * rows[static_cast<std::size_t>(y) * ow + ox]; });
            out.at(ox, oy) = static_cast<float>(acc);
        }
    }
    return out;
}

LuminanceMap normalize_pixels_8bit(const io::HdrImage& img) {
    LuminanceMap lum = compute_luminance(img);
    auto [lo, hi] = std::minmax_element(lum.values.begin(), lum.values.end());
    double mn = *lo, mx = *hi;
    for (float& v : lum.values) {
        v = mx > mn ? static_cast<float>((v - mn) / (mx - mn)) : 0.5f;
    }
    return lum;
}

}  // namespace hdrf::dataset
