#include "hdrf/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "hdrf/error.hpp"

namespace hdrf::dataset {

io::HdrImage fuse_exposures(std::span<const io::LdrImage> stack, std::span<const double> exposure_times,
                            double gamma) {
    if (stack.size() < 2) throw ParameterError("fuse_exposures: need at least two exposures");
    if (stack.size() != exposure_times.size()) {
        throw ParameterError("fuse_exposures: " + std::to_string(stack.size()) + " frames but " +
                             std::to_string(exposure_times.size()) + " exposure times");
    }
    if (!(gamma > 0.0)) throw ParameterError("fuse_exposures: gamma must be > 0");
    for (double t : exposure_times) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("fuse_exposures: exposure times must be positive");
    }
    const int w = stack[0].width, h = stack[0].height;
    for (const auto& f : stack) {
        if (f.width != w || f.height != h) {
            throw ParameterError("fuse_exposures: frame size " + std::to_string(f.width) + "x" +
                                 std::to_string(f.height) + " differs from " + std::to_string(w) + "x" +
                                 std::to_string(h));
        }
    }

    std::array<double, 256> lin{};
    std::array<double, 256> weight{};
    for (int z = 0; z < 256; ++z) {
        lin[z] = std::pow(z / 255.0, gamma);
        weight[z] = hat_weight(z);
    }
    std::vector<std::size_t> order(stack.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return exposure_times[a] < exposure_times[b]; });
    const std::size_t mid = order[(order.size() - 1) / 2];

    io::HdrImage out(w, h);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (std::size_t f = 0; f < stack.size(); ++f) {
            int z = stack[f].data[i];
            num += weight[z] * lin[z] / exposure_times[f];
            den += weight[z];
        }
        double v = den > 0.0 ? num / den : lin[stack[mid].data[i]] / exposure_times[mid];
        out.data[i] = static_cast<float>(v);
    }
    return out;
}

}  // namespace hdrf::dataset
