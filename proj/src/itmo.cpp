#include "hdrf/itmo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hdrf/error.hpp"

namespace hdrf::itmo {
namespace {

constexpr double kShadowKnee = 0.05;
constexpr double kBand = 0.02;

std::array<double, 256> code_table(double gamma, double scale) {
    std::array<double, 256> t{};
    for (int z = 0; z < 256; ++z) t[z] = scale * std::pow(z / 255.0, gamma);
    return t;
}

io::HdrImage map_codes(const io::LdrImage& img, const std::array<double, 256>& table) {
    io::HdrImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = static_cast<float>(table[img.data[i]]);
    return out;
}

// One box pass of half-width r along rows (horizontal) or columns, edge-clamped.
// Sums are taken directly so that an all-zero window yields exactly zero.
dataset::LuminanceMap box_pass(const dataset::LuminanceMap& in, int r, bool horizontal) {
    dataset::LuminanceMap out(in.width, in.height);
    const double norm = 1.0 / (2 * r + 1);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) {
                acc += horizontal ? in.at(std::clamp(x + k, 0, in.width - 1), y)
                                  : in.at(x, std::clamp(y + k, 0, in.height - 1));
            }
            out.at(x, y) = static_cast<float>(std::min(1.0, acc * norm));
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(Operator op) {
    switch (op) {
        case Operator::LINEAR: return "LINEAR";
        case Operator::SIGMOID: return "SIGMOID";
        case Operator::EXPAND_MAP: return "EXPAND_MAP";
        case Operator::DUAL_REGION: return "DUAL_REGION";
    }
    return "LINEAR";
}

Operator parse_operator(std::string_view name) {
    for (Operator op : {Operator::LINEAR, Operator::SIGMOID, Operator::EXPAND_MAP, Operator::DUAL_REGION}) {
        if (name == to_string(op)) return op;
    }
    throw ParameterError("unknown iTMO operator '" + std::string(name) +
                         "' (expected LINEAR, SIGMOID, EXPAND_MAP or DUAL_REGION)");
}

void validate(const ItmoParams& p) {
    if (!(p.gamma > 0)) throw ParameterError("itmo: gamma must be > 0");
    if (!(p.l_max > 0)) throw ParameterError("itmo: l_max must be > 0");
    if (!(p.highlight_threshold > 0 && p.highlight_threshold < 1)) {
        throw ParameterError("itmo: highlight_threshold must lie in (0, 1)");
    }
    if (!(p.boost >= 1)) throw ParameterError("itmo: boost must be >= 1");
    if (!(p.sigma_s > 0)) throw ParameterError("itmo: sigma_s must be > 0");
}

io::HdrImage itmo_linear(const io::LdrImage& img, const ItmoParams& p) {
    validate(p);
    return map_codes(img, code_table(p.gamma, p.l_max));
}

io::HdrImage itmo_sigmoid(const io::LdrImage& img, const ItmoParams& p) {
    validate(p);
    std::array<double, 256> t{};
    for (int z = 0; z < 256; ++z) {
        double n = std::pow(z / 255.0, p.gamma);
        t[z] = p.l_max * p.sigma_s * n / (1.0 + p.sigma_s - n);
    }
    return map_codes(img, t);
}

dataset::LuminanceMap box_blur3(const dataset::LuminanceMap& map, double sigma) {
    // Three passes whose widths (odd, lower or lower + 2) sum to variance sigma^2;
    // a pass of width w adds (w^2 - 1) / 12.
    const double ideal = std::sqrt(4.0 * sigma * sigma + 1.0);
    int lower = static_cast<int>(std::floor(ideal));
    if (lower % 2 == 0) --lower;
    lower = std::max(lower, 1);
    const int upper = lower + 2;
    const double target = 12.0 * sigma * sigma;
    const int n_lower = std::clamp(
        static_cast<int>(std::lround((target - 3.0 * upper * upper + 3.0) / (lower * lower - upper * upper))), 0, 3);
    dataset::LuminanceMap cur = map;
    for (int pass = 0; pass < 3; ++pass) {
        const int r = ((pass < n_lower ? lower : upper) - 1) / 2;
        cur = box_pass(cur, r, true);
        cur = box_pass(cur, r, false);
    }
    return cur;
}

io::HdrImage itmo_expand_map(const io::LdrImage& img, const ItmoParams& p) {
    io::HdrImage out = itmo_linear(img, p);
    dataset::LuminanceMap mask(img.width, img.height);
    bool any = false;
    for (std::size_t i = 0; i < mask.values.size(); ++i) {
        const std::uint8_t* z = img.data.data() + i * 3;
        double lum = (dataset::kLumR * z[0] + dataset::kLumG * z[1] + dataset::kLumB * z[2]) / 255.0;
        if (lum >= p.highlight_threshold) {
            mask.values[i] = 1.0f;
            any = true;
        }
    }
    if (!any) return out;
    double sigma = std::max(img.width, img.height) / 50.0;
    dataset::LuminanceMap e = box_blur3(mask, sigma);
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        double gain = 1.0 + (p.boost - 1.0) * e.values[i];
        for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = static_cast<float>(out.data[i * 3 + c] * gain);
    }
    return out;
}

double dual_region_curve(double n, const ItmoParams& p) {
    auto ramp = [](double x, double knee) { return std::clamp((x - (knee - kBand / 2)) / kBand, 0.0, 1.0); };
    double shadow_gain = 1.0 / p.boost;
    double a = ramp(n, kShadowKnee);
    double b = ramp(n, p.highlight_threshold);
    double gain = (1.0 - a) * shadow_gain + a * ((1.0 - b) + b * p.boost);
    return p.l_max * n * gain;
}

io::HdrImage itmo_dual_region(const io::LdrImage& img, const ItmoParams& p) {
    validate(p);
    std::array<double, 256> t{};
    for (int z = 0; z < 256; ++z) t[z] = dual_region_curve(std::pow(z / 255.0, p.gamma), p);
    return map_codes(img, t);
}

io::HdrImage apply(const io::LdrImage& img, const ItmoParams& p) {
    switch (p.op) {
        case Operator::LINEAR: return itmo_linear(img, p);
        case Operator::SIGMOID: return itmo_sigmoid(img, p);
        case Operator::EXPAND_MAP: return itmo_expand_map(img, p);
        case Operator::DUAL_REGION: return itmo_dual_region(img, p);
    }
    throw ParameterError("itmo: bad operator");
}

}  // namespace hdrf::itmo
