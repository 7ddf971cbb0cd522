#pragma once

#include <string_view>

#include "hdrf/image.hpp"
#include "hdrf/luminance.hpp"

namespace hdrf::itmo {

enum class Operator { LINEAR, SIGMOID, EXPAND_MAP, DUAL_REGION };

std::string_view to_string(Operator op);
/// Throws ParameterError for an unknown name.
Operator parse_operator(std::string_view name);

/// Parameters shared by the four expansion operators. Validated by every operator.
struct ItmoParams {
    Operator op = Operator::LINEAR;
    double gamma = 2.2;
    double l_max = 1000.0;
    double highlight_threshold = 0.92;
    double boost = 4.0;
    double sigma_s = 0.6;
};

void validate(const ItmoParams& p);

/// Global power-law expansion: l_max * (z/255)^gamma.
io::HdrImage itmo_linear(const io::LdrImage& img, const ItmoParams& p);

/// Sigmoid-like response: with n = (z/255)^gamma, l_max * s*n / (1 + s - n).
io::HdrImage itmo_sigmoid(const io::LdrImage& img, const ItmoParams& p);

/// Linear expansion boosted inside a blurred mask of near-saturated pixels:
/// base * (1 + (boost - 1) * E) where E is the blurred mask.
io::HdrImage itmo_expand_map(const io::LdrImage& img, const ItmoParams& p);

/// Pointwise expansion that deepens shadows (n < 0.05) and boosts highlights
/// (n > highlight_threshold), blended linearly over 0.02-wide bands at both knees.
io::HdrImage itmo_dual_region(const io::LdrImage& img, const ItmoParams& p);

io::HdrImage apply(const io::LdrImage& img, const ItmoParams& p);

/// Scalar transfer used by itmo_dual_region, exposed for continuity checks.
double dual_region_curve(double n, const ItmoParams& p);

/// Three-pass box approximation of a Gaussian with standard deviation sigma,
/// clamped at the borders so a constant map stays constant.
dataset::LuminanceMap box_blur3(const dataset::LuminanceMap& map, double sigma);

}  // namespace hdrf::itmo
