#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdrf/layers.hpp"

namespace hdrf::nn {

struct GradCheckEntry {
    std::string name;  // "input" or the parameter name
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_error() const;
    bool passed(double tolerance) const { return max_error() <= tolerance; }
};

struct GradCheckOptions {
    double step = 1e-3;
    // Relative error is |a - n| / max(|a|, |n|, floor); the floor keeps near-zero
    // gradients from turning round-off into huge ratios.
    double floor = 1e-3;
    std::uint64_t seed = 1;
    Mode mode = Mode::TRAIN;
    // Input elements with |x| below this are skipped (kinks of ReLU-like ops). 0 disables.
    double skip_input_below = 0.0;
};

/// Compares the layer's analytic gradients against central differences of
/// L(x) = sum(r * layer(x)) with a fixed random projection r, for the input and
/// every parameter tensor. Runs entirely in double precision.
GradCheckReport grad_check(Layer<double>& layer, const Tensor<double>& input, const GradCheckOptions& opt = {});

/// Same comparison for softmax cross-entropy with respect to the logits.
GradCheckReport grad_check_softmax_ce(const Tensor<double>& logits, std::span<const int> labels,
                                      const GradCheckOptions& opt = {});

/// Elementwise relative error with the checker's floor convention.
double relative_error(double analytic, double numeric, double floor);

}  // namespace hdrf::nn
