#pragma once

#include <cstdint>
#include <vector>

#include "hdrf/layers.hpp"

namespace hdrf::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed parameter list (the order must not change between steps).
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// Applies one update. Throws NumericalError naming the parameter if any gradient is non-finite;
    /// parameters are left untouched in that case.
    void step(std::vector<ParamRef<float>>& params);

    std::uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    // Moment buffers, exposed for checkpointing.
    std::vector<std::vector<float>>& first_moments() { return m_; }
    std::vector<std::vector<float>>& second_moments() { return v_; }
    void set_steps(std::uint64_t t) { t_ = t; }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<float>> m_, v_;
};

/// Zeroes every gradient tensor in the list.
template <typename T>
void zero_grads(std::vector<ParamRef<T>>& params) {
    for (auto& p : params) p.grad->fill(T(0));
}

}  // namespace hdrf::nn
