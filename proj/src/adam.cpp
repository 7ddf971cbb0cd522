#include "hdrf/adam.hpp"

#include <cmath>

#include "hdrf/error.hpp"

namespace hdrf::nn {

void Adam::step(std::vector<ParamRef<float>>& params) {
    for (const auto& p : params) {
        if (!p.grad->all_finite()) throw NumericalError("adam: non-finite gradient in " + p.name);
    }
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.value->size(), 0.0f);
            v_.emplace_back(p.value->size(), 0.0f);
        }
    }
    if (m_.size() != params.size()) throw ParameterError("adam: parameter list changed between steps");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    const float b1 = static_cast<float>(cfg_.beta1), b2 = static_cast<float>(cfg_.beta2);
    for (std::size_t k = 0; k < params.size(); ++k) {
        float* w = params[k].value->data();
        const float* g = params[k].grad->data();
        float* m = m_[k].data();
        float* v = v_[k].data();
        const std::size_t n = params[k].value->size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1.0f - b1) * g[i];
            v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
            double mhat = m[i] / c1;
            double vhat = v[i] / c2;
            w[i] = static_cast<float>(w[i] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

}  // namespace hdrf::nn
