#include "hdrf/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "hdrf/random.hpp"

namespace hdrf::nn {
namespace {

double projected_loss(const Tensor<double>& out, const Tensor<double>& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * r[i];
    return s;
}

template <typename Eval>
GradCheckEntry compare(const std::string& name, std::span<double> values, std::span<const double> analytic,
                       const GradCheckOptions& opt, Eval&& eval, double skip_below = 0.0) {
    GradCheckEntry e{name, 0.0, 0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (skip_below > 0.0 && std::abs(values[i]) < skip_below) continue;
        double orig = values[i];
        values[i] = orig + opt.step;
        double up = eval();
        values[i] = orig - opt.step;
        double down = eval();
        values[i] = orig;
        double numeric = (up - down) / (2.0 * opt.step);
        double err = relative_error(analytic[i], numeric, opt.floor);
        ++e.checked;
        if (err > e.max_rel_error) {
            e.max_rel_error = err;
            e.worst_index = i;
        }
    }
    return e;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
    double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

double GradCheckReport::max_error() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_error);
    return m;
}

GradCheckReport grad_check(Layer<double>& layer, const Tensor<double>& input, const GradCheckOptions& opt) {
    Rng rng(mix_seed(opt.seed, 77));
    Tensor<double> x = input;
    const std::uint64_t layer_seed = mix_seed(opt.seed, 99);

    layer.reseed(layer_seed);
    Tensor<double> out = layer.forward(x, opt.mode);
    Tensor<double> r(out.shape());
    for (auto& v : r.values()) v = rng.normal();

    auto params = layer.params();
    for (auto& p : params) p.grad->fill(0.0);
    Tensor<double> dx = layer.backward(r);

    std::vector<std::vector<double>> analytic;
    for (auto& p : params) analytic.emplace_back(p.grad->values().begin(), p.grad->values().end());

    auto eval = [&]() {
        layer.reseed(layer_seed);
        return projected_loss(layer.forward(x, opt.mode), r);
    };

    GradCheckReport report;
    report.entries.push_back(compare("input", x.values(), dx.values(), opt, eval, opt.skip_input_below));
    for (std::size_t k = 0; k < params.size(); ++k) {
        report.entries.push_back(compare(params[k].name, params[k].value->values(), analytic[k], opt, eval));
    }
    return report;
}

GradCheckReport grad_check_softmax_ce(const Tensor<double>& logits, std::span<const int> labels,
                                      const GradCheckOptions& opt) {
    Tensor<double> x = logits;
    LossResult<double> res = softmax_cross_entropy(x, labels);
    auto eval = [&]() { return softmax_cross_entropy(x, labels).loss; };
    GradCheckReport report;
    report.entries.push_back(compare("logits", x.values(), res.grad.values(), opt, eval));
    return report;
}

}  // namespace hdrf::nn
