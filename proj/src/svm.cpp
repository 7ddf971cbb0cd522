#include "hdrf/svm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "hdrf/error.hpp"
#include "hdrf/random.hpp"

namespace hdrf::features {
namespace {

double dot_with_bias(std::span<const double> w, std::span<const float> x) {
    double s = w.back();
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
    return s;
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out{idx.size(), x.cols, {}};
    out.data.reserve(idx.size() * x.cols);
    for (std::size_t i : idx) {
        auto r = x.row(i);
        out.data.insert(out.data.end(), r.begin(), r.end());
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v[i]);
        if (i) s += ' ';
        s.append(buf, p);
    }
    return s;
}

std::vector<double> split_doubles(std::string_view s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t end = s.find(' ', pos);
        if (end == std::string_view::npos) end = s.size();
        double v = 0;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + end, v);
        if (ec != std::errc() || p != s.data() + end) throw FormatError("svm model: bad number");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

}  // namespace

double svm_objective(const Matrix& x, std::span<const int> signs, std::span<const double> w, double lambda) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) hinge += std::max(0.0, 1.0 - signs[i] * dot_with_bias(w, x.row(i)));
    return 0.5 * lambda * reg + hinge / double(x.rows);
}

PegasosResult pegasos(const Matrix& x, std::span<const int> signs, double c, int epochs, std::uint64_t seed) {
    if (x.rows == 0 || signs.size() != x.rows) throw ParameterError("pegasos: sample/label mismatch");
    if (!(c > 0)) throw ParameterError("pegasos: C must be > 0");
    const std::size_t n = x.rows, d = x.cols;
    const double lambda = 1.0 / (c * double(n));
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
    std::vector<std::size_t> order(n);
    PegasosResult res;
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(std::span(order));
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * double(t));
            const double m = signs[i] * dot_with_bias(w, x.row(i));
            const double shrink = 1.0 - eta * lambda;  // == 1 - 1/t
            for (double& v : w) v *= shrink;
            if (m < 1.0) {
                auto r = x.row(i);
                for (std::size_t k = 0; k < d; ++k) w[k] += eta * signs[i] * r[k];
                w[d] += eta * signs[i];
            }
            double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
            if (norm > radius) {
                for (double& v : w) v *= radius / norm;
            }
            // Running mean of iterates.
            const double a = 1.0 / double(t);
            for (std::size_t k = 0; k <= d; ++k) avg[k] += a * (w[k] - avg[k]);
        }
        res.objective_per_epoch.push_back(svm_objective(x, signs, avg, lambda));
    }
    res.weights = std::move(avg);
    return res;
}

SvmModel svm_train(const Matrix& features, std::span<const int> labels, const SvmOptions& opt) {
    if (labels.size() != features.rows) throw ParameterError("svm_train: label count mismatch");
    std::size_t pos = std::count(labels.begin(), labels.end(), 1);
    std::size_t neg = std::count(labels.begin(), labels.end(), 0);
    if (pos + neg != labels.size()) throw ParameterError("svm_train: labels must be 0 or 1");
    if (pos < 2 || neg < 2) throw DataError("svm_train: need at least two examples of each class");
    if (opt.grid.empty()) throw ParameterError("svm_train: empty C grid");

    SvmModel model;
    const std::size_t n = features.rows, d = features.cols;
    model.mean.assign(d, 0.0);
    model.scale.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = features.row(i);
        for (std::size_t k = 0; k < d; ++k) model.mean[k] += r[k];
    }
    for (double& m : model.mean) m /= double(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = features.row(i);
        for (std::size_t k = 0; k < d; ++k) var[k] += (r[k] - model.mean[k]) * (r[k] - model.mean[k]);
    }
    for (std::size_t k = 0; k < d; ++k) {
        double sd = std::sqrt(var[k] / double(n));
        model.scale[k] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    Matrix xs = features;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = xs.row(i);
        for (std::size_t k = 0; k < d; ++k) r[k] = static_cast<float>((r[k] - model.mean[k]) * model.scale[k]);
    }
    std::vector<int> signs(n);
    for (std::size_t i = 0; i < n; ++i) signs[i] = labels[i] == 1 ? 1 : -1;

    const int folds = std::clamp<int>(opt.folds, 2, static_cast<int>(n));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng fold_rng(mix_seed(opt.seed, 0xF01D));
    fold_rng.shuffle(std::span(perm));

    double best_acc = -1.0;
    for (double c : opt.grid) {
        std::size_t correct = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> tr, te;
            for (std::size_t k = 0; k < n; ++k) (static_cast<int>(k % folds) == f ? te : tr).push_back(perm[k]);
            Matrix xtr = select_rows(xs, tr);
            std::vector<int> str;
            for (std::size_t i : tr) str.push_back(signs[i]);
            auto fit = pegasos(xtr, str, c, opt.epochs, mix_seed(opt.seed, 100 + f));
            for (std::size_t i : te) {
                double m = dot_with_bias(fit.weights, xs.row(i));
                if ((m > 0 ? 1 : -1) == signs[i]) ++correct;
            }
        }
        double acc = double(correct) / double(n);
        if (acc > best_acc) {
            best_acc = acc;
            model.c = c;
        }
    }
    model.cv_accuracy = best_acc;
    auto fit = pegasos(xs, signs, model.c, opt.epochs, mix_seed(opt.seed, 7));
    model.bias = fit.weights.back();
    fit.weights.pop_back();
    model.weights = std::move(fit.weights);
    return model;
}

SvmPrediction svm_predict(const SvmModel& model, std::span<const float> feature) {
    if (feature.size() != model.weights.size()) {
        throw ParameterError("svm_predict: feature has " + std::to_string(feature.size()) + " dims, model expects " +
                             std::to_string(model.weights.size()));
    }
    double m = model.bias;
    for (std::size_t k = 0; k < feature.size(); ++k) {
        m += model.weights[k] * (feature[k] - model.mean[k]) * model.scale[k];
    }
    return {m > 0 ? 1 : 0, m};
}

std::string serialize_svm(const SvmModel& m) {
    std::ostringstream os;
    os << "HDRF-SVM v1\n";
    os << "tag=" << m.tag << '\n';
    os << "c=" << join({m.c}) << '\n';
    os << "cv_accuracy=" << join({m.cv_accuracy}) << '\n';
    os << "bias=" << join({m.bias}) << '\n';
    os << "dims=" << m.weights.size() << '\n';
    os << "weights=" << join(m.weights) << '\n';
    os << "mean=" << join(m.mean) << '\n';
    os << "scale=" << join(m.scale) << '\n';
    return os.str();
}

SvmModel parse_svm(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "HDRF-SVM v1") throw FormatError("svm model: missing header");
    SvmModel m;
    std::size_t dims = 0;
    std::set<std::string> seen;
    auto scalar = [](std::string_view v, const std::string& key) {
        auto d = split_doubles(v);
        if (d.size() != 1) throw FormatError("svm model: " + key + " needs one value");
        return d[0];
    };
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string_view val = std::string_view(line).substr(eq + 1);
        if (key == "tag") m.tag = std::string(val);
        else if (key == "c") m.c = scalar(val, key);
        else if (key == "cv_accuracy") m.cv_accuracy = scalar(val, key);
        else if (key == "bias") m.bias = scalar(val, key);
        else if (key == "dims") dims = static_cast<std::size_t>(scalar(val, key));
        else if (key == "weights") m.weights = split_doubles(val);
        else if (key == "mean") m.mean = split_doubles(val);
        else if (key == "scale") m.scale = split_doubles(val);
        else throw FormatError("svm model: unknown key " + key);
        seen.insert(key);
    }
    for (const char* k : {"c", "bias", "dims", "weights", "mean", "scale"}) {
        if (!seen.count(k)) throw FormatError(std::string("svm model: missing ") + k);
    }
    if (dims == 0 || m.weights.size() != dims || m.mean.size() != dims || m.scale.size() != dims) {
        throw FormatError("svm model: dimension mismatch");
    }
    return m;
}

}  // namespace hdrf::features
