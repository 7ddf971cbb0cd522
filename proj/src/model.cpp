#include "hdrf/model.hpp"

#include <string>

#include "hdrf/error.hpp"
#include "hdrf/random.hpp"

namespace hdrf::models {

std::string_view to_string(Architecture a) { return a == Architecture::PLAIN ? "PLAIN" : "RESIDUAL"; }

Architecture parse_architecture(std::string_view s) {
    if (s == "PLAIN" || s == "plain") return Architecture::PLAIN;
    if (s == "RESIDUAL" || s == "residual") return Architecture::RESIDUAL;
    throw ParameterError("unknown architecture '" + std::string(s) + "' (expected PLAIN or RESIDUAL)");
}

ModelSpec ModelSpec::scaled(Architecture arch, int divisor) {
    if (divisor < 1) throw ParameterError("width divisor must be >= 1");
    ModelSpec s;
    s.arch = arch;
    for (int& w : s.widths) w = std::max(1, w / divisor);
    s.dense_width = std::max(1, s.dense_width / divisor);
    s.stem_width = std::max(1, s.stem_width / divisor);
    return s;
}

void ModelSpec::validate() const {
    for (int w : widths) {
        if (w < 1) throw ParameterError("model: stage widths must be positive");
    }
    if (dense_width < 1 || stem_width < 1) throw ParameterError("model: widths must be positive");
    if (input_size < 8 || input_size % 8 != 0) throw ParameterError("model: input size must be a multiple of 8");
    if (!(dropout >= 0 && dropout < 1)) throw ParameterError("model: dropout must lie in [0, 1)");
}

template <typename T>
std::unique_ptr<nn::Sequential<T>> build_layers(const ModelSpec& spec, std::uint64_t seed) {
    using namespace nn;
    spec.validate();
    auto net = std::make_unique<Sequential<T>>();
    Dense<T>* classifier = nullptr;
    if (spec.arch == Architecture::PLAIN) {
        int cin = 1;
        for (int w : spec.widths) {
            for (int k = 0; k < 2; ++k) {
                net->template emplace<Conv2d<T>>(cin, w, 3, 1, 1);
                net->template emplace<ReLU<T>>();
                net->template emplace<BatchNorm2d<T>>(w);
                cin = w;
            }
            net->template emplace<MaxPool2d<T>>(2, 2);
        }
        int side = spec.input_size / 8;
        net->template emplace<Flatten<T>>();
        net->template emplace<Dense<T>>(cin * side * side, spec.dense_width);
        net->template emplace<ReLU<T>>();
        net->template emplace<Dropout<T>>(spec.dropout);
        net->template emplace<Dense<T>>(spec.dense_width, spec.dense_width);
        net->template emplace<ReLU<T>>();
        net->template emplace<Dropout<T>>(spec.dropout);
        classifier = &net->template emplace<Dense<T>>(spec.dense_width, 2);
    } else {
        net->template emplace<Conv2d<T>>(1, spec.stem_width, 7, 1, 3);
        net->template emplace<BatchNorm2d<T>>(spec.stem_width);
        net->template emplace<ReLU<T>>();
        net->template emplace<AvgPool2d<T>>(3, 2, 1);
        int cin = spec.stem_width;
        for (std::size_t s = 0; s < spec.widths.size(); ++s) {
            int w = spec.widths[s];
            net->template emplace<ResidualBlock<T>>(cin, w, s == 0 ? 1 : 2);
            net->template emplace<ResidualBlock<T>>(w, w, 1);
            cin = w;
        }
        net->template emplace<GlobalAvgPool<T>>();
        classifier = &net->template emplace<Dense<T>>(cin, 2);
    }
    Rng rng(mix_seed(seed, 0x1417));
    he_initialize(*net, rng);
    for (auto& v : classifier->weight().values()) v = static_cast<T>(v * kClassifierGain);
    net->reseed(mix_seed(seed, 0xD0));
    return net;
}

std::size_t parameter_count(nn::Sequential<float>& net) {
    std::size_t n = 0;
    for (const auto& p : net.params()) n += p.value->size();
    return n;
}

template <typename T>
std::vector<nn::Layer<T>*> leaf_layers(nn::Layer<T>& root) {
    std::vector<nn::Layer<T>*> out;
    if (auto* seq = dynamic_cast<nn::Sequential<T>*>(&root)) {
        for (std::size_t i = 0; i < seq->size(); ++i) {
            auto sub = leaf_layers(seq->layer(i));
            out.insert(out.end(), sub.begin(), sub.end());
        }
    } else if (auto* res = dynamic_cast<nn::ResidualBlock<T>*>(&root)) {
        auto sub = leaf_layers<T>(res->main_path());
        out.insert(out.end(), sub.begin(), sub.end());
        if (res->projection()) out.push_back(res->projection());
    } else {
        out.push_back(&root);
    }
    return out;
}

template std::unique_ptr<nn::Sequential<float>> build_layers<float>(const ModelSpec&, std::uint64_t);
template std::unique_ptr<nn::Sequential<double>> build_layers<double>(const ModelSpec&, std::uint64_t);
template std::vector<nn::Layer<float>*> leaf_layers<float>(nn::Layer<float>&);
template std::vector<nn::Layer<double>*> leaf_layers<double>(nn::Layer<double>&);

}  // namespace hdrf::models
