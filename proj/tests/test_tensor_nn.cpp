#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hdrf/adam.hpp"
#include "hdrf/error.hpp"
#include "hdrf/grad_check.hpp"
#include "hdrf/layers.hpp"
#include "hdrf/random.hpp"

using namespace hdrf;
using namespace hdrf::nn;

namespace {

TensorD random_tensor(Shape s, std::uint64_t seed, double scale = 1.0) {
    TensorD t(std::move(s));
    Rng rng(seed);
    for (auto& v : t.values()) v = scale * rng.normal();
    return t;
}

// Naive direct convolution used as the forward oracle.
TensorD conv_oracle(const TensorD& x, Conv2d<double>& conv, int k, int stride, int pad) {
    const int n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int cout = conv.weight().dim(0);
    const int oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
    TensorD y({n, cout, oh, ow});
    for (int b = 0; b < n; ++b)
        for (int o = 0; o < cout; ++o)
            for (int i = 0; i < oh; ++i)
                for (int j = 0; j < ow; ++j) {
                    double acc = conv.bias()[o];
                    for (int c = 0; c < cin; ++c)
                        for (int u = 0; u < k; ++u)
                            for (int v = 0; v < k; ++v) {
                                int yy = i * stride + u - pad, xx = j * stride + v - pad;
                                if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
                                acc += x.at(b, c, yy, xx) * conv.weight().at(o, c, u, v);
                            }
                    y.at(b, o, i, j) = acc;
                }
    return y;
}

// Passes values through but reports a slightly wrong input gradient.
class CorruptedScale final : public Layer<double> {
public:
    std::string kind() const override { return "corrupted"; }
    Shape output_shape(const Shape& in) const override { return in; }
    TensorD forward(const TensorD& x, Mode) override {
        TensorD y = x;
        for (auto& v : y.values()) v *= 2.0;
        return y;
    }
    TensorD backward(const TensorD& g) override {
        TensorD d = g;
        for (auto& v : d.values()) v *= 2.02;
        return d;
    }
};

}  // namespace

TEST_CASE("conv2d matches direct convolution") {
    for (auto [k, stride, pad] : {std::tuple{3, 1, 1}, {3, 2, 1}, {3, 1, 0}, {1, 2, 0}, {7, 1, 3}}) {
        Conv2d<double> conv(3, 4, k, stride, pad);
        Rng rng(k * 10 + stride);
        he_initialize(conv, rng);
        for (auto& b : conv.bias().values()) b = rng.normal();
        TensorD x = random_tensor({2, 3, 9, 8}, 5);
        TensorD y = conv.forward(x, Mode::EVAL);
        TensorD ref = conv_oracle(x, conv, k, stride, pad);
        REQUIRE(y.shape() == ref.shape());
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d hand examples") {
    Conv2d<double> ones(1, 1, 3, 1, 0);
    ones.weight().fill(1.0);
    TensorD x({1, 1, 3, 3}, 1.0);
    CHECK(ones.forward(x, Mode::EVAL)[0] == 9.0);

    Conv2d<double> ident(1, 1, 3, 1, 1);
    ident.weight().at(0, 0, 1, 1) = 1.0;
    TensorD r = random_tensor({1, 1, 5, 4}, 2);
    TensorD y = ident.forward(r, Mode::EVAL);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(y[i] == r[i]);
    CHECK_THROWS_AS(ident.forward(random_tensor({1, 2, 5, 5}, 1), Mode::EVAL), ParameterError);
}

TEST_CASE("gradient checks per layer") {
    GradCheckOptions opt;
    SUBCASE("conv") {
        Conv2d<double> conv(2, 3, 3, 2, 1);
        Rng rng(1);
        he_initialize(conv, rng);
        CHECK(grad_check(conv, random_tensor({2, 2, 8, 8}, 3), opt).passed(1e-4));
    }
    SUBCASE("batchnorm") {
        BatchNorm2d<double> bn(3);
        Rng rng(2);
        for (auto& g : bn.gamma().values()) g = 1 + 0.3 * rng.normal();
        for (auto& b : bn.beta().values()) b = rng.normal();
        CHECK(grad_check(bn, random_tensor({4, 3, 3, 3}, 4), opt).passed(1e-4));
    }
    SUBCASE("dense") {
        Dense<double> d(7, 5);
        Rng rng(3);
        he_initialize(d, rng);
        CHECK(grad_check(d, random_tensor({3, 7}, 5), opt).passed(1e-8));
    }
    SUBCASE("relu away from the kink") {
        ReLU<double> r;
        GradCheckOptions o = opt;
        o.skip_input_below = 1e-2;
        CHECK(grad_check(r, random_tensor({2, 3, 4, 4}, 6), o).passed(1e-4));
    }
    SUBCASE("pools") {
        MaxPool2d<double> mp;
        AvgPool2d<double> ap(3, 2, 1);
        GlobalAvgPool<double> gp;
        CHECK(grad_check(mp, random_tensor({2, 2, 6, 6}, 7), opt).passed(1e-4));
        CHECK(grad_check(ap, random_tensor({2, 2, 7, 6}, 8), opt).passed(1e-4));
        CHECK(grad_check(gp, random_tensor({2, 3, 4, 5}, 9), opt).passed(1e-8));
    }
    SUBCASE("dropout with a fixed mask and in eval mode") {
        Dropout<double> d(0.5, 1);
        CHECK(grad_check(d, random_tensor({4, 6}, 10), opt).passed(1e-8));
        GradCheckOptions e = opt;
        e.mode = Mode::EVAL;
        CHECK(grad_check(d, random_tensor({4, 6}, 10), e).passed(1e-8));
    }
    SUBCASE("residual block") {
        ResidualBlock<double> rb(2, 3, 2);
        Rng rng(4);
        he_initialize(rb, rng);
        // Internal ReLUs sit behind batch norm; a small step keeps probes off the kinks.
        GradCheckOptions o = opt;
        o.step = 1e-5;
        CHECK(grad_check(rb, random_tensor({3, 2, 6, 6}, 11), o).passed(1e-4));
    }
    SUBCASE("softmax cross-entropy") {
        std::vector<int> labels = {0, 1, 1, 0};
        CHECK(grad_check_softmax_ce(random_tensor({4, 2}, 12, 3.0), labels, opt).passed(1e-5));
    }
}

TEST_CASE("gradient checker flags a corrupted gradient") {
    CorruptedScale bad;
    CHECK_FALSE(grad_check(bad, random_tensor({2, 5}, 1)).passed(1e-4));
}

TEST_CASE("batchnorm statistics") {
    BatchNorm2d<double> bn(2);
    TensorD x = random_tensor({8, 2, 4, 4}, 3, 2.5);
    for (auto& v : x.values()) v += 1.5;
    TensorD y = bn.forward(x, Mode::TRAIN);
    for (int c = 0; c < 2; ++c) {
        double s = 0, ss = 0, xs = 0, xss = 0;
        int n = 0;
        for (int b = 0; b < 8; ++b)
            for (int i = 0; i < 16; ++i) {
                double v = y.at(b, c, i / 4, i % 4), u = x.at(b, c, i / 4, i % 4);
                s += v;
                ss += v * v;
                xs += u;
                xss += u * u;
                ++n;
            }
        CHECK(std::abs(s / n) < 1e-4);
        CHECK(std::abs(ss / n - 1.0) < 1e-3);
        double mean = xs / n, var_unbiased = (xss - n * mean * mean) / (n - 1);
        CHECK(bn.running_mean()[c] == doctest::Approx(0.1 * mean));
        CHECK(bn.running_var()[c] == doctest::Approx(0.9 + 0.1 * var_unbiased));
    }
    CHECK_THROWS_AS(bn.forward(random_tensor({1, 2, 4, 4}, 1), Mode::TRAIN), ParameterError);
    // Fresh running stats are (0, 1), so EVAL on standardized input is nearly the identity.
    BatchNorm2d<double> fresh(2);
    TensorD z = random_tensor({2, 2, 3, 3}, 4);
    TensorD e = fresh.forward(z, Mode::EVAL);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(e[i] == doctest::Approx(z[i]).epsilon(1e-4));
}

TEST_CASE("max pool routes ties to the first index") {
    MaxPool2d<double> mp;
    TensorD x({1, 1, 2, 2});
    x.values()[0] = 1;
    x.values()[1] = 3;
    x.values()[2] = 2;
    x.values()[3] = 0;
    CHECK(mp.forward(x, Mode::EVAL)[0] == 3);
    TensorD t({1, 1, 2, 2}, 5.0);
    mp.forward(t, Mode::TRAIN);
    TensorD g = mp.backward(TensorD({1, 1, 1, 1}, 1.0));
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 0.0);
    CHECK(g[3] == 0.0);
}

TEST_CASE("average pooling excludes padding from the divisor") {
    AvgPool2d<double> ap(3, 2, 1);
    TensorD x({1, 1, 4, 4}, 2.0);
    TensorD y = ap.forward(x, Mode::EVAL);
    CHECK(y.shape() == Shape{1, 1, 2, 2});
    for (double v : y.values()) CHECK(v == doctest::Approx(2.0));
    AvgPool2d<double> plain(3, 2, 0);
    CHECK(plain.forward(TensorD({1, 1, 3, 3}, 1.0), Mode::EVAL)[0] == doctest::Approx(1.0));
    GlobalAvgPool<double> gp;
    TensorD r({1, 1, 4, 4});
    std::iota(r.values().begin(), r.values().end(), 0.0);
    CHECK(gp.forward(r, Mode::EVAL)[0] == doctest::Approx(7.5));
}

TEST_CASE("dense hand examples") {
    Dense<double> d(3, 3);
    d.weight().fill(0);
    for (int i = 0; i < 3; ++i) d.weight()[i * 3 + i] = 1;
    TensorD x = random_tensor({2, 3}, 1);
    TensorD y = d.forward(x, Mode::EVAL);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
    d.weight().fill(0);
    d.bias().values()[1] = 4;
    CHECK(d.forward(x, Mode::EVAL)[4] == 4);
}

TEST_CASE("dropout") {
    Dropout<double> d(0.5, 3);
    TensorD x({1, 10000}, 1.0);
    TensorD e = d.forward(x, Mode::EVAL);
    CHECK(e.values()[17] == 1.0);
    TensorD y = d.forward(x, Mode::TRAIN);
    double mean = std::accumulate(y.values().begin(), y.values().end(), 0.0) / y.size();
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
    for (double v : y.values()) CHECK((v == 0.0 || v == 2.0));
    Dropout<double> none(0.0, 1);
    TensorD z = none.forward(x, Mode::TRAIN);
    CHECK(z.values()[5] == 1.0);
    CHECK_THROWS_AS(Dropout<double>(1.0), ParameterError);
    // Same seed, same mask.
    d.reseed(9);
    TensorD a = d.forward(x, Mode::TRAIN);
    d.reseed(9);
    TensorD b = d.forward(x, Mode::TRAIN);
    CHECK(a.storage() == b.storage());
}

TEST_CASE("residual block with a zeroed main path is relu") {
    ResidualBlock<double> rb(3, 3, 1);
    CHECK_FALSE(rb.has_projection());
    for (auto& p : rb.params()) {
        if (p.name.find("gamma") != std::string::npos || p.name.find("weight") != std::string::npos) p.value->fill(0);
    }
    TensorD x = random_tensor({2, 3, 4, 4}, 5);
    TensorD y = rb.forward(x, Mode::TRAIN);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == std::max(0.0, x[i]));
    ResidualBlock<double> down(3, 6, 2);
    CHECK(down.has_projection());
    CHECK(down.output_shape({2, 3, 8, 8}) == Shape{2, 6, 4, 4});
}

TEST_CASE("softmax and cross-entropy") {
    TensorD z({1, 2}, 0.0);
    std::vector<int> y0 = {0};
    auto r = softmax_cross_entropy(z, std::span<const int>(y0));
    CHECK(r.loss == doctest::Approx(std::log(2.0)));
    CHECK(r.grad[0] == doctest::Approx(-0.5));
    TensorD big({1, 2});
    big.values()[0] = 20;
    big.values()[1] = -20;
    CHECK(softmax_cross_entropy(big, std::span<const int>(y0)).loss < 1e-12);
    TensorD huge({2, 2});
    huge.values()[0] = 1000;
    huge.values()[1] = -1000;
    huge.values()[2] = 3;
    huge.values()[3] = 3;
    TensorD p = softmax(huge);
    CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.5));
    std::vector<int> bad = {2};
    CHECK_THROWS_AS(softmax_cross_entropy(z, std::span<const int>(bad)), ParameterError);
}

TEST_CASE("adam") {
    TensorF w({3}), g({3});
    w.values()[0] = 1;
    w.values()[1] = -2;
    w.values()[2] = 0.5;
    std::vector<ParamRef<float>> params = {{"w", &w, &g}};

    SUBCASE("zero gradient leaves parameters unchanged") {
        Adam adam;
        TensorF before = w;
        adam.step(params);
        CHECK(w.storage() == before.storage());
    }
    SUBCASE("first step is lr * g / (|g| + eps) after bias correction") {
        AdamConfig cfg;
        Adam adam(cfg);
        g.values()[0] = 0.5f;
        g.values()[1] = -3.0f;
        g.values()[2] = 1e-3f;
        TensorF before = w;
        adam.step(params);
        for (int i = 0; i < 3; ++i) {
            double gi = g[i];
            double expected = -cfg.lr * gi / (std::abs(gi) + cfg.eps * std::sqrt(1 - cfg.beta2));
            CHECK(w[i] - before[i] == doctest::Approx(expected).epsilon(1e-4));
        }
    }
    SUBCASE("descends w^2") {
        Adam adam({0.05});
        TensorF s({1}, 1.0f), sg({1});
        std::vector<ParamRef<float>> p1 = {{"s", &s, &sg}};
        for (int i = 0; i < 50; ++i) {
            sg[0] = 2 * s[0];
            adam.step(p1);
        }
        CHECK(std::abs(s[0]) < 0.5);
    }
    SUBCASE("non-finite gradient aborts without touching parameters") {
        Adam adam;
        g.values()[1] = NAN;
        TensorF before = w;
        CHECK_THROWS_AS(adam.step(params), NumericalError);
        CHECK(w.storage() == before.storage());
    }
}

TEST_CASE("tensor basics") {
    TensorF t({2, 3, 4, 5});
    CHECK(t.size() == 120);
    t.at(1, 2, 3, 4) = 7;
    CHECK(t[119] == 7);
    CHECK(t.reshaped({2, 60}).dim(1) == 60);
    CHECK_THROWS_AS(t.reshaped({7}), ParameterError);
    CHECK(t.all_finite());
    t[3] = INFINITY;
    CHECK_FALSE(t.all_finite());
}
