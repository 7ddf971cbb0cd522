#include <doctest.h>

#include <cmath>

#include "hdrf/error.hpp"
#include "hdrf/itmo.hpp"

using namespace hdrf;
using namespace hdrf::itmo;

namespace {

io::LdrImage ramp_image() {
    io::LdrImage img(256, 1);
    for (int z = 0; z < 256; ++z) img.pixel(z, 0)[0] = img.pixel(z, 0)[1] = img.pixel(z, 0)[2] = std::uint8_t(z);
    return img;
}

io::LdrImage disk_image(int size, int radius, std::uint8_t background) {
    io::LdrImage img(size, size);
    std::fill(img.data.begin(), img.data.end(), background);
    const int c = size / 2;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if ((x - c) * (x - c) + (y - c) * (y - c) <= radius * radius) {
                auto* p = img.pixel(x, y);
                p[0] = p[1] = p[2] = 255;
            }
    return img;
}

}  // namespace

TEST_CASE("linear expansion") {
    ItmoParams p;
    auto out = itmo_linear(ramp_image(), p);
    CHECK(out.pixel(255, 0)[0] == doctest::Approx(1000));
    CHECK(out.pixel(0, 0)[0] == 0.0f);
    CHECK(out.pixel(128, 0)[0] == doctest::Approx(1000 * std::pow(128 / 255.0, 2.2)));
    CHECK(out.pixel(128, 0)[0] == doctest::Approx(219.8).epsilon(0.005));

    p.gamma = 1;
    p.l_max = 1;
    auto id = itmo_linear(ramp_image(), p);
    for (int z = 0; z < 256; ++z) CHECK(id.pixel(z, 0)[1] == doctest::Approx(z / 255.0));
}

TEST_CASE("sigmoid expansion hits both endpoints and is strictly increasing") {
    ItmoParams p;
    auto out = itmo_sigmoid(ramp_image(), p);
    CHECK(out.pixel(0, 0)[0] == 0.0f);
    CHECK(out.pixel(255, 0)[0] == doctest::Approx(1000));
    for (int z = 1; z < 256; ++z) CHECK(out.pixel(z, 0)[0] > out.pixel(z - 1, 0)[0]);
}

TEST_CASE("dual region curve") {
    ItmoParams p;
    CHECK(dual_region_curve(0.5, p) == doctest::Approx(500));
    CHECK(dual_region_curve(0.01, p) == doctest::Approx(1000 * 0.01 / 4));
    CHECK(dual_region_curve(0.99, p) == doctest::Approx(1000 * 0.99 * 4));
    for (double knee : {0.04, 0.05, 0.06, p.highlight_threshold - 0.01, p.highlight_threshold,
                        p.highlight_threshold + 0.01}) {
        double lo = dual_region_curve(knee - 1e-9, p), hi = dual_region_curve(knee + 1e-9, p);
        CHECK(std::abs(hi - lo) <= 1e-6 * p.l_max);
    }
    auto out = itmo_dual_region(ramp_image(), p);
    for (int z = 1; z < 256; ++z) CHECK(out.pixel(z, 0)[0] >= out.pixel(z - 1, 0)[0]);
}

TEST_CASE("expand map without highlights equals linear expansion") {
    ItmoParams p;
    io::LdrImage img = disk_image(64, 10, 120);
    for (auto& v : img.data) v = std::min<std::uint8_t>(v, 200);
    auto a = itmo_expand_map(img, p);
    auto b = itmo_linear(img, p);
    CHECK(a.data == b.data);
}

TEST_CASE("expand map on a saturated image multiplies by boost") {
    ItmoParams p;
    io::LdrImage img(40, 30);
    std::fill(img.data.begin(), img.data.end(), 255);
    auto out = itmo_expand_map(img, p);
    for (float v : out.data) CHECK(v == doctest::Approx(1000 * 4).epsilon(1e-6));
}

TEST_CASE("expand map gain decays with distance and tracks a direct Gaussian") {
    ItmoParams p;
    const int size = 200, radius = 8;
    io::LdrImage img = disk_image(size, radius, 100);
    auto out = itmo_expand_map(img, p);
    auto base = itmo_linear(img, p);
    const int c = size / 2;
    double prev = 1e9;
    for (int x = c + radius + 1; x < size; ++x) {
        double gain = out.pixel(x, c)[0] / base.pixel(x, c)[0];
        CHECK(gain <= prev + 1e-9);
        CHECK(gain >= 1.0);
        prev = gain;
    }
    // Direct Gaussian convolution of the mask as the oracle for the blurred map.
    const double sigma = size / 50.0;
    dataset::LuminanceMap mask(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) mask.at(x, y) = img.pixel(x, y)[0] == 255 ? 1.0f : 0.0f;
    double worst = 0;
    for (int x = c - 30; x <= c + 30; x += 3) {
        double acc = 0, norm = 0;
        for (int yy = 0; yy < size; ++yy)
            for (int xx = 0; xx < size; ++xx) {
                double w = std::exp(-((xx - x) * (xx - x) + (yy - c) * (yy - c)) / (2 * sigma * sigma));
                acc += w * mask.at(xx, yy);
                norm += w;
            }
        double e_oracle = acc / norm;
        double e_impl = (out.pixel(x, c)[0] / base.pixel(x, c)[0] - 1.0) / (p.boost - 1.0);
        worst = std::max(worst, std::abs(e_oracle - e_impl));
    }
    CHECK(worst < 0.05);
}

TEST_CASE("box blur keeps constants and leaves far zeros exact") {
    dataset::LuminanceMap m(50, 40, 0.7f);
    for (float v : box_blur3(m, 3.0).values) CHECK(v == doctest::Approx(0.7));
    dataset::LuminanceMap d(50, 40, 0.0f);
    d.at(2, 2) = 1.0f;
    auto b = box_blur3(d, 2.0);
    CHECK(b.at(45, 35) == 0.0f);
}

TEST_CASE("operators stay in range and are deterministic") {
    ItmoParams p;
    io::LdrImage img = disk_image(64, 12, 30);
    for (Operator op : {Operator::LINEAR, Operator::SIGMOID, Operator::EXPAND_MAP, Operator::DUAL_REGION}) {
        p.op = op;
        auto a = apply(img, p);
        auto b = apply(img, p);
        CHECK(a.data == b.data);
        for (float v : a.data) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0f);
            CHECK(v <= p.l_max * p.boost * (1 + 1e-6));
        }
    }
}

TEST_CASE("parameter validation and operator names") {
    ItmoParams p;
    p.gamma = 0;
    CHECK_THROWS_AS(itmo_linear(ramp_image(), p), ParameterError);
    p = {};
    p.highlight_threshold = 1.0;
    CHECK_THROWS_AS(itmo_sigmoid(ramp_image(), p), ParameterError);
    p = {};
    p.boost = 0.5;
    CHECK_THROWS_AS(itmo_dual_region(ramp_image(), p), ParameterError);
    CHECK(parse_operator("EXPAND_MAP") == Operator::EXPAND_MAP);
    CHECK_THROWS_AS(parse_operator("REINHARD"), ParameterError);
}
