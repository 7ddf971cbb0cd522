#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hdrf/error.hpp"
#include "hdrf/feature_store.hpp"
#include "hdrf/features.hpp"
#include "hdrf/random.hpp"
#include "hdrf/svm.hpp"
#include "test_util.hpp"

using namespace hdrf;
using namespace hdrf::features;

namespace {

std::vector<float> random_block(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> b(64 * 64);
    for (auto& v : b) v = static_cast<float>(rng.normal());
    return b;
}

// Two Gaussian blobs in `dims` dimensions, centres at +/- sep along every axis.
Matrix blobs(int per_class, int dims, double sep, std::uint64_t seed, std::vector<int>& labels) {
    Rng rng(seed);
    Matrix m{static_cast<std::size_t>(2 * per_class), static_cast<std::size_t>(dims), {}};
    labels.clear();
    for (int i = 0; i < 2 * per_class; ++i) {
        int y = i % 2;
        labels.push_back(y);
        for (int d = 0; d < dims; ++d) m.data.push_back(static_cast<float>((y ? sep : -sep) + rng.normal()));
    }
    return m;
}

}  // namespace

TEST_CASE("descriptor dimensions") {
    auto b = random_block(1);
    CHECK(hog(b).values.size() == 324);
    CHECK(lbp_uniform(b).values.size() == 944);
    CHECK(spam(b).values.size() == 686);
    CHECK(feature_dims(FeatureKind::SPAM) == 2 * 7 * 7 * 7);
    CHECK(feature_dims(FeatureKind::HOG) == 9 * 4 * 9);
    CHECK(feature_dims(FeatureKind::LBP) == 16 * 59);
    std::vector<float> small(63 * 64);
    CHECK_THROWS_AS(hog(small), ParameterError);
    CHECK_THROWS_AS(lbp_uniform(small), ParameterError);
    CHECK_THROWS_AS(spam(small), ParameterError);
    for (auto kind : {FeatureKind::HOG, FeatureKind::LBP, FeatureKind::SPAM})
        for (float v : extract(kind, b).values) CHECK(std::isfinite(v));
}

TEST_CASE("hog") {
    std::vector<float> flat(64 * 64, 3.5f);
    for (float v : hog(flat).values) CHECK(v == 0.0f);

    // A vertical step edge has purely horizontal gradients: everything lands in the 0-degree bin.
    std::vector<float> edge(64 * 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) edge[y * 64 + x] = x < 24 ? 0.0f : 1.0f;
    auto h = hog(edge).values;
    double total = 0, bin0 = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        total += h[i];
        if (i % 9 == 0) bin0 += h[i];
    }
    CHECK(total > 0);
    CHECK(bin0 / total > 0.999);

    auto b = random_block(2);
    auto shifted = b;
    for (auto& v : shifted) v += 2.0f;
    auto h1 = hog(b).values, h2 = hog(shifted).values;
    for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i] == doctest::Approx(h2[i]).epsilon(1e-4));
    // L2-Hys: every 36-value block has unit norm.
    for (int blk = 0; blk < 9; ++blk) {
        double ss = 0;
        for (int k = 0; k < 36; ++k) ss += double(h1[blk * 36 + k]) * h1[blk * 36 + k];
        CHECK(ss == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("uniform lbp table") {
    const auto& t = uniform_lbp_table();
    int uniform = 0;
    for (int code = 0; code < 256; ++code) {
        int trans = 0;
        for (int i = 0; i < 8; ++i) trans += ((code >> i) & 1) != ((code >> ((i + 1) % 8)) & 1);
        if (trans <= 2) {
            ++uniform;
            CHECK(t[code] < 58);
        } else {
            CHECK(t[code] == 58);
        }
    }
    CHECK(uniform == 58);
}

TEST_CASE("lbp") {
    std::vector<float> flat(64 * 64, -1.0f);
    auto f = lbp_uniform(flat).values;
    for (int r = 0; r < 16; ++r) {
        CHECK(f[r * 59 + uniform_lbp_table()[0]] == 196.0f);
        CHECK(std::accumulate(f.begin() + r * 59, f.begin() + (r + 1) * 59, 0.0) == 196.0);
    }
    auto b = random_block(3);
    auto g = lbp_uniform(b).values;
    for (int r = 0; r < 16; ++r) CHECK(std::accumulate(g.begin() + r * 59, g.begin() + (r + 1) * 59, 0.0) == 196.0);
    // Strictly monotone remap leaves every code unchanged.
    auto m = b;
    for (auto& v : m) v = std::exp(v) + 3.0f * v;
    CHECK(lbp_uniform(m).values == g);
}

TEST_CASE("spam rows are conditional distributions") {
    auto f = spam(random_block(4)).values;
    for (int row = 0; row < 686 / 7; ++row) {
        double s = 0;
        for (int k = 0; k < 7; ++k) {
            CHECK(f[row * 7 + k] >= 0.0f);
            s += f[row * 7 + k];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
    }
    std::vector<float> flat(64 * 64, 2.0f);
    for (float v : spam(flat).values) CHECK(v == doctest::Approx(1.0 / 7));
}

TEST_CASE("spam on a horizontal ramp") {
    // Quantized neighbours differ by 4 or 5 levels horizontally, so every horizontal or
    // diagonal difference truncates to -3 or +3 and every vertical difference is 0.
    std::vector<float> ramp(64 * 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) ramp[y * 64 + x] = static_cast<float>(x);
    auto f = spam(ramp).values;
    auto oracle = [](const std::vector<int>& dir_levels) {
        std::vector<double> out(343, 0.0);
        for (int cond = 0; cond < 49; ++cond)
            for (int k = 0; k < 7; ++k) {
                double acc = 0;
                for (int lv : dir_levels) {
                    bool seen = cond == lv * 7 + lv;
                    acc += seen ? (k == lv ? 1.0 : 0.0) : 1.0 / 7;
                }
                out[cond * 7 + k] = acc / 4;
            }
        return out;
    };
    // Difference index is clamp(q(p) - q(p + d), -3, 3) + 3.
    auto straight = oracle({0, 6, 3, 3});
    auto diagonal = oracle({0, 6, 0, 6});
    for (int i = 0; i < 343; ++i) {
        CHECK(f[i] == doctest::Approx(straight[i]).epsilon(1e-6));
        CHECK(f[343 + i] == doctest::Approx(diagonal[i]).epsilon(1e-6));
    }
}

TEST_CASE("svm separates blobs and exposes the margin") {
    std::vector<int> y;
    Matrix x = blobs(40, 2, 3.0, 1, y);
    SvmOptions opt;
    opt.seed = 5;
    SvmModel m = svm_train(x, y, opt);
    int correct = 0;
    for (std::size_t i = 0; i < x.rows; ++i) correct += svm_predict(m, x.row(i)).label == y[i];
    CHECK(correct == static_cast<int>(x.rows));
    CHECK(m.cv_accuracy == doctest::Approx(1.0));

    // Margin equals the raw-space affine function.
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        std::vector<float> p = {float(3 * rng.normal()), float(3 * rng.normal())};
        double ref = m.bias;
        for (int k = 0; k < 2; ++k) ref += m.weights[k] * m.scale[k] * p[k] - m.weights[k] * m.scale[k] * m.mean[k];
        auto pr = svm_predict(m, p);
        CHECK(pr.margin == doctest::Approx(ref).epsilon(1e-9));
        CHECK(pr.label == (ref > 0 ? 1 : 0));
    }
    std::vector<float> wrong(3);
    CHECK_THROWS_AS(svm_predict(m, wrong), ParameterError);
}

TEST_CASE("svm label flip negates the model and runs are deterministic") {
    std::vector<int> y;
    Matrix x = blobs(30, 5, 0.4, 3, y);
    SvmOptions opt;
    opt.seed = 9;
    SvmModel a = svm_train(x, y, opt);
    SvmModel again = svm_train(x, y, opt);
    CHECK(serialize_svm(a) == serialize_svm(again));
    std::vector<int> flipped(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) flipped[i] = 1 - y[i];
    SvmModel b = svm_train(x, flipped, opt);
    CHECK(b.c == a.c);
    for (std::size_t k = 0; k < a.weights.size(); ++k) CHECK(std::abs(a.weights[k] + b.weights[k]) <= 1e-3);
    CHECK(std::abs(a.bias + b.bias) <= 1e-3);
}

TEST_CASE("svm rejects single-class input") {
    std::vector<int> y;
    Matrix x = blobs(10, 3, 1.0, 1, y);
    std::vector<int> ones(y.size(), 1);
    CHECK_THROWS_AS(svm_train(x, ones), DataError);
}

TEST_CASE("pegasos objective of the averaged iterate does not increase") {
    std::vector<int> y;
    Matrix x = blobs(100, 4, 0.5, 7, y);
    std::vector<int> s(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] ? 1 : -1;
    for (double c : {0.1, 1.0, 10.0}) {
        auto r = pegasos(x, s, c, 30, 3);
        REQUIRE(r.objective_per_epoch.size() == 30);
        double lambda = 1.0 / (c * x.rows);
        CHECK(svm_objective(x, s, r.weights, lambda) == doctest::Approx(r.objective_per_epoch.back()));
        for (std::size_t e = 1; e < r.objective_per_epoch.size(); ++e)
            CHECK(r.objective_per_epoch[e] <= r.objective_per_epoch[e - 1] * (1 + 1e-9));
    }
}

TEST_CASE("svm model text round trip") {
    std::vector<int> y;
    Matrix x = blobs(20, 3, 1.0, 2, y);
    SvmOptions opt;
    opt.seed = 1;
    SvmModel m = svm_train(x, y, opt);
    m.tag = "LBP";
    SvmModel back = parse_svm(serialize_svm(m));
    CHECK(back.tag == "LBP");
    CHECK(back.weights == m.weights);
    CHECK(back.mean == m.mean);
    CHECK(back.bias == m.bias);
    CHECK_THROWS_AS(parse_svm("HDRF-SVM v1\ntag=x\n"), FormatError);
    CHECK_THROWS_AS(parse_svm("HDRF-SVM v1\nc=1 2\n"), FormatError);
}

TEST_CASE("feature table extraction and file round trip") {
    std::vector<dataset::LogLumBlock> blocks;
    std::vector<dataset::Split> splits;
    for (int i = 0; i < 6; ++i) {
        dataset::LogLumBlock b;
        b.pixels = random_block(10 + i);
        b.label = i % 2 ? dataset::HdrClass::IHDR : dataset::HdrClass::MHDR;
        b.source_id = i / 2;
        b.row = 64 * i;
        blocks.push_back(b);
        splits.push_back(i < 4 ? dataset::Split::TRAIN : dataset::Split::VERIFY1);
    }
    FeatureTable t = extract_table(FeatureKind::HOG, blocks, splits, 3);
    FeatureTable serial = extract_table(FeatureKind::HOG, blocks, splits, 1);
    CHECK(t.x.data == serial.x.data);
    CHECK(t.x.cols == 324);
    for (std::size_t c = 0; c < 324; ++c) CHECK(t.x.row(2)[c] == hog(blocks[2].pixels).values[c]);

    testutil::TempDir dir("feat");
    write_feature_table(dir / "t.bin", t);
    FeatureTable back = read_feature_table(dir / "t.bin");
    CHECK(back.x.data == t.x.data);
    CHECK(back.labels == t.labels);
    CHECK(back.rows == t.rows);
    CHECK(filter_split(back, dataset::Split::VERIFY1).size() == 2);
}
