#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hdrf/error.hpp"
#include "hdrf/metrics.hpp"
#include "hdrf/random.hpp"
#include "hdrf/report.hpp"
#include "oracles.hpp"

using namespace hdrf;
using namespace hdrf::eval;

namespace {

constexpr int M = 0;
constexpr int I = 1;

void random_instance(Rng& rng, std::vector<double>& s, std::vector<int>& y) {
    std::size_t n = 2 + rng.below(199);
    s.resize(n);
    y.resize(n);
    // Coarse scores so ties are common.
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(rng.below(2));
        s[i] = std::round(rng.normal() * 4 + y[i]) / 4;
    }
    y[0] = 0;
    y[1] = 1;
}

}  // namespace

TEST_CASE("auc matches exhaustive pair counting") {
    Rng rng(17);
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<double> s;
        std::vector<int> y;
        random_instance(rng, s, y);
        auto roc = roc_auc(s, y);
        CHECK(std::abs(roc.auc - testutil::brute_force_auc(s, y)) <= 1e-12);
        auto neg = roc_auc(s, y, 0);
        CHECK(std::abs(neg.auc - testutil::brute_force_auc(s, y, 0)) <= 1e-12);

        CHECK(roc.points.front() == std::pair<double, double>{0.0, 0.0});
        CHECK(roc.points.back() == std::pair<double, double>{1.0, 1.0});
        double trap = 0;
        for (std::size_t k = 1; k < roc.points.size(); ++k) {
            CHECK(roc.points[k].first >= roc.points[k - 1].first);
            CHECK(roc.points[k].second >= roc.points[k - 1].second);
            trap += (roc.points[k].first - roc.points[k - 1].first) *
                    (roc.points[k].second + roc.points[k - 1].second) / 2;
        }
        CHECK(trap == doctest::Approx(roc.auc).epsilon(1e-12));

        std::vector<double> rev(s.size());
        std::transform(s.begin(), s.end(), rev.begin(), [](double v) { return -v; });
        CHECK(roc_auc(rev, y).auc == doctest::Approx(1.0 - roc.auc).epsilon(1e-12));
    }
}

TEST_CASE("auc extremes and chance") {
    std::vector<double> s = {0.1, 0.2, 0.8, 0.9};
    std::vector<int> y = {0, 0, 1, 1};
    CHECK(roc_auc(s, y).auc == 1.0);
    std::vector<double> same(4, 0.5);
    CHECK(roc_auc(same, y).auc == 0.5);

    Rng rng(3);
    std::vector<double> r(10000);
    std::vector<int> ry(10000);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = rng.uniform(0, 1);
        ry[i] = static_cast<int>(rng.below(2));
    }
    CHECK(std::abs(roc_auc(r, ry).auc - 0.5) <= 0.02);

    std::vector<int> one_class(4, 1);
    CHECK_THROWS_AS(roc_auc(s, one_class), DataError);
}

TEST_CASE("accuracy and confusion") {
    std::vector<int> y = {0, 1, 1};
    std::vector<int> all = {0, 1, 1}, none = {1, 0, 0}, mixed = {0, 0, 1};
    CHECK(accuracy(all, y) == 1.0);
    CHECK(accuracy(none, y) == 0.0);
    CHECK(accuracy(mixed, y) == doctest::Approx(2.0 / 3));
    Confusion c = confusion(mixed, y);
    CHECK(c[0][0] == 1);
    CHECK(c[1][0] == 1);
    CHECK(c[1][1] == 1);
    CHECK(c[0][1] == 0);
}

TEST_CASE("majority vote") {
    std::vector<BlockVote> v = {{I, 0.9}, {I, 0.6}, {M, 0.99}};
    CHECK(majority_vote(v).final_class == I);
    std::vector<BlockVote> single = {{M, 0.51}};
    CHECK(majority_vote(single).final_class == M);

    std::vector<BlockVote> tie = {{M, 0.9}, {I, 0.6}, {M, 0.8}, {I, 0.6}};
    VoteResult r = majority_vote(tie);
    CHECK(r.final_class == M);
    CHECK(r.tie_broken);
    CHECK(r.confidence_sum[M] == doctest::Approx(1.7));
    CHECK(r.confidence_sum[I] == doctest::Approx(1.2));

    std::vector<BlockVote> none;
    CHECK_THROWS_AS(majority_vote(none), DataError);
}

TEST_CASE("majority vote is permutation invariant") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        std::vector<BlockVote> v(1 + rng.below(12));
        for (auto& b : v) b = {static_cast<int>(rng.below(2)), 0.5 + 0.5 * rng.uniform(0, 1)};
        VoteResult a = majority_vote(v);
        rng.shuffle(std::span(v));
        VoteResult b = majority_vote(v);
        CHECK(a.final_class == b.final_class);
        CHECK(a.confidence_sum == b.confidence_sum);
        CHECK(a.mean_confidence == b.mean_confidence);
    }
}

TEST_CASE("voting never loses to block accuracy when every image is mostly right") {
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        std::vector<ScoredBlock> blocks;
        for (std::uint32_t img = 0; img < 10; ++img) {
            int label = static_cast<int>(img % 2);
            int n = 5 + 2 * static_cast<int>(rng.below(20));
            int wrong = static_cast<int>(rng.below(static_cast<std::uint64_t>(n / 2) + 1));  // < n / 2
            for (int k = 0; k < n; ++k) {
                int pred = k < wrong ? 1 - label : label;
                double p = 0.5 + 0.5 * rng.uniform(0, 1);
                blocks.push_back({img, label, pred, pred == 1 ? p : 1 - p, p});
            }
        }
        Verify1Report r = evaluate_verify1(blocks);
        CHECK(r.mvs_accuracy == 1.0);
        CHECK(r.mvs_accuracy >= r.block_accuracy);
    }
}

TEST_CASE("verify1 report composition") {
    Rng rng(4);
    std::vector<ScoredBlock> blocks;
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::uint32_t img = 0; img < 12; ++img) {
        int label = img < 6 ? M : I;
        for (int k = 0; k < 100; ++k) {
            // 93% of blocks right, errors independent.
            bool right = rng.uniform(0, 1) < 0.93;
            int pred = right ? label : 1 - label;
            double p = 0.5 + 0.5 * rng.uniform(0, 1);
            double score = pred == I ? p : 1 - p;
            blocks.push_back({img, label, pred, score, p});
            scores.push_back(score);
            labels.push_back(label);
        }
    }
    Verify1Report r = evaluate_verify1(blocks);
    CHECK(r.rows[M].images == 6);
    CHECK(r.rows[I].blocks == 600);
    CHECK(r.mvs_accuracy == 1.0);
    CHECK(r.block_accuracy == doctest::Approx(0.93).epsilon(0.03));
    CHECK(r.roc.auc == doctest::Approx(roc_auc(scores, labels, I).auc).epsilon(1e-15));
    CHECK(r.rows[I].auc == doctest::Approx(roc_auc(scores, labels, I).auc).epsilon(1e-15));
    std::vector<double> neg(scores.size());
    std::transform(scores.begin(), scores.end(), neg.begin(), [](double v) { return -v; });
    CHECK(r.rows[M].auc == doctest::Approx(roc_auc(neg, labels, M).auc).epsilon(1e-15));

    std::size_t right_m = 0;
    for (std::size_t i = 0; i < 600; ++i) right_m += blocks[i].predicted == M;
    CHECK(r.rows[M].block_accuracy == doctest::Approx(right_m / 600.0));
    CHECK(evaluate_blocks(blocks) == doctest::Approx(r.block_accuracy));

    // A perfect labeler gets every image right.
    for (auto& b : blocks) {
        b.predicted = b.label;
        b.score = b.label;
    }
    Verify1Report perfect = evaluate_verify1(blocks);
    CHECK(perfect.mvs_accuracy == 1.0);
    CHECK(perfect.roc.auc == 1.0);

    blocks[3].label = I;  // image 0 now has mixed labels
    CHECK_THROWS_AS(evaluate_verify1(blocks), DataError);
}

TEST_CASE("report text") {
    CHECK(format_table_cell(0.9326, 1.0) == "93.26(100.00)");
    std::vector<ScoredBlock> blocks = {{0, M, M, 0.1, 0.9}, {0, M, I, 0.6, 0.6}, {0, M, M, 0.2, 0.8},
                                       {1, I, I, 0.9, 0.9}, {1, I, I, 0.7, 0.7}};
    Verify1Report r = evaluate_verify1(blocks);
    std::string csv = verify1_csv(r);
    CHECK(csv.rfind("class,blocks,images,block_accuracy,auc,mvs_accuracy,table_cell\n", 0) == 0);
    CHECK(csv.find("\nMHDR,3,1,") != std::string::npos);
    CHECK(csv.find("\nIHDR,2,1,") != std::string::npos);
    CHECK(csv.find("\nALL,5,2,") != std::string::npos);
    CHECK(verify2_csv(0.5, 10).rfind("split,blocks,block_accuracy\nVERIFY2,10,", 0) == 0);
    std::string roc = roc_csv(r.roc);
    CHECK(roc.rfind("fpr,tpr\n", 0) == 0);
    std::string svg = roc_svg({{"cnn", r.roc}});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("cnn") != std::string::npos);
}
