#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "hdrf/blocks.hpp"
#include "hdrf/error.hpp"
#include "hdrf/fusion.hpp"
#include "hdrf/luminance.hpp"
#include "hdrf/manifest.hpp"
#include "hdrf/scene.hpp"
#include "test_util.hpp"

using namespace hdrf;
using namespace hdrf::dataset;

namespace {

std::vector<SourceImage> corpus(int per_class, int blocks_each, int ihdr_ops = 4) {
    static const char* ops[] = {"LINEAR", "SIGMOID", "EXPAND_MAP", "DUAL_REGION"};
    std::vector<SourceImage> v;
    for (int i = 0; i < per_class; ++i) {
        v.push_back({"m" + std::to_string(i), HdrClass::MHDR, "FUSED", std::uint32_t(blocks_each + i % 3)});
    }
    for (int i = 0; i < per_class; ++i) {
        v.push_back({"i" + std::to_string(i), HdrClass::IHDR, ops[i % ihdr_ops], std::uint32_t(blocks_each + i % 5)});
    }
    return v;
}

io::LdrImage flat_ldr(int w, int h, std::uint8_t z) {
    io::LdrImage img(w, h);
    std::fill(img.data.begin(), img.data.end(), z);
    return img;
}

}  // namespace

TEST_CASE("luminance uses Rec. 709 weights") {
    io::HdrImage img(1, 1);
    img.pixel(0, 0)[0] = 1;
    img.pixel(0, 0)[1] = 2;
    img.pixel(0, 0)[2] = 4;
    CHECK(compute_luminance(img).at(0, 0) == doctest::Approx(0.2126 + 2 * 0.7152 + 4 * 0.0722));
}

TEST_CASE("log transform adds epsilon before the natural log") {
    LuminanceMap m(2, 1);
    m.values = {0.0f, float(std::exp(2.0))};
    auto l = log_transform(m, 1e-6);
    CHECK(l.values[0] == doctest::Approx(std::log(1e-6)));
    CHECK(l.values[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK_THROWS_AS(log_transform(m, 0.0), ParameterError);
}

TEST_CASE("resize_area caps the long side and preserves the mean") {
    Rng rng(4);
    LuminanceMap m(2048, 1024);
    for (float& v : m.values) v = float(rng.uniform());
    auto r = resize_area(m, 1024);
    CHECK(r.width == 1024);
    CHECK(r.height == 512);
    double a = 0, b = 0;
    for (float v : m.values) a += v;
    for (float v : r.values) b += v;
    CHECK(b / r.values.size() == doctest::Approx(a / m.values.size()).epsilon(1e-5));

    LuminanceMap small(300, 100, 3.0f);
    CHECK(resize_area(small, 1024).width == 300);
    LuminanceMap odd(1500, 700, 3.0f);
    auto ro = resize_area(odd, 1024);
    CHECK(ro.width == 1024);
    for (float v : ro.values) CHECK(v == doctest::Approx(3.0));
    CHECK_THROWS_AS(resize_area(odd, 32), ParameterError);
}

TEST_CASE("normalize_pixels_8bit maps to [0, 1]") {
    io::HdrImage img(2, 1);
    img.pixel(0, 0)[0] = img.pixel(0, 0)[1] = img.pixel(0, 0)[2] = 1;
    img.pixel(1, 0)[0] = img.pixel(1, 0)[1] = img.pixel(1, 0)[2] = 5;
    auto n = normalize_pixels_8bit(img);
    CHECK(n.values[0] == 0.0f);
    CHECK(n.values[1] == 1.0f);
    io::HdrImage flat(2, 2);
    for (float v : normalize_pixels_8bit(flat).values) CHECK(v == 0.5f);
}

TEST_CASE("tiling drops remainders and reports undersized maps") {
    LuminanceMap m(200, 130);
    for (int y = 0; y < 130; ++y)
        for (int x = 0; x < 200; ++x) m.at(x, y) = float(y * 1000 + x);
    auto t = tile_blocks(m, HdrClass::IHDR, 7);
    REQUIRE(t.blocks.size() == 6);
    CHECK(t.blocks[4].row == 64);
    CHECK(t.blocks[4].col == 64);
    CHECK(t.blocks[4].pixels[0] == float(64 * 1000 + 64));
    CHECK(t.blocks[4].source_id == 7);
    CHECK(tile_blocks(LuminanceMap(63, 400), HdrClass::MHDR, 0).undersized);
}

TEST_CASE("block store round trip") {
    testutil::TempDir dir("blocks");
    LuminanceMap m(128, 64);
    Rng rng(1);
    for (float& v : m.values) v = float(rng.normal());
    auto t = tile_blocks(m, HdrClass::IHDR, 3);
    write_block_store(dir / "b.bin", t.blocks);
    auto back = read_block_store(dir / "b.bin");
    REQUIRE(back.size() == 2);
    CHECK(back[1].pixels == t.blocks[1].pixels);
    CHECK(back[1].col == 64);
    CHECK(back[1].label == HdrClass::IHDR);
}

TEST_CASE("manifest splits are image-disjoint and cover every operator") {
    auto images = corpus(40, 20);
    auto m = build_manifest(images, {42, 8, 600});
    std::map<HdrClass, std::set<std::string>> verify_ops;
    for (const auto& e : m.entries) {
        if (e.split == Split::VERIFY1) verify_ops[e.cls].insert(e.op_tag);
    }
    CHECK(verify_ops[HdrClass::IHDR].size() == 4);
    for (HdrClass c : {HdrClass::MHDR, HdrClass::IHDR}) {
        CHECK(m.block_count(Split::TRAIN, c) == 300);
        int verify_images = 0;
        for (const auto& e : m.entries) verify_images += e.cls == c && e.split == Split::VERIFY1;
        CHECK(verify_images == 8);
    }
    int straddlers = 0;
    for (const auto& e : m.entries) {
        if (!e.block_subset.empty()) {
            CHECK(e.split == Split::TRAIN);
            ++straddlers;
        }
    }
    CHECK(straddlers <= 2);
    // Only the straddlers lose blocks; every other image is used whole.
    for (const auto& e : m.entries) {
        CHECK(e.split != Split::UNUSED);
        if (e.block_subset.empty()) CHECK(e.blocks_used() == e.blocks_total);
    }
}

TEST_CASE("manifest is deterministic per seed") {
    auto images = corpus(30, 16);
    auto a = serialize_manifest(build_manifest(images, {5, 6, 400}));
    auto b = serialize_manifest(build_manifest(images, {5, 6, 400}));
    auto c = serialize_manifest(build_manifest(images, {6, 6, 400}));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("manifest text round trip") {
    auto m = build_manifest(corpus(20, 12), {9, 4, 200});
    m.norm_mean = -3.25;
    m.norm_std = 0.1 + 1e-12;
    m.input = InputMode::NORMALIZED_PIXEL;
    auto text = serialize_manifest(m);
    auto back = parse_manifest(text);
    CHECK(serialize_manifest(back) == text);
    CHECK(back.norm_std == m.norm_std);
    CHECK(back.input == InputMode::NORMALIZED_PIXEL);
    CHECK_THROWS_AS(parse_manifest("HDRF-MANIFEST v9\n"), FormatError);
}

TEST_CASE("manifest shortfalls are data errors") {
    CHECK_THROWS_AS(build_manifest(corpus(5, 10), {1, 5, 20}), DataError);
    CHECK_THROWS_AS(build_manifest(corpus(10, 4), {1, 2, 1000}), DataError);
    CHECK_THROWS_AS(build_manifest(corpus(10, 4), {1, 2, 7}), ParameterError);
}

TEST_CASE("normalization yields zero mean and unit std on TRAIN blocks") {
    Rng rng(8);
    std::vector<LogLumBlock> blocks(5);
    for (auto& b : blocks) {
        b.pixels.resize(kBlockPixels);
        for (float& v : b.pixels) v = float(3 + 2 * rng.normal());
    }
    auto [mean, sd] = block_statistics(blocks);
    DatasetManifest m;
    m.norm_mean = mean;
    m.norm_std = sd;
    normalize_blocks(blocks, m);
    auto [m2, s2] = block_statistics(blocks);
    CHECK(std::abs(m2) < 1e-5);
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-5));
    m.norm_std = 0;
    CHECK_THROWS_AS(normalize_blocks(blocks, m), DataError);
}

TEST_CASE("hat weight") {
    CHECK(hat_weight(0) == 0.0);
    CHECK(hat_weight(255) == 0.0);
    CHECK(hat_weight(128) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(hat_weight(64) == doctest::Approx(1 - std::abs(128.0 / 255 - 1)));
}

TEST_CASE("fusion of identical mid-gray frames inverts the gamma curve") {
    std::vector<io::LdrImage> frames = {flat_ldr(2, 2, 128), flat_ldr(2, 2, 128)};
    std::vector<double> t = {1.0, 1.0};
    auto hdr = fuse_exposures(frames, t, 2.2);
    for (float v : hdr.data) CHECK(v == doctest::Approx(std::pow(128 / 255.0, 2.2)));
}

TEST_CASE("a saturated frame carries no weight") {
    std::vector<io::LdrImage> frames = {flat_ldr(1, 1, 255), flat_ldr(1, 1, 128)};
    std::vector<double> t = {2.0, 1.0};
    CHECK(fuse_exposures(frames, t).data[0] == doctest::Approx(std::pow(128 / 255.0, 2.2)));
}

TEST_CASE("fusion is linear in 1/t") {
    Rng rng(6);
    std::vector<io::LdrImage> frames;
    for (int k = 0; k < 3; ++k) {
        io::LdrImage f(8, 8);
        for (auto& v : f.data) v = std::uint8_t(rng.below(256));
        frames.push_back(f);
    }
    std::vector<double> t = {0.25, 1.0, 4.0}, t3 = {0.75, 3.0, 12.0};
    auto a = fuse_exposures(frames, t);
    auto b = fuse_exposures(frames, t3);
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(b.data[i] == doctest::Approx(a.data[i] / 3.0).epsilon(1e-5));
}

TEST_CASE("fusion falls back to the lower-median exposure where no frame has weight") {
    std::vector<io::LdrImage> frames = {flat_ldr(1, 1, 255), flat_ldr(1, 1, 255), flat_ldr(1, 1, 255)};
    std::vector<double> t = {1.0, 2.0, 4.0};
    auto hdr = fuse_exposures(frames, t);
    CHECK(hdr.data[0] == doctest::Approx(1.0 / 2.0));
    std::vector<io::LdrImage> two = {flat_ldr(1, 1, 0), flat_ldr(1, 1, 0)};
    std::vector<double> t2 = {1.0, 1.0};
    CHECK(fuse_exposures(two, t2).data[0] == 0.0f);
}

TEST_CASE("fusion validates its inputs") {
    std::vector<io::LdrImage> frames = {flat_ldr(2, 2, 9), flat_ldr(3, 2, 9)};
    std::vector<double> t = {1, 2};
    CHECK_THROWS_AS(fuse_exposures(frames, t), ParameterError);
    frames[1] = flat_ldr(2, 2, 9);
    t[1] = 0;
    CHECK_THROWS_AS(fuse_exposures(frames, t), ParameterError);
    CHECK_THROWS_AS(fuse_exposures(std::span<const io::LdrImage>(), std::span<const double>()), ParameterError);
}

TEST_CASE("scene synthesis and capture are deterministic and wide-range") {
    auto a = synth_scene(128, 96, 17);
    auto b = synth_scene(128, 96, 17);
    CHECK(a.data == b.data);
    CHECK(io::is_valid(a));
    auto lum = compute_luminance(a);
    auto [lo, hi] = std::minmax_element(lum.values.begin(), lum.values.end());
    CHECK(*hi / std::max(*lo, 1e-9f) > 1e3);
    Rng r1(2), r2(2);
    auto s1 = capture_stack(a, 3, 2.0, {}, r1);
    auto s2 = capture_stack(a, 3, 2.0, {}, r2);
    CHECK(s1.frames[1].data == s2.frames[1].data);
    CHECK(s1.times[0] < s1.times[1]);
    CHECK(s1.times[1] < s1.times[2]);
}

TEST_CASE("entry_blocks honours block subsets") {
    LuminanceMap m(128, 128);
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = float(i);
    ManifestEntry e;
    e.path = "x";
    e.cls = HdrClass::IHDR;
    e.split = Split::TRAIN;
    e.blocks_total = 4;
    e.block_subset = {1, 3};
    auto b = entry_blocks(e, 9, m);
    REQUIRE(b.size() == 2);
    CHECK(b[0].col == 64);
    CHECK(b[1].row == 64);
    CHECK(b[1].source_id == 9);
    e.blocks_total = 5;
    CHECK_THROWS_AS(entry_blocks(e, 9, m), DataError);
}
