#include "hdrf/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "hdrf/binary_io.hpp"
#include "hdrf/error.hpp"
#include "hdrf/random.hpp"

namespace hdrf::dataset {
namespace {

constexpr std::string_view kMagic = "HDRF-MANIFEST v1";

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw FormatError("manifest: bad " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t p = s.find(sep, start);
        out.push_back(s.substr(start, p == std::string_view::npos ? p : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

}  // namespace

std::string_view to_string(Split s) {
    switch (s) {
        case Split::TRAIN: return "TRAIN";
        case Split::VERIFY1: return "VERIFY1";
        case Split::VERIFY2: return "VERIFY2";
        case Split::UNUSED: return "UNUSED";
    }
    return "UNUSED";
}

Split parse_split(std::string_view s) {
    if (s == "TRAIN") return Split::TRAIN;
    if (s == "VERIFY1") return Split::VERIFY1;
    if (s == "VERIFY2") return Split::VERIFY2;
    if (s == "UNUSED") return Split::UNUSED;
    throw ParameterError("unknown split '" + std::string(s) + "'");
}

std::string_view to_string(InputMode m) { return m == InputMode::LOG_LUMINANCE ? "log" : "pixel"; }

InputMode parse_input_mode(std::string_view s) {
    if (s == "log") return InputMode::LOG_LUMINANCE;
    if (s == "pixel") return InputMode::NORMALIZED_PIXEL;
    throw ParameterError("unknown input mode '" + std::string(s) + "' (expected log or pixel)");
}

std::uint32_t DatasetManifest::block_count(Split s, HdrClass c) const {
    std::uint32_t n = 0;
    for (const auto& e : entries) {
        if (e.split == s && e.cls == c) n += e.blocks_used();
    }
    return n;
}

DatasetManifest build_manifest(const std::vector<SourceImage>& images, const ManifestOptions& options) {
    if (options.verify_images_per_class < 1) throw ParameterError("verify_images_per_class must be >= 1");
    if (options.train_blocks_total < 2 || options.train_blocks_total % 2 != 0) {
        throw ParameterError("train_blocks_total must be a positive even number");
    }
    DatasetManifest m;
    m.seed = options.seed;
    m.verify_images_per_class = options.verify_images_per_class;
    m.train_blocks_total = options.train_blocks_total;
    m.entries.reserve(images.size());
    for (const auto& img : images) {
        ManifestEntry e;
        e.path = img.path;
        e.cls = img.cls;
        e.op_tag = img.op_tag;
        e.blocks_total = img.block_count;
        m.entries.push_back(std::move(e));
    }

    Rng rng(mix_seed(options.seed, 0x5EED));
    const std::uint32_t per_class_quota = static_cast<std::uint32_t>(options.train_blocks_total / 2);

    for (HdrClass cls : {HdrClass::MHDR, HdrClass::IHDR}) {
        std::map<std::string, std::vector<std::size_t>> by_tag;  // ordered for determinism
        std::size_t class_size = 0;
        for (std::size_t i = 0; i < m.entries.size(); ++i) {
            if (m.entries[i].cls == cls) {
                by_tag[m.entries[i].op_tag].push_back(i);
                ++class_size;
            }
        }
        const auto verify_n = static_cast<std::size_t>(options.verify_images_per_class);
        if (class_size <= verify_n) {
            throw DataError("class " + std::string(to_string(cls)) + " has " + std::to_string(class_size) +
                            " images; need more than " + std::to_string(verify_n));
        }
        if (by_tag.size() > verify_n) {
            throw DataError("class " + std::string(to_string(cls)) + " has " + std::to_string(by_tag.size()) +
                            " operator tags but only " + std::to_string(verify_n) + " verification slots");
        }

        // One image of every operator first, then the rest drawn from the shuffled remainder.
        std::vector<std::size_t> pool;
        for (auto& [tag, idx] : by_tag) {
            rng.shuffle(std::span(idx));
            m.entries[idx.front()].split = Split::VERIFY1;
            pool.insert(pool.end(), idx.begin() + 1, idx.end());
        }
        rng.shuffle(std::span(pool));
        std::size_t take = verify_n - by_tag.size();
        for (std::size_t k = 0; k < take; ++k) m.entries[pool[k]].split = Split::VERIFY1;
        std::vector<std::size_t> rest(pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end());

        rng.shuffle(std::span(rest));
        std::uint64_t available = 0;
        for (std::size_t i : rest) available += m.entries[i].blocks_total;
        if (available < per_class_quota) {
            throw DataError("class " + std::string(to_string(cls)) + ": TRAIN needs " + std::to_string(per_class_quota) +
                            " blocks but only " + std::to_string(available) + " remain after VERIFY1");
        }
        std::uint32_t filled = 0;
        for (std::size_t i : rest) {
            ManifestEntry& e = m.entries[i];
            if (filled == per_class_quota || e.blocks_total == 0) {
                e.split = Split::VERIFY2;
                continue;
            }
            e.split = Split::TRAIN;
            std::uint32_t need = per_class_quota - filled;
            if (e.blocks_total > need) {
                std::vector<std::uint32_t> tiles(e.blocks_total);
                std::iota(tiles.begin(), tiles.end(), 0u);
                rng.shuffle(std::span(tiles));
                tiles.resize(need);
                std::sort(tiles.begin(), tiles.end());
                e.block_subset = std::move(tiles);
                filled += need;
            } else {
                filled += e.blocks_total;
            }
        }
    }
    return m;
}

LuminanceMap prepare_input(const io::HdrImage& img, InputMode mode, int max_dim, double epsilon) {
    if (mode == InputMode::LOG_LUMINANCE) return log_transform(resize_area(compute_luminance(img), max_dim), epsilon);
    return resize_area(normalize_pixels_8bit(img), max_dim);
}

std::vector<LogLumBlock> entry_blocks(const ManifestEntry& entry, std::uint32_t source_id, const LuminanceMap& map) {
    TileResult tiles = tile_blocks(map, entry.cls, source_id);
    if (tiles.blocks.size() != entry.blocks_total) {
        throw DataError(entry.path + ": tiles to " + std::to_string(tiles.blocks.size()) + " blocks, manifest says " +
                        std::to_string(entry.blocks_total));
    }
    if (entry.block_subset.empty()) return std::move(tiles.blocks);
    std::vector<LogLumBlock> out;
    out.reserve(entry.block_subset.size());
    for (std::uint32_t i : entry.block_subset) {
        if (i >= tiles.blocks.size()) throw DataError(entry.path + ": block index " + std::to_string(i) + " out of range");
        out.push_back(std::move(tiles.blocks[i]));
    }
    return out;
}

std::pair<double, double> block_statistics(const std::vector<LogLumBlock>& blocks) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& b : blocks) {
        for (float v : b.pixels) sum += v;
        n += b.pixels.size();
    }
    if (n == 0) throw DataError("block statistics over an empty set");
    double mean = sum / double(n);
    double ss = 0.0;
    for (const auto& b : blocks) {
        for (float v : b.pixels) ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / double(n))};
}

void normalize_blocks(std::vector<LogLumBlock>& blocks, const DatasetManifest& manifest) {
    if (!(manifest.norm_std > 0.0) || !std::isfinite(manifest.norm_std)) {
        throw DataError("degenerate dataset: normalization std is " + format_double(manifest.norm_std));
    }
    const double mean = manifest.norm_mean;
    const double inv = 1.0 / manifest.norm_std;
    for (auto& b : blocks) {
        for (float& v : b.pixels) v = static_cast<float>((v - mean) * inv);
    }
}

std::string serialize_manifest(const DatasetManifest& m) {
    std::ostringstream os;
    os << kMagic << '\n';
    os << "seed=" << m.seed << '\n';
    os << "input=" << to_string(m.input) << '\n';
    os << "log_base=e\n";
    os << "epsilon=" << format_double(m.epsilon) << '\n';
    os << "max_dim=" << m.max_dim << '\n';
    os << "verify_images_per_class=" << m.verify_images_per_class << '\n';
    os << "train_blocks_total=" << m.train_blocks_total << '\n';
    os << "norm_mean=" << format_double(m.norm_mean) << '\n';
    os << "norm_std=" << format_double(m.norm_std) << '\n';
    os << "entries=" << m.entries.size() << '\n';
    os << "# path\tclass\tsplit\toperator\tblocks_total\tblocks\n";
    for (const auto& e : m.entries) {
        os << e.path << '\t' << to_string(e.cls) << '\t' << to_string(e.split) << '\t' << e.op_tag << '\t'
           << e.blocks_total << '\t';
        if (e.block_subset.empty()) {
            os << "all";
        } else {
            for (std::size_t k = 0; k < e.block_subset.size(); ++k) os << (k ? "," : "") << e.block_subset[k];
        }
        os << '\n';
    }
    return os.str();
}

DatasetManifest parse_manifest(std::string_view text) {
    auto lines = split_on(text, '\n');
    if (lines.empty() || lines[0] != kMagic) throw FormatError("manifest: missing '" + std::string(kMagic) + "' line");
    DatasetManifest m;
    std::size_t expected = 0;
    std::size_t i = 1;
    for (; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (line.starts_with("#")) {
            ++i;
            break;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw FormatError("manifest: bad header line " + std::to_string(i + 1));
        std::string_view key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "seed") m.seed = parse_number<std::uint64_t>(val, key);
        else if (key == "input") m.input = parse_input_mode(val);
        else if (key == "log_base") {
            if (val != "e") throw FormatError("manifest: unsupported log base");
        } else if (key == "epsilon") m.epsilon = parse_number<double>(val, key);
        else if (key == "max_dim") m.max_dim = parse_number<int>(val, key);
        else if (key == "verify_images_per_class") m.verify_images_per_class = parse_number<int>(val, key);
        else if (key == "train_blocks_total") m.train_blocks_total = parse_number<int>(val, key);
        else if (key == "norm_mean") m.norm_mean = parse_number<double>(val, key);
        else if (key == "norm_std") m.norm_std = parse_number<double>(val, key);
        else if (key == "entries") expected = parse_number<std::size_t>(val, key);
        else throw FormatError("manifest: unknown key '" + std::string(key) + "'");
    }
    for (; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto f = split_on(lines[i], '\t');
        if (f.size() != 6) throw FormatError("manifest: line " + std::to_string(i + 1) + " needs 6 fields");
        ManifestEntry e;
        e.path = std::string(f[0]);
        e.cls = parse_class(f[1]);
        e.split = parse_split(f[2]);
        e.op_tag = std::string(f[3]);
        e.blocks_total = parse_number<std::uint32_t>(f[4], "blocks_total");
        if (f[5] != "all") {
            for (auto t : split_on(f[5], ',')) e.block_subset.push_back(parse_number<std::uint32_t>(t, "block index"));
        }
        m.entries.push_back(std::move(e));
    }
    if (m.entries.size() != expected) {
        throw FormatError("manifest: header declares " + std::to_string(expected) + " entries, found " +
                          std::to_string(m.entries.size()));
    }
    return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    io::write_text(path, serialize_manifest(m));
}

DatasetManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(io::read_text(path)); }

}  // namespace hdrf::dataset
