#include "hdrf/feature_store.hpp"

#include <string>

#include "hdrf/binary_io.hpp"
#include "hdrf/error.hpp"
#include "hdrf/parallel.hpp"

namespace hdrf::features {

FeatureTable extract_table(FeatureKind kind, const std::vector<dataset::LogLumBlock>& blocks,
                           const std::vector<dataset::Split>& splits, int threads) {
    if (splits.size() != blocks.size()) throw ParameterError("extract_table: one split per block required");
    const auto dims = static_cast<std::size_t>(feature_dims(kind));
    FeatureTable t;
    t.kind = kind;
    t.x.cols = dims;
    t.x.rows = blocks.size();
    t.x.data.resize(dims * blocks.size());
    parallel_for(blocks.size(), threads, [&](std::size_t i) {
        FeatureVector f = extract(kind, blocks[i].pixels);
        if (f.values.size() != dims) {
            throw Error("extract_table: " + std::string(to_string(kind)) + " produced " +
                        std::to_string(f.values.size()) + " values, expected " + std::to_string(dims));
        }
        std::copy(f.values.begin(), f.values.end(), t.x.row(i).begin());
    });
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        t.labels.push_back(static_cast<std::uint8_t>(blocks[i].label));
        t.splits.push_back(splits[i]);
        t.source_ids.push_back(blocks[i].source_id);
        t.rows.push_back(static_cast<std::uint32_t>(blocks[i].row));
        t.cols.push_back(static_cast<std::uint32_t>(blocks[i].col));
    }
    return t;
}

FeatureTable filter_split(const FeatureTable& t, dataset::Split s) {
    FeatureTable out;
    out.kind = t.kind;
    out.x.cols = t.x.cols;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.splits[i] != s) continue;
        auto r = t.x.row(i);
        out.x.data.insert(out.x.data.end(), r.begin(), r.end());
        ++out.x.rows;
        out.labels.push_back(t.labels[i]);
        out.splits.push_back(t.splits[i]);
        out.source_ids.push_back(t.source_ids[i]);
        out.rows.push_back(t.rows[i]);
        out.cols.push_back(t.cols[i]);
    }
    return out;
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& t) {
    if (t.x.cols != static_cast<std::size_t>(feature_dims(t.kind))) {
        throw ParameterError("write_feature_table: row length " + std::to_string(t.x.cols) + " does not match " +
                             std::string(to_string(t.kind)));
    }
    io::ByteWriter w;
    w.put_bytes("HDRFFEAT");
    w.put_u32(1);
    w.put_string(to_string(t.kind));
    w.put_u32(static_cast<std::uint32_t>(t.x.cols));
    w.put_u64(t.x.rows);
    for (std::size_t i = 0; i < t.size(); ++i) {
        w.put_u8(t.labels[i]);
        w.put_u8(static_cast<std::uint8_t>(t.splits[i]));
        w.put_u32(t.source_ids[i]);
        w.put_u32(t.rows[i]);
        w.put_u32(t.cols[i]);
        w.put_f32s(t.x.row(i));
    }
    io::write_file(path, w.bytes());
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
    io::Bytes bytes = io::read_file(path);
    io::ByteReader r(bytes);
    r.expect_magic("HDRFFEAT");
    if (std::uint32_t v = r.u32(); v != 1) throw FormatError("feature table: unsupported version " + std::to_string(v));
    FeatureTable t;
    t.kind = parse_feature_kind(r.string());
    t.x.cols = r.u32();
    if (t.x.cols != static_cast<std::size_t>(feature_dims(t.kind))) {
        throw FormatError("feature table: " + std::to_string(t.x.cols) + " dims recorded for " +
                          std::string(to_string(t.kind)));
    }
    t.x.rows = r.u64();
    const std::size_t row_bytes = 2 + 12 + 4 * t.x.cols;
    if (t.x.rows > bytes.size() / row_bytes) throw FormatError("feature table: row count exceeds file size");
    t.x.data.resize(t.x.rows * t.x.cols);
    for (std::size_t i = 0; i < t.x.rows; ++i) {
        t.labels.push_back(r.u8());
        std::uint8_t s = r.u8();
        if (s > static_cast<std::uint8_t>(dataset::Split::UNUSED)) {
            throw FormatError("feature table: bad split code at byte " + std::to_string(r.offset() - 1));
        }
        t.splits.push_back(static_cast<dataset::Split>(s));
        t.source_ids.push_back(r.u32());
        t.rows.push_back(r.u32());
        t.cols.push_back(r.u32());
        r.f32s(t.x.row(i));
    }
    if (!r.at_end()) throw FormatError("feature table: trailing bytes at offset " + std::to_string(r.offset()));
    return t;
}

}  // namespace hdrf::features
