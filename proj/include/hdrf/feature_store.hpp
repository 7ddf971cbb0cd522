#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hdrf/features.hpp"
#include "hdrf/manifest.hpp"
#include "hdrf/svm.hpp"

namespace hdrf::features {

/// Descriptor rows for a set of blocks, keyed back to their manifest entry and tile origin.
struct FeatureTable {
    FeatureKind kind = FeatureKind::HOG;
    Matrix x;
    std::vector<std::uint8_t> labels;  // HdrClass values
    std::vector<dataset::Split> splits;
    std::vector<std::uint32_t> source_ids;
    std::vector<std::uint32_t> rows, cols;

    std::size_t size() const { return x.rows; }
};

/// Extracts `kind` from every block. Each row is checked against feature_dims(kind).
FeatureTable extract_table(FeatureKind kind, const std::vector<dataset::LogLumBlock>& blocks,
                           const std::vector<dataset::Split>& splits, int threads = 1);

/// Rows whose split equals `s`.
FeatureTable filter_split(const FeatureTable& t, dataset::Split s);

// "HDRFFEAT", u32 version, string kind, u32 dims, u64 rows, then per row
// u8 label, u8 split, u32 source id, u32 row, u32 col, dims little-endian f32.
void write_feature_table(const std::filesystem::path& path, const FeatureTable& t);
FeatureTable read_feature_table(const std::filesystem::path& path);

}  // namespace hdrf::features
