#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hdrf/blocks.hpp"
#include "hdrf/image.hpp"

namespace hdrf::dataset {

enum class Split : std::uint8_t { TRAIN, VERIFY1, VERIFY2, UNUSED };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// Which CNN input a manifest's blocks carry.
enum class InputMode : std::uint8_t { LOG_LUMINANCE, NORMALIZED_PIXEL };

std::string_view to_string(InputMode m);
InputMode parse_input_mode(std::string_view s);

/// A candidate image for dataset construction, with its tile count already known.
struct SourceImage {
    std::string path;
    HdrClass cls = HdrClass::MHDR;
    std::string op_tag;  // operator that produced the image, e.g. FUSED, LINEAR
    std::uint32_t block_count = 0;
};

struct ManifestEntry {
    std::string path;
    HdrClass cls = HdrClass::MHDR;
    Split split = Split::UNUSED;
    std::string op_tag;
    std::uint32_t blocks_total = 0;
    // Tile indices (row-major) contributed to the split. Empty means every tile.
    // Only the one TRAIN image per class that straddles the quota carries a subset.
    std::vector<std::uint32_t> block_subset;

    std::uint32_t blocks_used() const {
        if (split == Split::UNUSED) return 0;
        return block_subset.empty() ? blocks_total : static_cast<std::uint32_t>(block_subset.size());
    }
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t seed = 0;
    InputMode input = InputMode::LOG_LUMINANCE;
    double epsilon = 1e-6;
    int max_dim = 1024;
    int verify_images_per_class = 40;
    int train_blocks_total = 60000;
    double norm_mean = 0.0;
    double norm_std = 1.0;

    std::uint32_t block_count(Split s, HdrClass c) const;
};

struct ManifestOptions {
    std::uint64_t seed = 0;
    int verify_images_per_class = 40;
    int train_blocks_total = 60000;
};

/// Assigns whole images to VERIFY1 (operator coverage enforced), then fills TRAIN
/// with train_blocks_total / 2 blocks per class from shuffled remaining images,
/// leaving untouched images to VERIFY2. No image appears in two splits; blocks of the
/// quota-straddling TRAIN image that are not used are left out of every split.
DatasetManifest build_manifest(const std::vector<SourceImage>& images, const ManifestOptions& options);

/// The map an image contributes in the given mode: area-downscaled luminance followed by
/// ln(L + epsilon), or per-image min-max normalized luminance.
LuminanceMap prepare_input(const io::HdrImage& img, InputMode mode, int max_dim, double epsilon);

/// Tiles `map` and keeps the tiles the entry contributes (all, or its block_subset),
/// labelled with the entry's class and `source_id`.
std::vector<LogLumBlock> entry_blocks(const ManifestEntry& entry, std::uint32_t source_id, const LuminanceMap& map);

/// Mean and population std over every pixel of the given blocks.
std::pair<double, double> block_statistics(const std::vector<LogLumBlock>& blocks);

/// x <- (x - mean) / std with the manifest's TRAIN statistics.
void normalize_blocks(std::vector<LogLumBlock>& blocks, const DatasetManifest& manifest);

std::string serialize_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(std::string_view text);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace hdrf::dataset
