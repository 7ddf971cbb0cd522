#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "hdrf/luminance.hpp"

namespace hdrf::dataset {

inline constexpr int kBlockSize = 64;
inline constexpr int kBlockPixels = kBlockSize * kBlockSize;

enum class HdrClass : std::uint8_t { MHDR = 0, IHDR = 1 };

std::string_view to_string(HdrClass c);
HdrClass parse_class(std::string_view s);

/// One square tile of a (log-)luminance map. label doubles as the CNN target index.
struct LogLumBlock {
    std::vector<float> pixels;  // size * size, row-major
    HdrClass label = HdrClass::MHDR;
    std::uint32_t source_id = 0;  // index of the source image in the manifest
    int row = 0;                  // origin of the tile in the source map
    int col = 0;
};

struct TileResult {
    std::vector<LogLumBlock> blocks;
    bool undersized = false;  // the map could not hold a single tile
};

/// Non-overlapping tiles in row-major order; right and bottom remainders are dropped.
TileResult tile_blocks(const LuminanceMap& map, HdrClass label, std::uint32_t source_id, int size = kBlockSize);

// Block store: "HDRFBLK1", u32 block size, u64 count, then per block
// u8 label, u32 source id, u32 row, u32 col, size*size little-endian f32.
void write_block_store(const std::filesystem::path& path, const std::vector<LogLumBlock>& blocks,
                       int size = kBlockSize);
std::vector<LogLumBlock> read_block_store(const std::filesystem::path& path);

}  // namespace hdrf::dataset
