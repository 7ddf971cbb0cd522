#include "hdrf/blocks.hpp"

#include "hdrf/binary_io.hpp"
#include "hdrf/error.hpp"

namespace hdrf::dataset {

std::string_view to_string(HdrClass c) { return c == HdrClass::MHDR ? "MHDR" : "IHDR"; }

HdrClass parse_class(std::string_view s) {
    if (s == "MHDR") return HdrClass::MHDR;
    if (s == "IHDR") return HdrClass::IHDR;
    throw FormatError("unknown class '" + std::string(s) + "'");
}

TileResult tile_blocks(const LuminanceMap& map, HdrClass label, std::uint32_t source_id, int size) {
    if (size < 1) throw ParameterError("tile_blocks: size must be positive");
    TileResult result;
    int nx = map.width / size;
    int ny = map.height / size;
    if (nx == 0 || ny == 0) {
        result.undersized = true;
        return result;
    }
    result.blocks.reserve(static_cast<std::size_t>(nx) * ny);
    for (int by = 0; by < ny; ++by) {
        for (int bx = 0; bx < nx; ++bx) {
            LogLumBlock b;
            b.label = label;
            b.source_id = source_id;
            b.row = by * size;
            b.col = bx * size;
            b.pixels.resize(static_cast<std::size_t>(size) * size);
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) b.pixels[y * size + x] = map.at(b.col + x, b.row + y);
            }
            result.blocks.push_back(std::move(b));
        }
    }
    return result;
}

void write_block_store(const std::filesystem::path& path, const std::vector<LogLumBlock>& blocks, int size) {
    io::ByteWriter w;
    w.put_bytes("HDRFBLK1");
    w.put_u32(static_cast<std::uint32_t>(size));
    w.put_u64(blocks.size());
    w.bytes().reserve(blocks.size() * (13 + 4 * static_cast<std::size_t>(size) * size) + 32);
    for (const auto& b : blocks) {
        if (b.pixels.size() != static_cast<std::size_t>(size) * size) {
            throw DataError("block store: block has wrong pixel count");
        }
        w.put_u8(static_cast<std::uint8_t>(b.label));
        w.put_u32(b.source_id);
        w.put_u32(static_cast<std::uint32_t>(b.row));
        w.put_u32(static_cast<std::uint32_t>(b.col));
        w.put_f32s(b.pixels);
    }
    io::write_file(path, w.bytes());
}

std::vector<LogLumBlock> read_block_store(const std::filesystem::path& path) {
    io::Bytes bytes = io::read_file(path);
    io::ByteReader r(bytes);
    r.expect_magic("HDRFBLK1");
    std::uint32_t size = r.u32();
    std::uint64_t count = r.u64();
    if (size == 0 || size > 4096) throw FormatError("block store: bad block size");
    std::vector<LogLumBlock> blocks(count);
    for (auto& b : blocks) {
        std::uint8_t label = r.u8();
        if (label > 1) throw FormatError("block store: bad label at byte " + std::to_string(r.offset() - 1));
        b.label = static_cast<HdrClass>(label);
        b.source_id = r.u32();
        b.row = static_cast<int>(r.u32());
        b.col = static_cast<int>(r.u32());
        b.pixels.resize(static_cast<std::size_t>(size) * size);
        r.f32s(b.pixels);
    }
    if (!r.at_end()) throw FormatError("block store: trailing bytes at " + std::to_string(r.offset()));
    return blocks;
}

}  // namespace hdrf::dataset
