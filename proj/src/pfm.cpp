#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hdrf/error.hpp"
#include "hdrf/formats.hpp"

namespace hdrf::io {
namespace {

[[noreturn]] void fail(std::size_t offset, const std::string& what) {
    throw FormatError("PFM: " + what + " at byte " + std::to_string(offset));
}

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string next_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    std::size_t start = pos;
    while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
    if (start == pos) fail(start, "truncated header");
    return std::string(bytes.begin() + start, bytes.begin() + pos);
}

}  // namespace

HdrImage decode_pfm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    if (magic == "Pf") fail(0, "grayscale Pf is unsupported");
    if (magic != "PF") fail(0, "missing PF magic");
    std::size_t dims_at = pos;
    std::string ws = next_token(bytes, pos);
    std::string hs = next_token(bytes, pos);
    int w = 0, h = 0;
    auto r1 = std::from_chars(ws.data(), ws.data() + ws.size(), w);
    auto r2 = std::from_chars(hs.data(), hs.data() + hs.size(), h);
    if (r1.ec != std::errc() || r2.ec != std::errc() || w < 1 || h < 1) fail(dims_at, "bad dimensions");
    std::size_t scale_at = pos;
    std::string ss = next_token(bytes, pos);
    char* end = nullptr;
    double scale = std::strtod(ss.c_str(), &end);
    if (end != ss.c_str() + ss.size() || scale == 0.0 || !std::isfinite(scale)) fail(scale_at, "bad scale");
    if (pos >= bytes.size() || !is_space(bytes[pos])) fail(pos, "missing separator after scale");
    ++pos;
    bool little = scale < 0;

    HdrImage img(w, h);
    std::size_t row_floats = static_cast<std::size_t>(w) * 3;
    if (bytes.size() - pos < img.data.size() * 4) fail(pos, "truncated payload");
    for (int row = 0; row < h; ++row) {
        float* dst = img.data.data() + static_cast<std::size_t>(h - 1 - row) * row_floats;
        for (std::size_t i = 0; i < row_floats; ++i, pos += 4) {
            std::uint32_t u = 0;
            for (int k = 0; k < 4; ++k) {
                int shift = little ? 8 * k : 8 * (3 - k);
                u |= static_cast<std::uint32_t>(bytes[pos + k]) << shift;
            }
            float v = std::bit_cast<float>(u);
            if (!std::isfinite(v) || v < 0.0f) fail(pos, "non-finite or negative sample");
            dst[i] = v;
        }
    }
    return img;
}

Bytes encode_pfm(const HdrImage& img) {
    ByteWriter out;
    out.put_bytes("PF\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n-1.0\n");
    std::size_t row_floats = static_cast<std::size_t>(img.width) * 3;
    for (int row = img.height - 1; row >= 0; --row) {
        out.put_f32s(std::span(img.data.data() + row * row_floats, row_floats));
    }
    return out.take();
}

}  // namespace hdrf::io
