#include <charconv>
#include <string>

#include "hdrf/error.hpp"
#include "hdrf/formats.hpp"

namespace hdrf::io {
namespace {

[[noreturn]] void fail(std::size_t offset, const std::string& what) {
    throw FormatError("PPM: " + what + " at byte " + std::to_string(offset));
}

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Skips whitespace and '#' comments, then reads one decimal header field.
int header_int(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    for (;;) {
        while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') ++pos;
    int v = 0;
    auto [p, ec] = std::from_chars(reinterpret_cast<const char*>(bytes.data() + start),
                                   reinterpret_cast<const char*>(bytes.data() + pos), v);
    if (ec != std::errc() || start == pos) fail(start, "bad header field");
    return v;
}

}  // namespace

LdrImage decode_ppm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') fail(0, "missing P6 magic");
    std::size_t pos = 2;
    int w = header_int(bytes, pos);
    int h = header_int(bytes, pos);
    std::size_t maxval_at = pos;
    int maxval = header_int(bytes, pos);
    if (w < 1 || h < 1) fail(2, "bad dimensions");
    if (maxval != 255) fail(maxval_at, "unsupported maxval " + std::to_string(maxval));
    if (pos >= bytes.size() || !is_space(bytes[pos])) fail(pos, "missing separator after maxval");
    ++pos;
    LdrImage img(w, h);
    if (bytes.size() - pos < img.data.size()) fail(pos, "truncated payload");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.data.size(), img.data.begin());
    return img;
}

Bytes encode_ppm(const LdrImage& img) {
    ByteWriter out;
    out.put_bytes("P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n");
    out.bytes().insert(out.bytes().end(), img.data.begin(), img.data.end());
    return out.take();
}

}  // namespace hdrf::io
