#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "hdrf/error.hpp"
#include "hdrf/formats.hpp"

namespace hdrf::io {
namespace {

[[noreturn]] void fail(std::size_t offset, const std::string& what) {
    throw FormatError("RGBE: " + what + " at byte " + std::to_string(offset));
}

// Returns the line starting at pos (without '\n') and advances pos past the newline.
std::string_view next_line(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos == bytes.size()) fail(start, "unterminated header line");
    std::string_view line(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
    ++pos;
    return line;
}

int parse_dim(std::string_view token, std::size_t offset) {
    int v = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size() || v < 1) fail(offset, "bad dimension");
    return v;
}

void read_flat_scanline(std::span<const std::uint8_t> bytes, std::size_t& pos, int width,
                        std::vector<std::uint8_t>& line) {
    int x = 0;
    int shift = 0;
    while (x < width) {
        if (bytes.size() - pos < 4) fail(pos, "truncated scanline");
        const std::uint8_t* q = bytes.data() + pos;
        pos += 4;
        if (q[0] == 1 && q[1] == 1 && q[2] == 1) {
            // Old-style run: repeat the previous pixel.
            if (x == 0) fail(pos - 4, "run with no preceding pixel");
            std::size_t count = static_cast<std::size_t>(q[3]) << shift;
            if (count > static_cast<std::size_t>(width - x)) fail(pos - 4, "run overflows scanline");
            for (std::size_t i = 0; i < count; ++i, ++x) {
                std::copy_n(&line[(x - 1) * 4], 4, &line[x * 4]);
            }
            shift += 8;
        } else {
            std::copy_n(q, 4, &line[x * 4]);
            ++x;
            shift = 0;
        }
    }
}

void read_rle_scanline(std::span<const std::uint8_t> bytes, std::size_t& pos, int width,
                       std::vector<std::uint8_t>& line) {
    pos += 4;  // 2, 2, width hi, width lo
    for (int c = 0; c < 4; ++c) {
        int x = 0;
        while (x < width) {
            if (pos >= bytes.size()) fail(pos, "truncated scanline");
            int count = bytes[pos++];
            if (count > 128) {
                count -= 128;
                if (count > width - x) fail(pos - 1, "run overflows scanline");
                if (pos >= bytes.size()) fail(pos, "truncated scanline");
                std::uint8_t v = bytes[pos++];
                for (int i = 0; i < count; ++i) line[(x++) * 4 + c] = v;
            } else {
                if (count == 0 || count > width - x) fail(pos - 1, "bad literal count");
                if (bytes.size() - pos < static_cast<std::size_t>(count)) fail(pos, "truncated scanline");
                for (int i = 0; i < count; ++i) line[(x++) * 4 + c] = bytes[pos++];
            }
        }
    }
}

}  // namespace

std::array<std::uint8_t, 4> float_to_rgbe(float r, float g, float b) {
    if (!std::isfinite(r) || !std::isfinite(g) || !std::isfinite(b)) {
        throw FormatError("RGBE: cannot encode non-finite component");
    }
    if (r < 0 || g < 0 || b < 0) throw FormatError("RGBE: cannot encode negative component");
    double v = std::max({double(r), double(g), double(b)});
    if (v < 1e-38) return {0, 0, 0, 0};
    int e = 0;
    std::frexp(v, &e);  // v = f * 2^e, f in [0.5, 1)
    auto quantize = [&](double c) { return std::lround(std::ldexp(c, 8 - e)); };
    long mr = quantize(r), mg = quantize(g), mb = quantize(b);
    if (std::max({mr, mg, mb}) > 255) {
        ++e;
        mr = quantize(r);
        mg = quantize(g);
        mb = quantize(b);
    }
    if (e + 128 > 255) throw FormatError("RGBE: component exceeds exponent range");
    if (e + 128 < 1) return {0, 0, 0, 0};
    return {static_cast<std::uint8_t>(mr), static_cast<std::uint8_t>(mg), static_cast<std::uint8_t>(mb),
            static_cast<std::uint8_t>(e + 128)};
}

std::array<float, 3> rgbe_to_float(std::array<std::uint8_t, 4> q) {
    if (q[3] == 0) return {0.0f, 0.0f, 0.0f};
    int e = int(q[3]) - 136;  // mantissa / 256 * 2^(e - 128)
    return {static_cast<float>(std::ldexp(double(q[0]), e)), static_cast<float>(std::ldexp(double(q[1]), e)),
            static_cast<float>(std::ldexp(double(q[2]), e))};
}

HdrImage decode_rgbe(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    std::string_view magic = next_line(bytes, pos);
    if (!magic.starts_with("#?RADIANCE") && !magic.starts_with("#?RGBE")) fail(0, "missing #?RADIANCE signature");
    for (;;) {
        std::size_t at = pos;
        std::string_view line = next_line(bytes, pos);
        if (line.empty()) break;
        if (line.starts_with("FORMAT=") && line != "FORMAT=32-bit_rle_rgbe") {
            fail(at, "unsupported " + std::string(line));
        }
    }
    std::size_t res_at = pos;
    std::string res(next_line(bytes, pos));
    // Expect exactly "-Y <h> +X <w>".
    std::size_t sp1 = res.find(' ');
    std::size_t sp2 = sp1 == std::string::npos ? sp1 : res.find(' ', sp1 + 1);
    std::size_t sp3 = sp2 == std::string::npos ? sp2 : res.find(' ', sp2 + 1);
    if (sp3 == std::string::npos) fail(res_at, "malformed resolution line");
    std::string_view rv(res);
    if (rv.substr(0, sp1) != "-Y" || rv.substr(sp2 + 1, sp3 - sp2 - 1) != "+X") {
        fail(res_at, "unsupported orientation '" + res + "'");
    }
    int height = parse_dim(rv.substr(sp1 + 1, sp2 - sp1 - 1), res_at);
    int width = parse_dim(rv.substr(sp3 + 1), res_at);

    HdrImage img(width, height);
    std::vector<std::uint8_t> line(static_cast<std::size_t>(width) * 4);
    for (int y = 0; y < height; ++y) {
        bool rle = width >= 8 && width <= 0x7fff && bytes.size() - pos >= 4 && bytes[pos] == 2 &&
                   bytes[pos + 1] == 2 && (bytes[pos + 2] & 0x80) == 0 &&
                   ((int(bytes[pos + 2]) << 8) | bytes[pos + 3]) == width;
        if (rle) {
            read_rle_scanline(bytes, pos, width, line);
        } else {
            read_flat_scanline(bytes, pos, width, line);
        }
        for (int x = 0; x < width; ++x) {
            auto rgb = rgbe_to_float({line[x * 4], line[x * 4 + 1], line[x * 4 + 2], line[x * 4 + 3]});
            std::copy(rgb.begin(), rgb.end(), img.pixel(x, y));
        }
    }
    return img;
}

Bytes encode_rgbe(const HdrImage& img) {
    ByteWriter w;
    w.put_bytes("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    w.put_bytes("-Y " + std::to_string(img.height) + " +X " + std::to_string(img.width) + "\n");
    w.bytes().reserve(w.bytes().size() + img.pixel_count() * 4);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const float* p = img.data.data() + i * 3;
        for (std::uint8_t b : float_to_rgbe(p[0], p[1], p[2])) w.put_u8(b);
    }
    return w.take();
}

}  // namespace hdrf::io
