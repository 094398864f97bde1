#ifndef THERMOFUSE_IO_PNG_HPP
#define THERMOFUSE_IO_PNG_HPP

// Small PNG codec: grayscale / RGB / RGBA at 8 or 16 bits, no interlacing,
// no palettes. The writer emits unfiltered scanlines; the reader handles all
// five filter types so files from other tools load too.

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "thermofuse/io/zlib_util.hpp"

namespace thermofuse::io {

struct MalformedPng : std::runtime_error {
    explicit MalformedPng(const std::string& what) : std::runtime_error("MalformedPng: " + what) {}
};

struct PngImage {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1, 2, 3 or 4
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint16_t> samples;  // interleaved, row-major
};

namespace detail {

inline std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | p[3];
}

inline int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

inline void put_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(x >> 24);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back(x & 0xff);
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::uint8_t* data, std::size_t len) {
    put_be32(out, static_cast<std::uint32_t>(len));
    const std::size_t type_pos = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + len);
    const uLong crc = crc32(crc32(0, out.data() + type_pos, 4),
                            len ? out.data() + type_pos + 4 : nullptr,
                            static_cast<uInt>(len));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline PngImage read_png(const std::uint8_t* bytes, std::size_t n) {
    static const std::uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (n < 8 || std::memcmp(bytes, kSig, 8) != 0) throw MalformedPng("bad signature");

    PngImage img;
    int color_type = -1;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    bool seen_end = false;
    while (pos + 8 <= n && !seen_end) {
        const std::uint32_t len = detail::be32(bytes + pos);
        if (pos + 12 + std::size_t(len) > n) throw MalformedPng("truncated chunk");
        const char* type = reinterpret_cast<const char*>(bytes + pos + 4);
        const std::uint8_t* data = bytes + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw MalformedPng("bad IHDR");
            img.width = static_cast<int>(detail::be32(data));
            img.height = static_cast<int>(detail::be32(data + 4));
            img.bit_depth = data[8];
            color_type = data[9];
            if (data[10] != 0 || data[11] != 0) throw MalformedPng("bad compression/filter method");
            if (data[12] != 0) throw MalformedPng("interlaced images unsupported");
            if (img.bit_depth != 8 && img.bit_depth != 16) throw MalformedPng("unsupported bit depth");
            switch (color_type) {
                case 0: img.channels = 1; break;
                case 2: img.channels = 3; break;
                case 4: img.channels = 2; break;
                case 6: img.channels = 4; break;
                default: throw MalformedPng("unsupported color type");
            }
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_end = true;
        }
        pos += 12 + std::size_t(len);
    }
    if (img.width <= 0 || img.height <= 0 || color_type < 0) throw MalformedPng("missing IHDR");
    if (idat.empty()) throw MalformedPng("missing IDAT");

    const int bytes_per_sample = img.bit_depth / 8;
    const std::size_t bpp = std::size_t(img.channels) * bytes_per_sample;
    const std::size_t stride = std::size_t(img.width) * bpp;
    auto raw = zlib_inflate(idat.data(), idat.size(), (stride + 1) * img.height);
    if (raw.size() != (stride + 1) * img.height) throw MalformedPng("decoded size mismatch");

    std::vector<std::uint8_t> cur(stride, 0), prev(stride, 0);
    img.samples.resize(std::size_t(img.width) * img.height * img.channels);
    std::size_t si = 0;
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* row = raw.data() + std::size_t(y) * (stride + 1);
        const int filter = row[0];
        const std::uint8_t* src = row + 1;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= bpp ? cur[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= bpp ? prev[i - bpp] : 0;
            int v;
            switch (filter) {
                case 0: v = src[i]; break;
                case 1: v = src[i] + a; break;
                case 2: v = src[i] + b; break;
                case 3: v = src[i] + (a + b) / 2; break;
                case 4: v = src[i] + detail::paeth(a, b, c); break;
                default: throw MalformedPng("bad filter type");
            }
            cur[i] = static_cast<std::uint8_t>(v);
        }
        if (img.bit_depth == 8) {
            for (std::size_t i = 0; i < stride; ++i) img.samples[si++] = cur[i];
        } else {
            for (std::size_t i = 0; i < stride; i += 2)
                img.samples[si++] = static_cast<std::uint16_t>((cur[i] << 8) | cur[i + 1]);
        }
        std::swap(cur, prev);
    }
    return img;
}

inline PngImage read_png(const std::vector<std::uint8_t>& bytes) {
    return read_png(bytes.data(), bytes.size());
}

inline std::vector<std::uint8_t> write_png(const PngImage& img, int zlib_level = 6) {
    if (img.bit_depth != 8 && img.bit_depth != 16) throw MalformedPng("writer: bad bit depth");
    int color_type;
    switch (img.channels) {
        case 1: color_type = 0; break;
        case 2: color_type = 4; break;
        case 3: color_type = 2; break;
        case 4: color_type = 6; break;
        default: throw MalformedPng("writer: bad channel count");
    }
    const int bytes_per_sample = img.bit_depth / 8;
    const std::size_t stride = std::size_t(img.width) * img.channels * bytes_per_sample;

    std::vector<std::uint8_t> raw((stride + 1) * img.height);
    std::size_t si = 0;
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = raw.data() + std::size_t(y) * (stride + 1);
        row[0] = 0;  // no filter
        std::uint8_t* dst = row + 1;
        for (std::size_t x = 0; x < std::size_t(img.width) * img.channels; ++x) {
            const std::uint16_t v = img.samples[si++];
            if (img.bit_depth == 8) {
                *dst++ = static_cast<std::uint8_t>(v & 0xff);
            } else {
                *dst++ = static_cast<std::uint8_t>(v >> 8);
                *dst++ = static_cast<std::uint8_t>(v & 0xff);
            }
        }
    }

    std::vector<std::uint8_t> out;
    static const std::uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), kSig, kSig + 8);

    std::uint8_t ihdr[13];
    ihdr[0] = img.width >> 24; ihdr[1] = (img.width >> 16) & 0xff;
    ihdr[2] = (img.width >> 8) & 0xff; ihdr[3] = img.width & 0xff;
    ihdr[4] = img.height >> 24; ihdr[5] = (img.height >> 16) & 0xff;
    ihdr[6] = (img.height >> 8) & 0xff; ihdr[7] = img.height & 0xff;
    ihdr[8] = static_cast<std::uint8_t>(img.bit_depth);
    ihdr[9] = static_cast<std::uint8_t>(color_type);
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    detail::put_chunk(out, "IHDR", ihdr, 13);

    auto compressed = zlib_deflate(raw.data(), raw.size(), zlib_level);
    detail::put_chunk(out, "IDAT", compressed.data(), compressed.size());
    detail::put_chunk(out, "IEND", nullptr, 0);
    return out;
}

}  // namespace thermofuse::io

#endif
