#ifndef THERMOFUSE_IO_TIFF_HPP
#define THERMOFUSE_IO_TIFF_HPP

// Minimal TIFF codec for the radiometric frames this project works with:
// single image, single channel, 16-bit unsigned counts, compression none or
// deflate. The writer also emits 32-bit float grayscale for processed maps.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermofuse/io/zlib_util.hpp"

namespace thermofuse::io {

struct MalformedTiff : std::runtime_error {
    explicit MalformedTiff(const std::string& what) : std::runtime_error("MalformedTiff: " + what) {}
};
struct WrongDepth : std::runtime_error {
    explicit WrongDepth(const std::string& what) : std::runtime_error("WrongDepth: " + what) {}
};

struct Gray16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;  // row-major, top-left origin
};

enum class TiffCompression { None = 1, Deflate = 8 };

namespace detail {

class ByteReader {
public:
    ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
    void set_big_endian(bool be) { big_endian_ = be; }
    std::size_t size() const { return n_; }

    std::uint8_t u8(std::size_t off) const {
        check(off, 1);
        return p_[off];
    }
    std::uint16_t u16(std::size_t off) const {
        check(off, 2);
        return big_endian_ ? static_cast<std::uint16_t>((p_[off] << 8) | p_[off + 1])
                           : static_cast<std::uint16_t>(p_[off] | (p_[off + 1] << 8));
    }
    std::uint32_t u32(std::size_t off) const {
        check(off, 4);
        if (big_endian_)
            return (std::uint32_t(p_[off]) << 24) | (std::uint32_t(p_[off + 1]) << 16) |
                   (std::uint32_t(p_[off + 2]) << 8) | p_[off + 3];
        return std::uint32_t(p_[off]) | (std::uint32_t(p_[off + 1]) << 8) |
               (std::uint32_t(p_[off + 2]) << 16) | (std::uint32_t(p_[off + 3]) << 24);
    }
    const std::uint8_t* at(std::size_t off, std::size_t len) const {
        check(off, len);
        return p_ + off;
    }

private:
    void check(std::size_t off, std::size_t len) const {
        if (off + len > n_ || off + len < off) throw MalformedTiff("offset out of range");
    }
    const std::uint8_t* p_;
    std::size_t n_;
    bool big_endian_ = false;
};

inline std::size_t tiff_type_size(std::uint16_t type) {
    switch (type) {
        case 1: case 2: case 6: case 7: return 1;
        case 3: case 8: return 2;
        case 4: case 9: case 11: return 4;
        case 5: case 10: case 12: return 8;
        default: throw MalformedTiff("unknown field type");
    }
}

struct IfdEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::size_t entry_off = 0;  // offset of the 12-byte entry itself
};

// SHORT or LONG values, inline or via offset
inline std::vector<std::uint32_t> entry_values(const ByteReader& r, const IfdEntry& e) {
    if (e.type != 3 && e.type != 4)
        throw MalformedTiff("expected SHORT or LONG field");
    const std::size_t esz = tiff_type_size(e.type);
    const std::size_t total = esz * e.count;
    const std::size_t base = total <= 4 ? e.entry_off + 8 : r.u32(e.entry_off + 8);
    std::vector<std::uint32_t> vals(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i)
        vals[i] = e.type == 3 ? r.u16(base + i * 2) : r.u32(base + i * 4);
    return vals;
}

}  // namespace detail

inline Gray16 read_tiff_gray16(const std::uint8_t* bytes, std::size_t n) {
    using namespace detail;
    ByteReader r(bytes, n);
    if (n < 8) throw MalformedTiff("file shorter than header");
    const std::uint8_t b0 = r.u8(0), b1 = r.u8(1);
    if (b0 == 'I' && b1 == 'I') {
        r.set_big_endian(false);
    } else if (b0 == 'M' && b1 == 'M') {
        r.set_big_endian(true);
    } else {
        throw MalformedTiff("bad byte-order mark");
    }
    if (r.u16(2) != 42) throw MalformedTiff("bad magic");
    const std::uint32_t ifd_off = r.u32(4);

    const std::uint16_t n_entries = r.u16(ifd_off);
    std::map<std::uint16_t, IfdEntry> tags;
    for (std::uint16_t i = 0; i < n_entries; ++i) {
        const std::size_t eo = ifd_off + 2 + std::size_t(i) * 12;
        IfdEntry e;
        e.type = r.u16(eo + 2);
        e.count = r.u32(eo + 4);
        e.entry_off = eo;
        tags[r.u16(eo)] = e;
    }

    auto scalar = [&](std::uint16_t tag, std::uint32_t fallback, bool required) -> std::uint32_t {
        auto it = tags.find(tag);
        if (it == tags.end()) {
            if (required) throw MalformedTiff("missing tag " + std::to_string(tag));
            return fallback;
        }
        return entry_values(r, it->second).at(0);
    };

    if (tags.count(322) || tags.count(323)) throw MalformedTiff("tiled layout unsupported");

    const std::uint32_t width = scalar(256, 0, true);
    const std::uint32_t height = scalar(257, 0, true);
    const std::uint32_t bps = scalar(258, 1, false);
    const std::uint32_t comp = scalar(259, 1, false);
    const std::uint32_t photometric = scalar(262, 1, false);
    const std::uint32_t spp = scalar(277, 1, false);
    const std::uint32_t rows_per_strip = scalar(278, height, false);
    const std::uint32_t sample_format = scalar(339, 1, false);

    if (spp != 1) throw MalformedTiff("expected a single channel, got spp=" + std::to_string(spp));
    if (bps != 16) throw WrongDepth("expected 16 bits per sample, got " + std::to_string(bps));
    if (sample_format != 1) throw MalformedTiff("expected unsigned integer samples");
    if (photometric > 1) throw MalformedTiff("expected grayscale photometric");
    if (comp != 1 && comp != 8 && comp != 32946)
        throw MalformedTiff("unsupported compression " + std::to_string(comp));
    if (width == 0 || height == 0 || width > 1 << 20 || height > 1 << 20)
        throw MalformedTiff("implausible dimensions");

    if (!tags.count(273) || !tags.count(279)) throw MalformedTiff("missing strip tags");
    const auto offsets = entry_values(r, tags[273]);
    const auto counts = entry_values(r, tags[279]);
    if (offsets.size() != counts.size()) throw MalformedTiff("strip tag count mismatch");
    if (rows_per_strip == 0) throw MalformedTiff("zero rows per strip");
    const std::size_t expect_strips = (height + rows_per_strip - 1) / rows_per_strip;
    if (offsets.size() != expect_strips) throw MalformedTiff("strip count mismatch");

    const std::size_t payload_size = std::size_t(width) * height * 2;
    std::vector<std::uint8_t> payload;
    payload.reserve(payload_size);
    for (std::size_t s = 0; s < offsets.size(); ++s) {
        const std::uint8_t* sp = r.at(offsets[s], counts[s]);
        if (comp == 1) {
            payload.insert(payload.end(), sp, sp + counts[s]);
        } else {
            auto raw = zlib_inflate(sp, counts[s], payload_size);
            payload.insert(payload.end(), raw.begin(), raw.end());
        }
    }
    if (payload.size() != payload_size) throw MalformedTiff("pixel payload size mismatch");

    Gray16 img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.pixels.resize(std::size_t(width) * height);
    const bool be = (b0 == 'M');
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const std::uint8_t lo = payload[2 * i], hi = payload[2 * i + 1];
        img.pixels[i] = be ? static_cast<std::uint16_t>((lo << 8) | hi)
                           : static_cast<std::uint16_t>(lo | (hi << 8));
    }
    return img;
}

inline Gray16 read_tiff_gray16(const std::vector<std::uint8_t>& bytes) {
    return read_tiff_gray16(bytes.data(), bytes.size());
}

namespace detail {

class TiffWriter {
public:
    void put_u16(std::uint16_t v) {
        out.push_back(v & 0xff);
        out.push_back(v >> 8);
    }
    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
    }
    void entry(std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
        put_u16(tag);
        put_u16(type);
        put_u32(count);
        put_u32(value);
    }
    std::vector<std::uint8_t> out;
};

inline std::vector<std::uint8_t> write_tiff_gray(int width, int height,
                                                 const std::uint8_t* payload, std::size_t payload_len,
                                                 int bits, int sample_format,
                                                 TiffCompression comp) {
    std::vector<std::uint8_t> body(payload, payload + payload_len);
    if (comp == TiffCompression::Deflate) body = zlib_deflate(payload, payload_len);

    constexpr int kTagCount = 10;
    const std::uint32_t ifd_off = 8;
    const std::uint32_t data_off = ifd_off + 2 + kTagCount * 12 + 4;

    TiffWriter w;
    w.out.reserve(data_off + body.size());
    w.out.push_back('I');
    w.out.push_back('I');
    w.put_u16(42);
    w.put_u32(ifd_off);

    w.put_u16(kTagCount);
    w.entry(256, 4, 1, static_cast<std::uint32_t>(width));
    w.entry(257, 4, 1, static_cast<std::uint32_t>(height));
    w.entry(258, 3, 1, static_cast<std::uint32_t>(bits));
    w.entry(259, 3, 1, static_cast<std::uint32_t>(comp));
    w.entry(262, 3, 1, 1);  // BlackIsZero
    w.entry(273, 4, 1, data_off);
    w.entry(277, 3, 1, 1);
    w.entry(278, 4, 1, static_cast<std::uint32_t>(height));
    w.entry(279, 4, 1, static_cast<std::uint32_t>(body.size()));
    w.entry(339, 3, 1, static_cast<std::uint32_t>(sample_format));
    w.put_u32(0);  // no next IFD

    w.out.insert(w.out.end(), body.begin(), body.end());
    return w.out;
}

}  // namespace detail

inline std::vector<std::uint8_t> write_tiff_gray16(const Gray16& img,
                                                   TiffCompression comp = TiffCompression::None) {
    std::vector<std::uint8_t> payload(img.pixels.size() * 2);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        payload[2 * i] = img.pixels[i] & 0xff;
        payload[2 * i + 1] = img.pixels[i] >> 8;
    }
    return detail::write_tiff_gray(img.width, img.height, payload.data(), payload.size(), 16, 1, comp);
}

inline std::vector<std::uint8_t> write_tiff_gray_f32(int width, int height, const float* values,
                                                     TiffCompression comp = TiffCompression::None) {
    std::vector<std::uint8_t> payload(std::size_t(width) * height * 4);
    for (std::size_t i = 0; i < std::size_t(width) * height; ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &values[i], 4);
        for (int b = 0; b < 4; ++b) payload[4 * i + b] = (bits >> (8 * b)) & 0xff;
    }
    return detail::write_tiff_gray(width, height, payload.data(), payload.size(), 32, 3, comp);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace thermofuse::io

#endif
