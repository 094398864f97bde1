#ifndef THERMOFUSE_IO_ZLIB_UTIL_HPP
#define THERMOFUSE_IO_ZLIB_UTIL_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <zlib.h>

namespace thermofuse::io {

inline std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* p, std::size_t n,
                                              std::size_t size_hint = 0) {
    std::vector<std::uint8_t> out;
    out.reserve(size_hint ? size_hint : n * 3);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw std::runtime_error("zlib: inflateInit failed");
    zs.next_in = const_cast<Bytef*>(p);
    zs.avail_in = static_cast<uInt>(n);
    std::uint8_t buf[1 << 15];
    int ret = Z_OK;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("zlib: corrupt deflate stream");
        }
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (ret != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (ret != Z_STREAM_END) throw std::runtime_error("zlib: truncated deflate stream");
    return out;
}

inline std::vector<std::uint8_t> zlib_deflate(const std::uint8_t* p, std::size_t n,
                                              int level = 6) {
    uLongf bound = compressBound(static_cast<uLong>(n));
    std::vector<std::uint8_t> out(bound);
    if (compress2(out.data(), &bound, p, static_cast<uLong>(n), level) != Z_OK)
        throw std::runtime_error("zlib: compress2 failed");
    out.resize(bound);
    return out;
}

}  // namespace thermofuse::io

#endif
