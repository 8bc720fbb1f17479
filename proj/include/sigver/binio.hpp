#ifndef SIGVER_BINIO_HPP
#define SIGVER_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "sigver/error.hpp"

// Little-endian primitives for the artifact container formats.

namespace sigver {

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out)
        throw IoError("write failed");
}

inline void read_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
        throw IoError("unexpected end of file");
}

inline void write_u8(std::ostream& out, std::uint8_t v) { write_bytes(out, &v, 1); }

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    write_bytes(out, b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

inline std::uint8_t read_u8(std::istream& in) {
    std::uint8_t v;
    read_bytes(in, &v, 1);
    return v;
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    read_bytes(in, b, 4);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline std::uint64_t read_u64(std::istream& in) {
    const std::uint64_t lo = read_u32(in);
    const std::uint64_t hi = read_u32(in);
    return lo | hi << 32;
}

inline float read_f32(std::istream& in) {
    const std::uint32_t bits = read_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void write_f32_array(std::ostream& out, const float* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        write_f32(out, p[i]);
}

inline void read_f32_array(std::istream& in, float* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        p[i] = read_f32(in);
}

inline void write_magic(std::ostream& out, const char magic[4]) { write_bytes(out, magic, 4); }

inline void expect_magic(std::istream& in, const char magic[4], const std::string& what) {
    char buf[4];
    read_bytes(in, buf, 4);
    if (std::memcmp(buf, magic, 4) != 0)
        throw IoError(what + ": bad magic, not a " + std::string(magic, 4) + " file");
}

inline void expect_version(std::istream& in, std::uint32_t expected, const std::string& what) {
    const std::uint32_t v = read_u32(in);
    if (v != expected)
        throw IoError(what + ": unsupported format version " + std::to_string(v) + " (expected " +
                      std::to_string(expected) + ")");
}

} // namespace sigver

#endif
