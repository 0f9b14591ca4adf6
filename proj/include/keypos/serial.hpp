#pragma once

#include "keypos/errors.hpp"

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace keypos {

/// Little-endian binary writer over an ostream.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void putU8(std::uint8_t v) { putBytes(&v, 1); }
    void putU32(std::uint32_t v)
    {
        std::uint8_t b[4] = {static_cast<std::uint8_t>(v),
                             static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16),
                             static_cast<std::uint8_t>(v >> 24)};
        putBytes(b, 4);
    }
    void putI32(std::int32_t v) { putU32(static_cast<std::uint32_t>(v)); }
    void putU64(std::uint64_t v)
    {
        putU32(static_cast<std::uint32_t>(v));
        putU32(static_cast<std::uint32_t>(v >> 32));
    }
    void putF32(float v)
    {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        putU32(bits);
    }
    void putF64(double v)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        putU64(bits);
    }
    void putMagic(const char magic[4]) { putBytes(magic, 4); }
    void putBytes(const void* data, std::size_t n)
    {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
        if (!out_)
            throw IoError("write failed");
    }

private:
    std::ostream& out_;
};

/// Little-endian binary reader over an istream.
class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    std::uint8_t getU8()
    {
        std::uint8_t v;
        getBytes(&v, 1);
        return v;
    }
    std::uint32_t getU32()
    {
        std::uint8_t b[4];
        getBytes(b, 4);
        return static_cast<std::uint32_t>(b[0]) |
               (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::int32_t getI32() { return static_cast<std::int32_t>(getU32()); }
    std::uint64_t getU64()
    {
        const std::uint64_t lo = getU32();
        const std::uint64_t hi = getU32();
        return lo | (hi << 32);
    }
    float getF32()
    {
        const std::uint32_t bits = getU32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double getF64()
    {
        const std::uint64_t bits = getU64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void expectMagic(const char magic[4], const std::string& what)
    {
        char b[4];
        getBytes(b, 4);
        if (std::memcmp(b, magic, 4) != 0)
            throw FormatError("bad magic: not a " + what + " file");
    }
    void getBytes(void* data, std::size_t n)
    {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError("unexpected end of file");
    }

private:
    std::istream& in_;
};

/// FNV-1a 64-bit hash, used to fingerprint vocabulary bytes.
std::uint64_t fnv1a64(const void* data, std::size_t n);

} // namespace keypos
