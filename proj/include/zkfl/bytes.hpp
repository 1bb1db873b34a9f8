/**
 * @file bytes.hpp
 * @brief Little-endian byte serialization helpers shared by all wire formats.
 * @license Apache-2.0
 */

#ifndef ZKFL_BYTES_HPP
#define ZKFL_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zkfl {

using Bytes = std::vector<uint8_t>;

/// Append-only little-endian writer. All multi-byte integers are LE.
class ByteWriter {
public:
    void put_u8(uint8_t v) { buf_.push_back(v); }

    void put_u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }

    void put_u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void put_u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void put_i32(int32_t v) { put_u32(static_cast<uint32_t>(v)); }
    void put_i64(int64_t v) { put_u64(static_cast<uint64_t>(v)); }

    /// IEEE-754 bit pattern, LE. Canonical: equal doubles serialize equally.
    void put_f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        put_u64(bits);
    }

    void put_bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    void put_str(std::string_view s) {
        put_u32(static_cast<uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const Bytes& data() const { return buf_; }
    Bytes take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    Bytes buf_;
};

/// Bounds-checked LE reader; throws on underrun.
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> b) : b_(b) {}

    uint8_t get_u8() { return take(1)[0]; }

    uint16_t get_u16() {
        auto p = take(2);
        return static_cast<uint16_t>(p[0] | (uint16_t(p[1]) << 8));
    }

    uint32_t get_u32() {
        auto p = take(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
        return v;
    }

    uint64_t get_u64() {
        auto p = take(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
        return v;
    }

    int32_t get_i32() { return static_cast<int32_t>(get_u32()); }
    int64_t get_i64() { return static_cast<int64_t>(get_u64()); }

    double get_f64() {
        uint64_t bits = get_u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    Bytes get_bytes(size_t n) {
        auto p = take(n);
        return Bytes(p.begin(), p.end());
    }

    size_t remaining() const { return b_.size() - pos_; }
    bool done() const { return remaining() == 0; }

private:
    std::span<const uint8_t> take(size_t n) {
        if (pos_ + n > b_.size()) throw std::runtime_error("byte reader: truncated input");
        auto s = b_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::span<const uint8_t> b_;
    size_t pos_ = 0;
};

inline std::string to_hex(std::span<const uint8_t> b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t v : b) {
        s.push_back(digits[v >> 4]);
        s.push_back(digits[v & 0xf]);
    }
    return s;
}

}  // namespace zkfl

#endif  // ZKFL_BYTES_HPP
