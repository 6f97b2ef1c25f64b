#pragma once

// Byte-buffer helpers shared by the wire format, the audit ledger and the
// key-derivation input packing: big-endian integer I/O, hex codecs and
// 4-byte length-prefixed segments.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsc/error.hpp"

namespace qsc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, ByteView b) {
    out.insert(out.end(), b.begin(), b.end());
}

inline void append(Bytes& out, std::string_view s) {
    out.insert(out.end(), s.begin(), s.end());
}

inline void append_u32_be(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_u64_be(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline std::uint32_t read_u32_be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) |
           static_cast<std::uint32_t>(p[3]);
}

inline std::uint64_t read_u64_be(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

// Length-prefixed segment: 4-byte big-endian length followed by the payload.
inline void append_lp(Bytes& out, ByteView b) {
    append_u32_be(out, static_cast<std::uint32_t>(b.size()));
    append(out, b);
}

inline void append_lp(Bytes& out, std::string_view s) {
    append_u32_be(out, static_cast<std::uint32_t>(s.size()));
    append(out, s);
}

// Sequential reader over a framed buffer. Any structural violation
// (truncation, oversized length, trailing bytes) raises MalformedFrame.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    // Upper bound on a single segment; rejects hostile length prefixes
    // before any allocation happens.
    static constexpr std::uint32_t kMaxSegment = 1u << 26;

    Bytes take(std::size_t n) {
        require(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    std::uint32_t u32() {
        require(4);
        std::uint32_t v = read_u32_be(data_.data() + pos_);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        require(8);
        std::uint64_t v = read_u64_be(data_.data() + pos_);
        pos_ += 8;
        return v;
    }

    std::uint8_t u8() {
        require(1);
        return data_[pos_++];
    }

    Bytes lp() {
        std::uint32_t n = u32();
        if (n > kMaxSegment)
            throw Error(ErrorCode::MalformedFrame, "segment length exceeds cap");
        return take(n);
    }

    std::string lp_string() {
        Bytes b = lp();
        return std::string(b.begin(), b.end());
    }

    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

    void expect_done() const {
        if (!done())
            throw Error(ErrorCode::MalformedFrame, "trailing bytes after frame");
    }

private:
    void require(std::size_t n) const {
        if (data_.size() - pos_ < n)
            throw Error(ErrorCode::MalformedFrame, "truncated frame");
    }

    ByteView data_;
    std::size_t pos_ = 0;
};

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);

}  // namespace qsc
