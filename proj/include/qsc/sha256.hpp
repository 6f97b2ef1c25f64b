#pragma once

// SHA-256 and HMAC-SHA-256. Self-contained so the deterministic test suite
// never depends on an external crypto library; verified against the usual
// NIST / RFC 4231 vectors in the unit tests.

#include <array>
#include <cstdint>

#include "qsc/bytes.hpp"

namespace qsc {

class Sha256 {
public:
    static constexpr std::size_t kDigestSize = 32;

    Sha256();
    void update(ByteView data);
    void update(std::string_view s) { update(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())); }
    Bytes finish();

    static Bytes digest(ByteView data);

private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::uint64_t total_len_ = 0;
    std::array<std::uint8_t, 64> buf_{};
    std::size_t buf_len_ = 0;
};

// Convenience: hash the concatenation of labelled segments. Each segment is
// length-prefixed before hashing so distinct splits never collide.
Bytes hash_segments(std::initializer_list<ByteView> segments);

Bytes hmac_sha256(ByteView key, ByteView message);

}  // namespace qsc
