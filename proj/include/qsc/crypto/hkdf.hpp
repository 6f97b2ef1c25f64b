#pragma once

// HKDF (RFC 5869 construction over HMAC-SHA-256) plus the stack's packed
// derivation entry point: the ordered input segments are 4-byte
// length-prefixed before extraction, so absent constituents (an empty QKD
// segment) still occupy a slot and reordering or resplitting inputs always
// changes the output.

#include "qsc/bytes.hpp"
#include "qsc/crypto/provider.hpp"

namespace qsc::crypto {

inline constexpr std::string_view kHkdfSalt = "QSC-v1";

Bytes hkdf_extract(ByteView salt, ByteView ikm);
Bytes hkdf_expand(ByteView prk, ByteView info, std::size_t length);

// Derives `length` bytes from the ordered segments with the fixed protocol
// salt and `context_label` as the expansion info. Throws EmptyInput when
// every segment is empty.
KeyMaterial derive_key(const std::vector<ByteView>& segments,
                       ByteView context_label, std::size_t length,
                       KeyOrigin origin);

}  // namespace qsc::crypto
