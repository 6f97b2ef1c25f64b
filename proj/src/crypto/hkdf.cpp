#include "qsc/crypto/hkdf.hpp"

#include "qsc/error.hpp"
#include "qsc/sha256.hpp"

namespace qsc::crypto {

Bytes hkdf_extract(ByteView salt, ByteView ikm) {
    return hmac_sha256(salt, ikm);
}

Bytes hkdf_expand(ByteView prk, ByteView info, std::size_t length) {
    if (length == 0) throw Error(ErrorCode::EmptyInput, "zero-length expand");
    if (length > 255 * Sha256::kDigestSize)
        throw Error(ErrorCode::EmptyInput, "expand length out of range");
    Bytes out;
    out.reserve(length);
    Bytes t;
    std::uint8_t block_index = 1;
    while (out.size() < length) {
        Bytes input = t;
        append(input, info);
        input.push_back(block_index++);
        t = hmac_sha256(prk, ByteView(input));
        std::size_t take = std::min(t.size(), length - out.size());
        out.insert(out.end(), t.begin(), t.begin() + take);
    }
    return out;
}

KeyMaterial derive_key(const std::vector<ByteView>& segments,
                       ByteView context_label, std::size_t length,
                       KeyOrigin origin) {
    bool any_nonempty = false;
    Bytes ikm;
    for (ByteView seg : segments) {
        if (!seg.empty()) any_nonempty = true;
        append_lp(ikm, seg);
    }
    if (!any_nonempty)
        throw Error(ErrorCode::EmptyInput, "all key derivation inputs empty");
    Bytes prk = hkdf_extract(to_bytes(kHkdfSalt), ByteView(ikm));
    Bytes okm = hkdf_expand(ByteView(prk), context_label, length);
    return KeyMaterial::make(std::move(okm), origin);
}

}  // namespace qsc::crypto
