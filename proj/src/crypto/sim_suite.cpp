// Deterministic simulation suite. Every primitive is built from the
// domain-separated SHA-256 helpers, which makes key generation,
// encapsulation and sealing reproducible under a seeded entropy source and
// makes every integrity check an exact hash comparison. Tamper detection is
// therefore a provable property of the construction rather than a
// statistical one, which is what the adversarial campaign asserts.

#include "qsc/crypto/provider.hpp"
#include "qsc/error.hpp"
#include "qsc/sha256.hpp"
#include "qsc/xor_kernel.hpp"

namespace qsc::crypto {

namespace {

constexpr std::size_t kSeedBytes = 32;
constexpr std::size_t kTagBytes = 32;

class SimKem final : public KemProvider {
public:
    std::string id() const override { return "KYBER768"; }
    bool is_simulation() const override { return true; }

    KemKeyPair keygen(EntropySource& rng) const override {
        Bytes sk = rng.sample(kSeedBytes);
        Bytes pk = hash_segments({to_bytes("qsc.kem.pub"), ByteView(sk)});
        return {std::move(pk), std::move(sk)};
    }

    Encapsulation encapsulate(ByteView public_key,
                              EntropySource& rng) const override {
        if (public_key.empty())
            throw Error(ErrorCode::EmptyInput, "kem public key empty");
        Bytes eph = rng.sample(kSeedBytes);
        Bytes tag = hash_segments(
            {to_bytes("qsc.kem.tag"), public_key, ByteView(eph)});
        Bytes ct;
        ct.reserve(eph.size() + tag.size());
        append(ct, ByteView(eph));
        append(ct, ByteView(tag));
        Bytes ss = hash_segments({to_bytes("qsc.kem.ss"), public_key, ByteView(eph)});
        return {std::move(ct), KeyMaterial::make(std::move(ss), KeyOrigin::PQC)};
    }

    KeyMaterial decapsulate(ByteView private_key,
                            ByteView ciphertext) const override {
        if (private_key.empty())
            throw Error(ErrorCode::EmptyInput, "kem private key empty");
        if (ciphertext.size() != kSeedBytes + kTagBytes)
            throw Error(ErrorCode::DecapsulationFailure,
                        "ciphertext length mismatch");
        Bytes pk = hash_segments({to_bytes("qsc.kem.pub"), private_key});
        ByteView eph = ciphertext.subspan(0, kSeedBytes);
        ByteView tag = ciphertext.subspan(kSeedBytes);
        Bytes expect = hash_segments({to_bytes("qsc.kem.tag"), ByteView(pk), eph});
        if (!std::equal(expect.begin(), expect.end(), tag.begin(), tag.end()))
            throw Error(ErrorCode::DecapsulationFailure,
                        "ciphertext integrity check failed");
        Bytes ss = hash_segments({to_bytes("qsc.kem.ss"), ByteView(pk), eph});
        return KeyMaterial::make(std::move(ss), KeyOrigin::PQC);
    }
};

class SimSig final : public SigProvider {
public:
    std::string id() const override { return "DILITHIUM3"; }
    bool is_simulation() const override { return true; }

    SigKeyPair keygen(EntropySource& rng) const override {
        Bytes sk = rng.sample(kSeedBytes);
        Bytes pk = hash_segments({to_bytes("qsc.sig.pub"), ByteView(sk)});
        return {std::move(pk), std::move(sk)};
    }

    Bytes sign(ByteView private_key, ByteView digest) const override {
        check_digest(digest);
        if (private_key.empty())
            throw Error(ErrorCode::EmptyInput, "signing key empty");
        Bytes pk = hash_segments({to_bytes("qsc.sig.pub"), private_key});
        return hash_segments({to_bytes("qsc.sig.mac"), ByteView(pk), digest});
    }

    bool verify(ByteView public_key, ByteView digest,
                ByteView signature) const override {
        if (public_key.empty() || digest.size() != Sha256::kDigestSize)
            return false;
        Bytes expect =
            hash_segments({to_bytes("qsc.sig.mac"), public_key, digest});
        return signature.size() == expect.size() &&
               std::equal(expect.begin(), expect.end(), signature.begin());
    }

private:
    static void check_digest(ByteView digest) {
        if (digest.size() != Sha256::kDigestSize)
            throw Error(ErrorCode::EmptyInput,
                        "signatures cover one hash digest");
    }
};

class SimAead final : public AeadProvider {
public:
    std::string id() const override { return "AES256-GCM"; }
    bool is_simulation() const override { return true; }

    Bytes seal(const KeyMaterial& key, ByteView nonce, ByteView plaintext,
               ByteView aad) const override {
        check_inputs(key, nonce);
        Bytes body(plaintext.begin(), plaintext.end());
        apply_keystream(key.secret, nonce, body);
        Bytes tag = hash_segments({to_bytes("qsc.aead.tag"), ByteView(key.secret),
                                   nonce, aad, ByteView(body)});
        append(body, ByteView(tag));
        return body;
    }

    Bytes open(const KeyMaterial& key, ByteView nonce, ByteView ciphertext,
               ByteView aad) const override {
        check_inputs(key, nonce);
        if (ciphertext.size() < kTagBytes)
            throw Error(ErrorCode::AuthenticationFailure, "ciphertext too short");
        ByteView body = ciphertext.subspan(0, ciphertext.size() - kTagBytes);
        ByteView tag = ciphertext.subspan(ciphertext.size() - kTagBytes);
        Bytes expect = hash_segments(
            {to_bytes("qsc.aead.tag"), ByteView(key.secret), nonce, aad, body});
        if (!std::equal(expect.begin(), expect.end(), tag.begin(), tag.end()))
            throw Error(ErrorCode::AuthenticationFailure, "aead tag mismatch");
        Bytes plain(body.begin(), body.end());
        apply_keystream(key.secret, nonce, plain);
        return plain;
    }

private:
    static void check_inputs(const KeyMaterial& key, ByteView nonce) {
        if (key.secret.size() < KeyMaterial::kMinBytes)
            throw Error(ErrorCode::EmptyInput, "aead key below minimum length");
        if (nonce.size() != kNonceBytes)
            throw Error(ErrorCode::EmptyInput, "aead nonce must be 24 bytes");
    }

    static void apply_keystream(const Bytes& key, ByteView nonce, Bytes& buf) {
        Bytes block;
        for (std::size_t off = 0; off < buf.size(); off += Sha256::kDigestSize) {
            Bytes ctr;
            append_u64_be(ctr, off / Sha256::kDigestSize);
            block = hash_segments({to_bytes("qsc.aead.ks"), ByteView(key), nonce,
                                   ByteView(ctr)});
            std::size_t n = std::min(block.size(), buf.size() - off);
            xor_bytes(buf.data() + off, buf.data() + off, block.data(), n);
        }
    }
};

class SimHash final : public HashProvider {
public:
    std::string id() const override { return "SHA256"; }
    Bytes hash(ByteView data) const override { return Sha256::digest(data); }
    std::size_t digest_size() const override { return Sha256::kDigestSize; }
};

}  // namespace

SuiteDescriptor register_simulation_suite() {
    static const SuiteDescriptor desc = [] {
        SuiteRegistry& r = SuiteRegistry::instance();
        r.register_kem(std::make_shared<SimKem>());
        r.register_sig(std::make_shared<SimSig>());
        r.register_aead(std::make_shared<SimAead>());
        r.register_hash("SHA256", std::make_shared<SimHash>());
        return SuiteDescriptor{};
    }();
    return desc;
}

}  // namespace qsc::crypto
