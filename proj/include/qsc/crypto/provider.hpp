#pragma once

// Algorithm provider interfaces and the suite registry. Providers are
// registered under the stable identifiers used by capability maps
// ("KYBER768", "DILITHIUM3", "AES256-GCM", "SHA256"); the deterministic
// simulation suite plugs in behind the same interfaces a production PQC
// library would use.

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "qsc/bytes.hpp"
#include "qsc/crypto/entropy.hpp"

namespace qsc::crypto {

enum class KeyOrigin { QKD, PQC, HYBRID, ENTROPY };

constexpr std::string_view origin_name(KeyOrigin o) {
    switch (o) {
        case KeyOrigin::QKD: return "QKD";
        case KeyOrigin::PQC: return "PQC";
        case KeyOrigin::HYBRID: return "HYBRID";
        case KeyOrigin::ENTROPY: return "ENTROPY";
    }
    return "ENTROPY";
}

// Symmetric key bytes plus where they came from. Secret bytes never leave
// the process through reports or audit payloads; fingerprint() is the only
// exportable form.
struct KeyMaterial {
    Bytes secret;
    KeyOrigin origin = KeyOrigin::ENTROPY;

    static constexpr std::size_t kMinBytes = 16;

    static KeyMaterial make(Bytes secret, KeyOrigin origin);
    std::string fingerprint() const;
    void wipe();
};

struct KemKeyPair {
    Bytes public_key;
    Bytes private_key;
};

struct SigKeyPair {
    Bytes public_key;
    Bytes private_key;
};

struct Encapsulation {
    Bytes ciphertext;
    KeyMaterial shared_secret;
};

class KemProvider {
public:
    virtual ~KemProvider() = default;
    virtual std::string id() const = 0;
    virtual bool is_simulation() const = 0;
    virtual KemKeyPair keygen(EntropySource& rng) const = 0;
    virtual Encapsulation encapsulate(ByteView public_key,
                                      EntropySource& rng) const = 0;
    // Throws DecapsulationFailure when the ciphertext fails its integrity
    // check or does not match the key pair.
    virtual KeyMaterial decapsulate(ByteView private_key,
                                    ByteView ciphertext) const = 0;
};

class SigProvider {
public:
    virtual ~SigProvider() = default;
    virtual std::string id() const = 0;
    virtual bool is_simulation() const = 0;
    virtual SigKeyPair keygen(EntropySource& rng) const = 0;
    // digest must be one hash output long (signing happens over digests,
    // never raw messages).
    virtual Bytes sign(ByteView private_key, ByteView digest) const = 0;
    virtual bool verify(ByteView public_key, ByteView digest,
                        ByteView signature) const = 0;
};

class AeadProvider {
public:
    static constexpr std::size_t kNonceBytes = 24;

    virtual ~AeadProvider() = default;
    virtual std::string id() const = 0;
    virtual bool is_simulation() const = 0;
    virtual Bytes seal(const KeyMaterial& key, ByteView nonce, ByteView plaintext,
                       ByteView aad) const = 0;
    // Throws AuthenticationFailure on any tag mismatch.
    virtual Bytes open(const KeyMaterial& key, ByteView nonce, ByteView ciphertext,
                       ByteView aad) const = 0;
};

class HashProvider {
public:
    virtual ~HashProvider() = default;
    virtual std::string id() const = 0;
    virtual Bytes hash(ByteView data) const = 0;
    virtual std::size_t digest_size() const = 0;
};

// Names the algorithms a link runs. The identifiers resolve through the
// registry; resolution fails with UnknownAlgorithm for unregistered ids.
struct SuiteDescriptor {
    std::string kem_id = "KYBER768";
    std::string sig_id = "DILITHIUM3";
    std::string aead_id = "AES256-GCM";
    std::string hash_id = "SHA256";

    bool operator==(const SuiteDescriptor&) const = default;
};

// Resolved providers for one suite descriptor. References stay valid for
// the process lifetime (providers are registered once and never removed).
struct Suite {
    const KemProvider* kem;
    const SigProvider* sig;
    const AeadProvider* aead;
    const HashProvider* hash;
    SuiteDescriptor descriptor;
};

class SuiteRegistry {
public:
    static SuiteRegistry& instance();

    void register_kem(std::shared_ptr<KemProvider> p);
    void register_sig(std::shared_ptr<SigProvider> p);
    void register_aead(std::shared_ptr<AeadProvider> p);
    void register_hash(std::string id, std::shared_ptr<HashProvider> p);

    const KemProvider& kem(const std::string& id) const;
    const SigProvider& sig(const std::string& id) const;
    const AeadProvider& aead(const std::string& id) const;
    const HashProvider& hash(const std::string& id) const;

private:
    SuiteRegistry() = default;

    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<KemProvider>> kems_;
    std::map<std::string, std::shared_ptr<SigProvider>> sigs_;
    std::map<std::string, std::shared_ptr<AeadProvider>> aeads_;
    std::map<std::string, std::shared_ptr<HashProvider>> hashes_;
};

// Resolves a descriptor against the registry (UnknownAlgorithm on miss).
Suite resolve_suite(const SuiteDescriptor& desc);

// Registers the deterministic simulation providers under the default
// identifiers and returns the default descriptor. Idempotent.
SuiteDescriptor register_simulation_suite();

}  // namespace qsc::crypto
