#include "qsc/crypto/provider.hpp"

#include <algorithm>

#include "qsc/error.hpp"
#include "qsc/sha256.hpp"

namespace qsc::crypto {

KeyMaterial KeyMaterial::make(Bytes secret, KeyOrigin origin) {
    if (secret.size() < kMinBytes)
        throw Error(ErrorCode::EmptyInput, "key material below minimum length");
    return KeyMaterial{std::move(secret), origin};
}

std::string KeyMaterial::fingerprint() const {
    return to_hex(hash_segments({to_bytes("qsc.key.fp"), ByteView(secret)}));
}

void KeyMaterial::wipe() {
    std::fill(secret.begin(), secret.end(), std::uint8_t{0});
    secret.clear();
}

SuiteRegistry& SuiteRegistry::instance() {
    static SuiteRegistry registry;
    return registry;
}

void SuiteRegistry::register_kem(std::shared_ptr<KemProvider> p) {
    std::lock_guard<std::mutex> lock(mu_);
    kems_[p->id()] = std::move(p);
}

void SuiteRegistry::register_sig(std::shared_ptr<SigProvider> p) {
    std::lock_guard<std::mutex> lock(mu_);
    sigs_[p->id()] = std::move(p);
}

void SuiteRegistry::register_aead(std::shared_ptr<AeadProvider> p) {
    std::lock_guard<std::mutex> lock(mu_);
    aeads_[p->id()] = std::move(p);
}

void SuiteRegistry::register_hash(std::string id, std::shared_ptr<HashProvider> p) {
    std::lock_guard<std::mutex> lock(mu_);
    hashes_[std::move(id)] = std::move(p);
}

namespace {
template <typename Map>
const auto& find_provider(const Map& map, const std::string& id,
                          std::string_view kind) {
    auto it = map.find(id);
    if (it == map.end())
        throw Error(ErrorCode::UnknownAlgorithm,
                    std::string(kind) + " provider not registered: " + id);
    return *it->second;
}
}  // namespace

const KemProvider& SuiteRegistry::kem(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return find_provider(kems_, id, "kem");
}

const SigProvider& SuiteRegistry::sig(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return find_provider(sigs_, id, "signature");
}

const AeadProvider& SuiteRegistry::aead(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return find_provider(aeads_, id, "aead");
}

const HashProvider& SuiteRegistry::hash(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return find_provider(hashes_, id, "hash");
}

Suite resolve_suite(const SuiteDescriptor& desc) {
    SuiteRegistry& r = SuiteRegistry::instance();
    return Suite{&r.kem(desc.kem_id), &r.sig(desc.sig_id), &r.aead(desc.aead_id),
                 &r.hash(desc.hash_id), desc};
}

}  // namespace qsc::crypto
