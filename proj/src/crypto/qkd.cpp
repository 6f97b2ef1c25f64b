#include "qsc/crypto/qkd.hpp"

#include "qsc/error.hpp"

namespace qsc::crypto {

QkdLinkModel::QkdLinkModel(std::uint64_t seed, double establishment_ms,
                           std::uint32_t key_bits, double key_rate_bps)
    : rng_(EntropyKind::QRNG_SIM, seed ^ 0x714b'6421'9e37'79b9ull),
      establishment_ms_(establishment_ms),
      key_bits_(key_bits),
      key_rate_bps_(key_rate_bps) {
    if (key_bits_ < KeyMaterial::kMinBytes * 8)
        throw Error(ErrorCode::ConfigError, "qkd key below minimum length");
    if (key_rate_bps_ <= 0.0)
        throw Error(ErrorCode::ConfigError, "qkd key rate must be positive");
}

void QkdLinkModel::set_link(const std::string& u, const std::string& v,
                            bool available) {
    std::lock_guard<std::mutex> lock(mu_);
    links_[{u, v}] = available;
}

void QkdLinkModel::set_link_bidirectional(const std::string& u,
                                          const std::string& v, bool available) {
    std::lock_guard<std::mutex> lock(mu_);
    links_[{u, v}] = available;
    links_[{v, u}] = available;
}

bool QkdLinkModel::available(const std::string& u, const std::string& v) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = links_.find({u, v});
    return it != links_.end() && it->second;
}

QkdOutcome QkdLinkModel::establish(const std::string& u, const std::string& v) {
    if (u == v)
        throw Error(ErrorCode::ConfigError, "qkd self-link is not a link");
    std::uint64_t sid;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = links_.find({u, v});
        if (it == links_.end() || !it->second) return QkdOutcome{};
        sid = ++session_counter_;
    }
    Bytes key = rng_.sample(key_bits_ / 8);
    QkdOutcome out;
    out.session_id = "qkd-" + std::to_string(sid);
    {
        std::lock_guard<std::mutex> lock(mu_);
        session_keys_[*out.session_id] = key;
    }
    out.key = KeyMaterial::make(std::move(key), KeyOrigin::QKD);
    out.latency_ms = establishment_latency_ms();
    return out;
}

std::optional<KeyMaterial> QkdLinkModel::session_key(
    const std::string& session_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = session_keys_.find(session_id);
    if (it == session_keys_.end()) return std::nullopt;
    return KeyMaterial::make(it->second, KeyOrigin::QKD);
}

double QkdLinkModel::establishment_latency_ms() const {
    return establishment_ms_ + (static_cast<double>(key_bits_) / key_rate_bps_) * 1000.0;
}

std::uint64_t QkdLinkModel::sessions_established() const {
    std::lock_guard<std::mutex> lock(mu_);
    return session_counter_;
}

}  // namespace qsc::crypto
