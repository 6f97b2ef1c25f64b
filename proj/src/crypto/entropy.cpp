#include "qsc/crypto/entropy.hpp"

#include "qsc/error.hpp"
#include "qsc/sha256.hpp"

namespace qsc::crypto {

EntropySource::EntropySource(EntropyKind kind, std::uint64_t seed,
                             double nonce_latency_ms)
    : kind_(kind), nonce_latency_ms_(nonce_latency_ms) {
    Bytes seed_bytes;
    append_u64_be(seed_bytes, seed);
    std::string_view domain =
        kind == EntropyKind::QRNG_SIM ? "qsc.entropy.qrng" : "qsc.entropy.drbg";
    state_ = hash_segments({ByteView(seed_bytes), to_bytes(domain)});
}

Bytes EntropySource::next_block_locked() {
    Bytes ctr;
    append_u64_be(ctr, counter_++);
    return hash_segments({ByteView(state_), ByteView(ctr)});
}

Bytes EntropySource::sample(std::size_t n) {
    Bytes out;
    out.reserve(n);
    bool fire_alert = false;
    std::function<void(std::string_view)> sink;
    {
        std::lock_guard<std::mutex> lock(mu_);
        while (out.size() < n) {
            if (pending_.empty()) pending_ = next_block_locked();
            std::size_t take = std::min(pending_.size(), n - out.size());
            out.insert(out.end(), pending_.begin(), pending_.begin() + take);
            pending_.erase(pending_.begin(), pending_.begin() + take);
        }
        ++samples_;
        if (track_uniqueness_ && n > 0) {
            std::string key = to_hex(out);
            if (!seen_.insert(std::move(key)).second)
                throw Error(ErrorCode::InternalError, "entropy sample repeated");
        }
        // The alert sink typically appends an audit event, which draws
        // entropy for its identifiers; in_alert_ keeps that inner draw from
        // alerting again (and the sink runs outside the lock).
        if (degraded() && alert_sink_ && !in_alert_) {
            fire_alert = true;
            in_alert_ = true;
            sink = alert_sink_;
        }
    }
    if (fire_alert) {
        sink(kAlertDegradedEntropy);
        std::lock_guard<std::mutex> lock(mu_);
        in_alert_ = false;
    }
    return out;
}

std::uint64_t EntropySource::samples_drawn() const {
    std::lock_guard<std::mutex> lock(mu_);
    return samples_;
}

void EntropySource::set_alert_sink(std::function<void(std::string_view)> sink) {
    std::lock_guard<std::mutex> lock(mu_);
    alert_sink_ = std::move(sink);
}

void EntropySource::set_uniqueness_tracking(bool enabled) {
    std::lock_guard<std::mutex> lock(mu_);
    track_uniqueness_ = enabled;
    if (!enabled) seen_.clear();
}

}  // namespace qsc::crypto
