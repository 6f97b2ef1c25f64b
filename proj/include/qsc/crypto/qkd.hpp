#pragma once

// Quantum key distribution link model. Availability is declared per ordered
// actor pair; establishment yields a fresh 128-bit key, a strictly
// increasing session id and a modeled latency of
// establishment_ms + key_bits / key_rate_bps * 1000 (accounting only, never
// a sleep).

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "qsc/crypto/provider.hpp"

namespace qsc::crypto {

struct QkdOutcome {
    std::optional<KeyMaterial> key;
    std::optional<std::string> session_id;
    double latency_ms = 0.0;

    bool established() const { return key.has_value(); }
};

class QkdLinkModel {
public:
    explicit QkdLinkModel(std::uint64_t seed, double establishment_ms = 10.0,
                          std::uint32_t key_bits = 128,
                          double key_rate_bps = 1'000'000.0);

    void set_link(const std::string& u, const std::string& v, bool available);
    void set_link_bidirectional(const std::string& u, const std::string& v,
                                bool available);
    bool available(const std::string& u, const std::string& v) const;

    // Returns an absent key (latency 0) when the link is not available;
    // self-links are a caller error.
    QkdOutcome establish(const std::string& u, const std::string& v);

    // Both endpoints of a quantum channel hold the established key; this
    // models the receiving side's copy.
    std::optional<KeyMaterial> session_key(const std::string& session_id) const;

    double establishment_latency_ms() const;
    std::uint64_t sessions_established() const;

private:
    EntropySource rng_;
    double establishment_ms_;
    std::uint32_t key_bits_;
    double key_rate_bps_;
    std::map<std::pair<std::string, std::string>, bool> links_;
    std::map<std::string, Bytes> session_keys_;
    std::uint64_t session_counter_ = 0;
    mutable std::mutex mu_;
};

}  // namespace qsc::crypto
