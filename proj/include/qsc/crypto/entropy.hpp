#pragma once

// Seeded entropy source with two personalities: a simulated quantum RNG and
// a classical DRBG fallback. Both are deterministic under a fixed seed so
// whole runs replay byte-for-byte. The fallback personality marks itself
// degraded and raises a DEGRADED_ENTROPY alert on every sample.

#include <cstdint>
#include <functional>
#include <mutex>
#include <string_view>
#include <unordered_set>

#include "qsc/bytes.hpp"

namespace qsc::crypto {

enum class EntropyKind { QRNG_SIM, DRBG_FALLBACK };

constexpr std::string_view kAlertDegradedEntropy = "DEGRADED_ENTROPY";

class EntropySource {
public:
    // nonce_latency_ms models the per-request latency of the hardware QRNG
    // interface; it is accounting data, never an actual sleep.
    explicit EntropySource(EntropyKind kind, std::uint64_t seed,
                           double nonce_latency_ms = 1.157);

    // Draws n fresh bytes. Thread-safe; successive samples never repeat
    // (enforced by an internal uniqueness registry at desk scale).
    Bytes sample(std::size_t n);

    EntropyKind kind() const { return kind_; }
    bool degraded() const { return kind_ == EntropyKind::DRBG_FALLBACK; }
    double nonce_latency_ms() const { return nonce_latency_ms_; }
    std::uint64_t samples_drawn() const;

    // Receives one alert string per degraded sample (wired to the audit
    // ledger by the orchestrator; tests capture it directly).
    void set_alert_sink(std::function<void(std::string_view)> sink);

    // The registry is on by default; campaigns that draw very large volumes
    // may turn it off to bound memory.
    void set_uniqueness_tracking(bool enabled);

private:
    Bytes next_block_locked();

    EntropyKind kind_;
    double nonce_latency_ms_;
    Bytes state_;
    std::uint64_t counter_ = 0;
    std::uint64_t samples_ = 0;
    Bytes pending_;
    bool track_uniqueness_ = true;
    bool in_alert_ = false;
    std::unordered_set<std::string> seen_;
    std::function<void(std::string_view)> alert_sink_;
    mutable std::mutex mu_;
};

}  // namespace qsc::crypto
