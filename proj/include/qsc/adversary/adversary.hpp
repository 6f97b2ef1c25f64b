#pragma once

// Adversarial campaign driver: floods a live session with tampered and
// replayed frames interleaved with honest traffic, then reports detection
// efficacy per attack kind and the classification each rejected frame
// received. Campaigns are fully seeded, so two runs with the same seed
// produce byte-identical reports.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qsc/wire/wire.hpp"

namespace qsc::adversary {

enum class AttackKind : std::uint8_t {
    TAMPER,  // single-bit corruption of a sealed frame in flight
    REPLAY,  // verbatim re-delivery of a previously accepted frame
};

constexpr std::string_view attack_kind_name(AttackKind k) {
    return k == AttackKind::TAMPER ? "TAMPER" : "REPLAY";
}

// One scheduled attack. `draw` is deterministic randomness spent on target
// selection (link direction, byte offset, bit index or pool index).
struct AttackVector {
    AttackKind kind = AttackKind::TAMPER;
    std::uint64_t draw = 0;

    bool operator==(const AttackVector&) const = default;
};

// Deterministic shuffled schedule of `tamper` + `replay` attack vectors.
std::vector<AttackVector> generate_vectors(std::uint64_t seed,
                                           std::uint64_t tamper,
                                           std::uint64_t replay);

// Byte offsets of msg.encode() that hold field content rather than a
// length prefix. Flipping any single bit at one of these offsets must make
// wire::open reject the frame; prefix bytes are excluded because corrupting
// framing lengths tests the parser, not the cryptographic checks.
std::vector<std::size_t> tamper_offsets(const wire::SecureMessage& msg);

struct CampaignReport {
    std::uint64_t seed = 0;
    std::uint64_t tamper_total = 0;
    std::uint64_t tamper_detected = 0;
    std::uint64_t replay_total = 0;
    std::uint64_t replay_detected = 0;
    std::uint64_t honest_total = 0;
    std::uint64_t false_positives = 0;   // honest frames rejected
    std::uint64_t security_failures = 0; // attack frames accepted
    // Rejection reason name -> count, e.g. "SignatureInvalid".
    std::map<std::string, std::uint64_t> classifications;

    // Detected attacks over attempted attacks; 1.0 for an empty campaign.
    double detection_rate() const;

    // metric,value rows; deterministic for a given seed (no wall time).
    std::string to_csv() const;
};

// Runs a full campaign against a freshly bootstrapped session (an
// orchestrator, a client and two agents). Honest traffic is interleaved
// one message per ten attacks, after a sixteen-message warmup that fills
// the replay pool.
CampaignReport run_campaign(std::uint64_t seed, std::uint64_t tamper,
                            std::uint64_t replay);

}  // namespace qsc::adversary
