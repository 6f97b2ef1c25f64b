#pragma once

// Shared fixtures for the unit suite.

#include <string>
#include <utility>

#include "qsc/audit/ledger.hpp"
#include "qsc/crypto/entropy.hpp"
#include "qsc/crypto/provider.hpp"
#include "qsc/crypto/qkd.hpp"
#include "qsc/session/certs.hpp"
#include "qsc/session/session.hpp"

namespace qsc_test {

struct Identity {
    qsc::session::Certificate cert;
    qsc::Bytes sig_private;
};

inline qsc::crypto::Suite sim_suite() {
    return qsc::crypto::resolve_suite(qsc::crypto::register_simulation_suite());
}

inline Identity make_identity(const qsc::crypto::Suite& suite,
                              const qsc::session::CertificateAuthority& ca,
                              qsc::crypto::EntropySource& entropy,
                              const std::string& name) {
    qsc::crypto::SigKeyPair kp = suite.sig->keygen(entropy);
    return {ca.issue(name, kp.public_key), kp.private_key};
}

// A full single-seed environment: suite, entropy, QKD model, root
// authority and ledger, plus an actor factory.
struct World {
    qsc::crypto::Suite suite = sim_suite();
    qsc::crypto::EntropySource entropy;
    qsc::crypto::QkdLinkModel qkd;
    qsc::session::CertificateAuthority ca;
    qsc::audit::AuditLedger ledger;

    explicit World(std::uint64_t seed = 7,
                   qsc::crypto::EntropyKind kind =
                       qsc::crypto::EntropyKind::QRNG_SIM)
        : entropy(kind, seed),
          qkd(seed),
          ca(suite, entropy),
          ledger(suite, ca.root_public()) {}

    std::pair<qsc::session::ActorRecord, qsc::session::PrivateIdentity>
    make_actor(const std::string& id, qsc::session::ActorKind kind,
               const std::string& region, bool qkd_support = false,
               bool physical = false, bool tee_valid = false) {
        auto sig = suite.sig->keygen(entropy);
        auto kem = suite.kem->keygen(entropy);
        qsc::session::ActorRecord rec;
        rec.actor_id = id;
        rec.kind = kind;
        rec.region = region;
        rec.cert = ca.issue(id, sig.public_key);
        rec.kem_public = kem.public_key;
        rec.capabilities.qkd_support = qkd_support;
        rec.physical = physical;
        rec.tee_valid = tee_valid;
        return {rec, qsc::session::PrivateIdentity{sig.private_key,
                                                   kem.private_key}};
    }
};

// Weights that put the selection optimum on the strongest compliant tier.
inline qsc::session::SessionPolicy security_first_policy() {
    qsc::session::SessionPolicy p;
    p.weights.latency = 0.01;
    p.weights.cost = 0.01;
    return p;
}

inline std::size_t count_events(const qsc::audit::AuditLedger& ledger,
                                std::string_view type) {
    std::size_t n = 0;
    for (const auto& rec : ledger.records()) {
        if (rec.event_type == type) ++n;
    }
    return n;
}

// Canonical three-task request: two independent leaves and a fan-in concat.
inline constexpr const char* kBasicRequestText = R"({
  "request_id": "req-1",
  "client": "client-1",
  "reducer": "concat",
  "subtasks": [
    {"name": "t1", "op": "echo", "params": {"text": "hello"}},
    {"name": "t2", "op": "upper", "params": {"text": "world"}},
    {"name": "t3", "op": "concat", "inputs": ["t1", "t2"]}
  ]
})";

}  // namespace qsc_test
