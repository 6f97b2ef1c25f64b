#pragma once

// Session layer: certificate-gated actor admission and per-directed-link
// hybrid key establishment. Every link key is derived from up to three
// constituents (QKD segment when the negotiated posture carries one, KEM
// shared secret, fresh QRNG nonce) with the link direction, session id and
// epoch bound through the derivation context label.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsc/audit/ledger.hpp"
#include "qsc/crypto/entropy.hpp"
#include "qsc/crypto/hkdf.hpp"
#include "qsc/crypto/provider.hpp"
#include "qsc/crypto/qkd.hpp"
#include "qsc/error.hpp"
#include "qsc/policy/policy.hpp"
#include "qsc/session/certs.hpp"

namespace qsc::session {

enum class ActorKind { CLIENT, ORCHESTRATOR, AGENT, TOOL };

constexpr std::string_view actor_kind_name(ActorKind k) {
    switch (k) {
        case ActorKind::CLIENT: return "CLIENT";
        case ActorKind::ORCHESTRATOR: return "ORCHESTRATOR";
        case ActorKind::AGENT: return "AGENT";
        case ActorKind::TOOL: return "TOOL";
    }
    return "AGENT";
}

ActorKind actor_kind_from_name(std::string_view name);

struct CapabilityMap {
    bool pqc_support = true;
    bool qkd_support = false;
    std::string sig_algo = "DILITHIUM3";
    std::string enc_algo = "KYBER768+AES256-GCM";
};

struct ActorRecord {
    std::string actor_id;
    ActorKind kind = ActorKind::AGENT;
    std::string region = "US";
    Certificate cert;
    Bytes kem_public;
    CapabilityMap capabilities;
    // Physical (embodied or tool) actors must present a valid TEE
    // attestation; purely logical actors may skip it.
    bool physical = false;
    bool tee_valid = false;
    std::vector<std::string> skills;
};

// Private half of an actor's credentials. The simulation runs every party
// in-process, so the context keeps a keystore; nothing here is ever
// serialized or logged.
struct PrivateIdentity {
    Bytes sig_private;
    Bytes kem_private;
};

// Directed link state: `key` seals frames travelling u -> v only.
struct LinkState {
    std::string u;
    std::string v;
    policy::PostureTier tier = policy::PostureTier::PQC;
    crypto::KeyMaterial key;
    Bytes k_pqc;
    std::optional<crypto::KeyMaterial> k_qkd;
    Bytes r;  // per-direction QRNG nonce
    std::string session_id;
    std::optional<std::string> qkd_session_id;
    std::uint32_t epoch = 0;
    bool retired = false;
};

inline constexpr std::string_view kLinkLabelPrefix = "QSC-link";

// Context label binding direction, session and epoch into the derivation.
Bytes link_context_label(const std::string& u, const std::string& v,
                         const std::string& session_id, std::uint32_t epoch);

// Unified link key: HKDF over the ordered constituents
// [k_qkd (empty when absent), k_pqc, r]. The KEM secret and the nonce are
// mandatory at this layer; EmptyInput if either is missing. Origin is
// HYBRID when a QKD segment participates, PQC otherwise.
crypto::KeyMaterial derive_session_key(
    const std::optional<crypto::KeyMaterial>& k_qkd, ByteView k_pqc,
    ByteView r, ByteView context_label);

struct SessionPolicy {
    policy::PolicyWeights weights;
    policy::LinkScoreTable scores;
    policy::ComplianceMatrix matrix = policy::ComplianceMatrix::builtin_default();
    policy::PostureTier min_tier = policy::PostureTier::PQC;
    // When a pair could run the QKD posture but the physical link is down,
    // reject the bootstrap instead of degrading silently.
    bool reject_degraded_qkd = false;
};

// Roster plus directed link table for one orchestration session. The
// orchestrator is admitted by the constructor and acts as the hub: every
// later bootstrap establishes the actor<->orchestrator link pair.
class SessionContext {
public:
    SessionContext(crypto::Suite suite, SessionPolicy policy,
                   crypto::EntropySource& entropy, crypto::QkdLinkModel& qkd,
                   audit::AuditLedger& ledger, const ActorRecord& orchestrator,
                   PrivateIdentity orchestrator_identity);

    // Admits an actor: certificate check, TEE attestation for physical
    // actors, posture selection, dual-direction key establishment with the
    // orchestrator, then a BOOTSTRAP_INIT record signed by the actor.
    // Failures append BOOTSTRAP_REJECT (signed by the orchestrator) before
    // throwing.
    void bootstrap_actor(const ActorRecord& actor, PrivateIdentity identity);

    // Establishes fresh directed links u->v and v->u and returns the shared
    // session id. Both actors must already be admitted.
    std::string establish_link(const std::string& u, const std::string& v);

    // Re-derives both directed keys of the pair from a fresh nonce at the
    // next epoch; the old states are retired and their keys wiped. Appends
    // one KEY_ROTATED record per direction.
    void rotate_key(const std::string& u, const std::string& v);

    const LinkState& link(const std::string& u, const std::string& v) const;
    bool has_link(const std::string& u, const std::string& v) const;

    const ActorRecord& actor(const std::string& actor_id) const;
    bool has_actor(const std::string& actor_id) const;
    const PrivateIdentity& identity(const std::string& actor_id) const;

    // Assignable workers (AGENT and TOOL actors) in id order. Pointers stay
    // valid while the context lives.
    std::vector<const ActorRecord*> workers() const;

    // Wipes every live and retired link key plus all keystore secrets.
    // Returns the number of keys destroyed. Idempotent.
    std::size_t wipe_keys();

    const std::string& orchestrator_id() const { return orchestrator_id_; }
    const crypto::Suite& suite() const { return suite_; }
    const SessionPolicy& policy() const { return policy_; }
    audit::AuditLedger& ledger() { return ledger_; }
    crypto::EntropySource& entropy() { return entropy_; }
    crypto::QkdLinkModel& qkd() { return qkd_; }
    const std::vector<LinkState>& retired_links() const { return retired_; }
    std::size_t live_link_count() const { return links_.size(); }

private:
    void admit_checked(const ActorRecord& actor, PrivateIdentity identity);
    void append_reject(const std::string& actor_id, std::string_view reason);
    LinkState make_direction(const std::string& u, const std::string& v,
                             policy::PostureTier tier, ByteView k_pqc,
                             const std::optional<crypto::KeyMaterial>& k_qkd,
                             const std::optional<std::string>& qkd_session_id,
                             const std::string& session_id,
                             std::uint32_t epoch);

    crypto::Suite suite_;
    SessionPolicy policy_;
    crypto::EntropySource& entropy_;
    crypto::QkdLinkModel& qkd_;
    audit::AuditLedger& ledger_;
    std::string orchestrator_id_;
    std::map<std::string, ActorRecord> roster_;
    std::map<std::string, PrivateIdentity> keystore_;
    std::map<std::pair<std::string, std::string>, LinkState> links_;
    std::vector<LinkState> retired_;
};

}  // namespace qsc::session
