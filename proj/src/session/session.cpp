#include "qsc/session/session.hpp"

#include "qsc/sha256.hpp"

namespace qsc::session {

ActorKind actor_kind_from_name(std::string_view name) {
    if (name == "CLIENT") return ActorKind::CLIENT;
    if (name == "ORCHESTRATOR") return ActorKind::ORCHESTRATOR;
    if (name == "AGENT") return ActorKind::AGENT;
    if (name == "TOOL") return ActorKind::TOOL;
    throw Error(ErrorCode::ConfigError,
                "unknown actor kind: " + std::string(name));
}

Bytes link_context_label(const std::string& u, const std::string& v,
                         const std::string& session_id, std::uint32_t epoch) {
    std::string label;
    label += kLinkLabelPrefix;
    label += '|';
    label += u;
    label += '|';
    label += v;
    label += '|';
    label += session_id;
    label += "|e";
    label += std::to_string(epoch);
    return to_bytes(label);
}

crypto::KeyMaterial derive_session_key(
    const std::optional<crypto::KeyMaterial>& k_qkd, ByteView k_pqc,
    ByteView r, ByteView context_label) {
    if (k_pqc.empty()) {
        throw Error(ErrorCode::EmptyInput, "session key requires a KEM secret");
    }
    if (r.empty()) {
        throw Error(ErrorCode::EmptyInput, "session key requires a fresh nonce");
    }
    ByteView qkd_segment;
    if (k_qkd.has_value()) {
        qkd_segment = ByteView(k_qkd->secret);
    }
    auto origin = k_qkd.has_value() ? crypto::KeyOrigin::HYBRID
                                    : crypto::KeyOrigin::PQC;
    return crypto::derive_key({qkd_segment, k_pqc, r}, context_label,
                              Sha256::kDigestSize, origin);
}

SessionContext::SessionContext(crypto::Suite suite, SessionPolicy policy,
                               crypto::EntropySource& entropy,
                               crypto::QkdLinkModel& qkd,
                               audit::AuditLedger& ledger,
                               const ActorRecord& orchestrator,
                               PrivateIdentity orchestrator_identity)
    : suite_(suite),
      policy_(std::move(policy)),
      entropy_(entropy),
      qkd_(qkd),
      ledger_(ledger),
      orchestrator_id_(orchestrator.actor_id) {
    policy_.weights.validate();
    policy_.matrix.validate();
    // No session exists yet, so an unverifiable orchestrator cannot be
    // recorded as a reject; it simply fails construction.
    if (!CertificateAuthority::verify_against(ledger_.root_ca_public(), suite_,
                                              orchestrator.cert) ||
        orchestrator.cert.subject != orchestrator.actor_id) {
        throw Error(ErrorCode::CertificateInvalid,
                    "orchestrator certificate rejected");
    }
    if (orchestrator.physical && !orchestrator.tee_valid) {
        throw Error(ErrorCode::TeeAttestationFailed,
                    "orchestrator attestation rejected");
    }
    roster_.emplace(orchestrator.actor_id, orchestrator);
    keystore_.emplace(orchestrator.actor_id, std::move(orchestrator_identity));

    auto nonce = entropy_.sample(32);
    nlohmann::json payload = {
        {"actor", orchestrator.actor_id},
        {"kind", std::string(actor_kind_name(orchestrator.kind))},
        {"qkd_status", std::string(audit::kQkdStatusPqcOnly)},
        {"qrng_nonce", to_hex(nonce)},
        {"session_id", "local"},
    };
    ledger_.append(orchestrator.actor_id, audit::kEvBootstrapInit,
                   to_bytes(std::string("local")), payload, false,
                   orchestrator.cert,
                   keystore_.at(orchestrator.actor_id).sig_private, entropy_);
}

void SessionContext::append_reject(const std::string& actor_id,
                                   std::string_view reason) {
    nlohmann::json payload = {
        {"actor", actor_id},
        {"reason", std::string(reason)},
    };
    const auto& orch_ident = keystore_.at(orchestrator_id_);
    ledger_.append(orchestrator_id_, audit::kEvBootstrapReject,
                   to_bytes(actor_id), payload, false,
                   roster_.at(orchestrator_id_).cert, orch_ident.sig_private,
                   entropy_);
}

void SessionContext::admit_checked(const ActorRecord& actor,
                                   PrivateIdentity identity) {
    if (actor.actor_id.empty()) {
        append_reject(actor.actor_id, "empty-actor-id");
        throw Error(ErrorCode::CertificateInvalid, "actor id must be non-empty");
    }
    if (roster_.count(actor.actor_id) != 0) {
        append_reject(actor.actor_id, "duplicate-actor");
        throw Error(ErrorCode::CertificateInvalid,
                    "actor already admitted: " + actor.actor_id);
    }
    if (!CertificateAuthority::verify_against(ledger_.root_ca_public(), suite_,
                                              actor.cert) ||
        actor.cert.subject != actor.actor_id) {
        append_reject(actor.actor_id, "certificate-invalid");
        throw Error(ErrorCode::CertificateInvalid,
                    "certificate rejected for " + actor.actor_id);
    }
    if (actor.physical && !actor.tee_valid) {
        append_reject(actor.actor_id, "tee-attestation-failed");
        throw Error(ErrorCode::TeeAttestationFailed,
                    "attestation rejected for " + actor.actor_id);
    }
    roster_.emplace(actor.actor_id, actor);
    keystore_.emplace(actor.actor_id, std::move(identity));
}

LinkState SessionContext::make_direction(
    const std::string& u, const std::string& v, policy::PostureTier tier,
    ByteView k_pqc, const std::optional<crypto::KeyMaterial>& k_qkd,
    const std::optional<std::string>& qkd_session_id,
    const std::string& session_id, std::uint32_t epoch) {
    LinkState st;
    st.u = u;
    st.v = v;
    st.tier = tier;
    st.k_pqc.assign(k_pqc.begin(), k_pqc.end());
    st.k_qkd = k_qkd;
    st.qkd_session_id = qkd_session_id;
    st.session_id = session_id;
    st.epoch = epoch;
    st.r = entropy_.sample(32);
    auto label = link_context_label(u, v, session_id, epoch);
    st.key = derive_session_key(st.k_qkd, st.k_pqc, st.r, label);
    return st;
}

std::string SessionContext::establish_link(const std::string& u,
                                           const std::string& v) {
    const auto& rec_u = actor(u);
    const auto& rec_v = actor(v);
    if (u == v) {
        throw Error(ErrorCode::ConfigError, "self-link refused: " + u);
    }

    bool qkd_capable = rec_u.capabilities.qkd_support &&
                       rec_v.capabilities.qkd_support && qkd_.available(u, v);
    auto tier = policy::select_posture(policy_.weights, policy_.scores,
                                       policy_.matrix, rec_u.region,
                                       rec_v.region, qkd_capable,
                                       policy_.min_tier);
    if (policy_.reject_degraded_qkd && tier != policy::PostureTier::QKD_PQC_QRNG &&
        rec_u.capabilities.qkd_support && rec_v.capabilities.qkd_support &&
        policy_.matrix.permitted(rec_u.region, rec_v.region,
                                 policy::PostureTier::QKD_PQC_QRNG) &&
        !qkd_.available(u, v)) {
        throw Error(ErrorCode::NoCompliantPosture,
                    "QKD posture required but link unavailable: " + u + "<->" + v);
    }

    // One KEM exchange per pair; the responder-side decapsulation is
    // exercised so a broken round trip cannot slip through the simulation.
    auto enc = suite_.kem->encapsulate(rec_v.kem_public, entropy_);
    auto responder_secret =
        suite_.kem->decapsulate(identity(v).kem_private, enc.ciphertext);
    if (responder_secret.secret != enc.shared_secret.secret) {
        throw Error(ErrorCode::DecapsulationFailure,
                    "KEM round trip mismatch on " + u + "<->" + v);
    }
    Bytes k_pqc = enc.shared_secret.secret;

    std::optional<crypto::KeyMaterial> k_qkd;
    std::optional<std::string> qkd_session_id;
    if (tier == policy::PostureTier::QKD_PQC_QRNG) {
        auto outcome = qkd_.establish(u, v);
        k_qkd = outcome.key;
        qkd_session_id = outcome.session_id;
    }

    std::string session_id = "sess-" + to_hex(entropy_.sample(8));
    links_.insert_or_assign({u, v},
                            make_direction(u, v, tier, k_pqc, k_qkd,
                                           qkd_session_id, session_id, 0));
    links_.insert_or_assign({v, u},
                            make_direction(v, u, tier, k_pqc, k_qkd,
                                           qkd_session_id, session_id, 0));
    return session_id;
}

void SessionContext::bootstrap_actor(const ActorRecord& actor,
                                     PrivateIdentity identity) {
    admit_checked(actor, std::move(identity));

    std::string session_id;
    try {
        session_id = establish_link(actor.actor_id, orchestrator_id_);
    } catch (const Error& e) {
        roster_.erase(actor.actor_id);
        keystore_.erase(actor.actor_id);
        append_reject(actor.actor_id, e.name());
        throw;
    }

    const auto& out = link(actor.actor_id, orchestrator_id_);
    bool qkd_active = out.k_qkd.has_value();
    nlohmann::json payload = {
        {"actor", actor.actor_id},
        {"kind", std::string(actor_kind_name(actor.kind))},
        {"qkd_status", std::string(qkd_active ? audit::kQkdStatusActive
                                              : audit::kQkdStatusPqcOnly)},
        {"qrng_nonce", to_hex(out.r)},
        {"session_id", session_id},
    };
    ledger_.append(actor.actor_id, audit::kEvBootstrapInit,
                   to_bytes(session_id), payload, qkd_active, actor.cert,
                   keystore_.at(actor.actor_id).sig_private, entropy_);
}

void SessionContext::rotate_key(const std::string& u, const std::string& v) {
    for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
        auto it = links_.find({a, b});
        if (it == links_.end()) {
            throw Error(ErrorCode::UnknownLink,
                        "no link " + a + "->" + b + " to rotate");
        }
        LinkState old = it->second;
        auto next = make_direction(a, b, old.tier, old.k_pqc, old.k_qkd,
                                   old.qkd_session_id, old.session_id,
                                   old.epoch + 1);
        nlohmann::json payload = {
            {"link", a + "->" + b},
            {"epoch", next.epoch},
            {"old_key", old.key.fingerprint()},
            {"new_key", next.key.fingerprint()},
        };
        ledger_.append(orchestrator_id_, audit::kEvKeyRotated,
                       to_bytes(old.session_id), payload,
                       next.k_qkd.has_value(), roster_.at(orchestrator_id_).cert,
                       keystore_.at(orchestrator_id_).sig_private, entropy_);
        it->second = std::move(next);
        old.retired = true;
        old.key.wipe();
        old.k_pqc.assign(old.k_pqc.size(), 0);
        if (old.k_qkd) old.k_qkd->wipe();
        retired_.push_back(std::move(old));
    }
}

const LinkState& SessionContext::link(const std::string& u,
                                      const std::string& v) const {
    auto it = links_.find({u, v});
    if (it == links_.end()) {
        throw Error(ErrorCode::UnknownLink, "no link " + u + "->" + v);
    }
    return it->second;
}

bool SessionContext::has_link(const std::string& u,
                              const std::string& v) const {
    return links_.count({u, v}) != 0;
}

const ActorRecord& SessionContext::actor(const std::string& actor_id) const {
    auto it = roster_.find(actor_id);
    if (it == roster_.end()) {
        throw Error(ErrorCode::ConfigError, "unknown actor: " + actor_id);
    }
    return it->second;
}

bool SessionContext::has_actor(const std::string& actor_id) const {
    return roster_.count(actor_id) != 0;
}

std::vector<const ActorRecord*> SessionContext::workers() const {
    std::vector<const ActorRecord*> out;
    for (const auto& [id, rec] : roster_) {
        if (rec.kind == ActorKind::AGENT || rec.kind == ActorKind::TOOL) {
            out.push_back(&rec);
        }
    }
    return out;
}

const PrivateIdentity& SessionContext::identity(
    const std::string& actor_id) const {
    auto it = keystore_.find(actor_id);
    if (it == keystore_.end()) {
        throw Error(ErrorCode::ConfigError, "unknown actor: " + actor_id);
    }
    return it->second;
}

std::size_t SessionContext::wipe_keys() {
    std::size_t wiped = 0;
    for (auto& [pair, st] : links_) {
        if (!st.key.secret.empty()) {
            st.key.wipe();
            st.k_pqc.assign(st.k_pqc.size(), 0);
            if (st.k_qkd) st.k_qkd->wipe();
            std::fill(st.r.begin(), st.r.end(), 0);
            st.retired = true;
            ++wiped;
        }
    }
    for (auto& st : retired_) {
        st.key.wipe();
    }
    // Signing identities stay intact: the audit trail must remain writable
    // after teardown (the no-op teardown record is itself signed).
    for (auto& [id, ident] : keystore_) {
        std::fill(ident.kem_private.begin(), ident.kem_private.end(), 0);
    }
    return wiped;
}

}  // namespace qsc::session
