#include "qsc/adversary/adversary.hpp"

#include <sstream>
#include <utility>

#include "qsc/audit/ledger.hpp"
#include "qsc/crypto/entropy.hpp"
#include "qsc/crypto/provider.hpp"
#include "qsc/crypto/qkd.hpp"
#include "qsc/error.hpp"
#include "qsc/session/certs.hpp"
#include "qsc/session/session.hpp"

namespace qsc::adversary {

namespace {

std::uint64_t draw_u64(crypto::EntropySource& rng) {
    Bytes b = rng.sample(8);
    std::uint64_t x = 0;
    for (auto byte : b) x = (x << 8) | byte;
    return x;
}

}  // namespace

std::vector<AttackVector> generate_vectors(std::uint64_t seed,
                                           std::uint64_t tamper,
                                           std::uint64_t replay) {
    // Independent stream from the session entropy: the schedule must not
    // shift when the fixture consumes more or fewer nonces.
    crypto::EntropySource rng(crypto::EntropyKind::QRNG_SIM,
                              seed ^ 0xadbeefULL);
    rng.set_uniqueness_tracking(false);

    std::vector<AttackVector> vectors;
    vectors.reserve(tamper + replay);
    for (std::uint64_t i = 0; i < tamper; ++i) {
        vectors.push_back({AttackKind::TAMPER, draw_u64(rng)});
    }
    for (std::uint64_t i = 0; i < replay; ++i) {
        vectors.push_back({AttackKind::REPLAY, draw_u64(rng)});
    }
    // Fisher-Yates with the same deterministic stream.
    for (std::size_t i = vectors.size(); i > 1; --i) {
        std::swap(vectors[i - 1], vectors[draw_u64(rng) % i]);
    }
    return vectors;
}

std::vector<std::size_t> tamper_offsets(const wire::SecureMessage& msg) {
    std::vector<std::size_t> offsets;
    std::size_t pos = 0;
    auto field = [&](std::size_t n) {
        pos += 4;  // skip the length prefix
        for (std::size_t i = 0; i < n; ++i) offsets.push_back(pos++);
    };
    field(msg.sender.size());
    field(msg.receiver.size());
    field(msg.nonce.size());
    field(wire::kAadBytes);
    field(msg.ciphertext.size());
    field(msg.signature.size());
    return offsets;
}

double CampaignReport::detection_rate() const {
    std::uint64_t total = tamper_total + replay_total;
    if (total == 0) return 1.0;
    return static_cast<double>(tamper_detected + replay_detected) /
           static_cast<double>(total);
}

std::string CampaignReport::to_csv() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(3);
    out << "metric,value\n"
        << "seed," << seed << "\n"
        << "honest_total," << honest_total << "\n"
        << "false_positives," << false_positives << "\n"
        << "tamper_total," << tamper_total << "\n"
        << "tamper_detected," << tamper_detected << "\n"
        << "replay_total," << replay_total << "\n"
        << "replay_detected," << replay_detected << "\n"
        << "security_failures," << security_failures << "\n"
        << "detection_pct," << detection_rate() * 100.0 << "\n";
    for (const auto& [name, count] : classifications) {
        out << "class." << name << "," << count << "\n";
    }
    return out.str();
}

CampaignReport run_campaign(std::uint64_t seed, std::uint64_t tamper,
                            std::uint64_t replay) {
    namespace s = session;
    crypto::Suite suite =
        crypto::resolve_suite(crypto::register_simulation_suite());
    crypto::EntropySource entropy(crypto::EntropyKind::QRNG_SIM, seed);
    entropy.set_uniqueness_tracking(false);
    crypto::QkdLinkModel qkd(seed);
    s::CertificateAuthority ca(suite, entropy);
    audit::AuditLedger ledger(suite, ca.root_public());

    auto make_actor = [&](const std::string& id, s::ActorKind kind) {
        auto sig = suite.sig->keygen(entropy);
        auto kem = suite.kem->keygen(entropy);
        s::ActorRecord rec;
        rec.actor_id = id;
        rec.kind = kind;
        rec.region = "US";
        rec.cert = ca.issue(id, sig.public_key);
        rec.kem_public = kem.public_key;
        return std::pair{rec,
                         s::PrivateIdentity{sig.private_key, kem.private_key}};
    };
    auto [orch, orch_ident] = make_actor("orch", s::ActorKind::ORCHESTRATOR);
    s::SessionContext ctx(suite, s::SessionPolicy{}, entropy, qkd, ledger,
                          orch, orch_ident);
    for (auto [id, kind] :
         std::vector<std::pair<std::string, s::ActorKind>>{
             {"client", s::ActorKind::CLIENT},
             {"agent-a", s::ActorKind::AGENT},
             {"agent-b", s::ActorKind::AGENT}}) {
        auto [rec, ident] = make_actor(id, kind);
        ctx.bootstrap_actor(rec, ident);
    }

    const std::vector<std::pair<std::string, std::string>> dirs = {
        {"client", "orch"},  {"orch", "client"},  {"orch", "agent-a"},
        {"agent-a", "orch"}, {"orch", "agent-b"}, {"agent-b", "orch"}};
    const Bytes zero_task(wire::kTaskIdBytes, 0);

    wire::ReplayRegistry registry;
    std::vector<Bytes> delivered;  // accepted frames, the replay pool
    std::uint64_t ts = 0;
    std::size_t honest_i = 0;

    CampaignReport report;
    report.seed = seed;

    auto honest_message = [&]() {
        const auto& [u, v] = dirs[honest_i++ % dirs.size()];
        auto msg = wire::seal(ctx, u, v, wire::MsgKind::CONTROL, zero_task,
                              entropy.sample(64), ++ts);
        ++report.honest_total;
        try {
            (void)wire::open(ctx, registry, msg);
            delivered.push_back(msg.encode());
        } catch (const Error&) {
            ++report.false_positives;
        }
    };

    // Warmup fills the replay pool before the first REPLAY vector can fire.
    for (int i = 0; i < 16; ++i) honest_message();

    auto vectors = generate_vectors(seed, tamper, replay);
    std::size_t processed = 0;
    for (const auto& vec : vectors) {
        if (vec.kind == AttackKind::TAMPER) {
            // Stage a fresh frame in flight and corrupt one field bit.
            const auto& [u, v] = dirs[(vec.draw >> 48) % dirs.size()];
            auto msg = wire::seal(ctx, u, v, wire::MsgKind::CONTROL,
                                  zero_task, entropy.sample(64), ++ts);
            Bytes raw = msg.encode();
            auto offsets = tamper_offsets(msg);
            std::size_t off = offsets[vec.draw % offsets.size()];
            raw[off] ^= static_cast<std::uint8_t>(1u << ((vec.draw >> 32) & 7));
            ++report.tamper_total;
            try {
                (void)wire::open(ctx, registry,
                                 wire::SecureMessage::decode(raw));
                ++report.security_failures;
            } catch (const Error& e) {
                ++report.tamper_detected;
                ++report.classifications[std::string(e.name())];
            }
        } else {
            const Bytes& raw = delivered[vec.draw % delivered.size()];
            ++report.replay_total;
            try {
                (void)wire::open(ctx, registry,
                                 wire::SecureMessage::decode(raw));
                ++report.security_failures;
            } catch (const Error& e) {
                ++report.replay_detected;
                ++report.classifications[std::string(e.name())];
            }
        }
        if (++processed % 10 == 0) honest_message();
    }
    return report;
}

}  // namespace qsc::adversary
