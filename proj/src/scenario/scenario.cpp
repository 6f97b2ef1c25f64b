#include "qsc/scenario/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string_view>

#include "qsc/crypto/provider.hpp"
#include "qsc/crypto/qkd.hpp"
#include "qsc/error.hpp"
#include "qsc/session/certs.hpp"
#include "qsc/taskgraph/taskgraph.hpp"

namespace qsc::scenario {

namespace {

void require_object(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigError, where + " must be a JSON object");
    }
}

void reject_unknown_keys(const nlohmann::json& obj,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (auto key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw Error(ErrorCode::ConfigError,
                        "unknown key '" + it.key() + "' in " + where);
        }
    }
}

std::string get_string(const nlohmann::json& obj, const char* key,
                       const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw Error(ErrorCode::ConfigError,
                    where + " requires string key '" + key + "'");
    }
    return obj[key].get<std::string>();
}

bool get_bool(const nlohmann::json& obj, const char* key, bool fallback,
              const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
        throw Error(ErrorCode::ConfigError,
                    where + " key '" + key + "' must be a boolean");
    }
    return obj[key].get<bool>();
}

double get_number(const nlohmann::json& obj, const char* key, double fallback,
                  const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        throw Error(ErrorCode::ConfigError,
                    where + " key '" + key + "' must be a number");
    }
    return obj[key].get<double>();
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open " + path);
    }
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(ErrorCode::ConfigError, path + " is not valid JSON");
    }
    return doc;
}

ScenarioActor parse_actor(const nlohmann::json& j, std::size_t index) {
    std::string where = "actors[" + std::to_string(index) + "]";
    require_object(j, where);
    reject_unknown_keys(j,
                        {"id", "kind", "region", "qkd_support", "physical",
                         "tee_valid", "skills"},
                        where);
    ScenarioActor actor;
    actor.id = get_string(j, "id", where);
    actor.kind = session::actor_kind_from_name(get_string(j, "kind", where));
    if (j.contains("region")) actor.region = get_string(j, "region", where);
    actor.qkd_support = get_bool(j, "qkd_support", false, where);
    actor.physical = get_bool(j, "physical", false, where);
    actor.tee_valid = get_bool(j, "tee_valid", false, where);
    if (j.contains("skills")) {
        if (!j["skills"].is_array()) {
            throw Error(ErrorCode::ConfigError,
                        where + " key 'skills' must be an array");
        }
        for (const auto& s : j["skills"]) {
            if (!s.is_string()) {
                throw Error(ErrorCode::ConfigError,
                            where + " skills must be strings");
            }
            actor.skills.push_back(s.get<std::string>());
        }
    }
    return actor;
}

void parse_policy(const nlohmann::json& j, session::SessionPolicy& policy) {
    require_object(j, "policy");
    reject_unknown_keys(
        j, {"weights", "scores", "min_tier", "reject_degraded_qkd"}, "policy");
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        require_object(w, "policy.weights");
        reject_unknown_keys(w, {"security", "latency", "cost"},
                            "policy.weights");
        policy.weights.security = get_number(w, "security",
                                             policy.weights.security,
                                             "policy.weights");
        policy.weights.latency =
            get_number(w, "latency", policy.weights.latency, "policy.weights");
        policy.weights.cost =
            get_number(w, "cost", policy.weights.cost, "policy.weights");
        policy.weights.validate();
    }
    if (j.contains("scores")) {
        const auto& s = j["scores"];
        require_object(s, "policy.scores");
        reject_unknown_keys(s, {"security", "latency_ms", "cost"},
                            "policy.scores");
        auto read_triplet = [&](const char* key, std::array<double, 3>& out) {
            if (!s.contains(key)) return;
            if (!s[key].is_array() || s[key].size() != 3) {
                throw Error(ErrorCode::ConfigError,
                            "policy.scores." + std::string(key) +
                                " must be an array of 3 numbers");
            }
            for (std::size_t i = 0; i < 3; ++i) out[i] = s[key][i].get<double>();
        };
        read_triplet("security", policy.scores.security);
        read_triplet("latency_ms", policy.scores.latency_ms);
        read_triplet("cost", policy.scores.cost);
    }
    if (j.contains("min_tier")) {
        policy.min_tier =
            policy::tier_from_name(get_string(j, "min_tier", "policy"));
    }
    policy.reject_degraded_qkd =
        get_bool(j, "reject_degraded_qkd", policy.reject_degraded_qkd,
                 "policy");
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& doc,
                             const std::string& base_dir) {
    require_object(doc, "scenario");
    reject_unknown_keys(doc,
                        {"seed", "entropy", "actors", "qkd_links", "policy",
                         "compliance_matrix", "request", "reducer", "ruleset",
                         "replicate_event_types"},
                        "scenario");
    Scenario sc;

    if (doc.contains("seed")) {
        const auto& seed = doc["seed"];
        bool non_negative_int =
            seed.is_number_unsigned() ||
            (seed.is_number_integer() && seed.get<std::int64_t>() >= 0);
        if (!non_negative_int) {
            throw Error(ErrorCode::ConfigError,
                        "scenario seed must be a non-negative integer");
        }
        sc.seed = seed.get<std::uint64_t>();
    }
    if (doc.contains("entropy")) {
        auto kind = get_string(doc, "entropy", "scenario");
        if (kind == "qrng") {
            sc.entropy = crypto::EntropyKind::QRNG_SIM;
        } else if (kind == "drbg") {
            sc.entropy = crypto::EntropyKind::DRBG_FALLBACK;
        } else {
            throw Error(ErrorCode::ConfigError,
                        "entropy must be 'qrng' or 'drbg', got '" + kind +
                            "'");
        }
    }

    if (!doc.contains("actors") || !doc["actors"].is_array() ||
        doc["actors"].empty()) {
        throw Error(ErrorCode::ConfigError,
                    "scenario requires a non-empty 'actors' array");
    }
    std::set<std::string> ids;
    std::size_t orchestrators = 0;
    std::size_t clients = 0;
    for (std::size_t i = 0; i < doc["actors"].size(); ++i) {
        auto actor = parse_actor(doc["actors"][i], i);
        if (!ids.insert(actor.id).second) {
            throw Error(ErrorCode::ConfigError,
                        "duplicate actor id '" + actor.id + "'");
        }
        orchestrators += actor.kind == session::ActorKind::ORCHESTRATOR;
        clients += actor.kind == session::ActorKind::CLIENT;
        sc.actors.push_back(std::move(actor));
    }
    if (orchestrators != 1) {
        throw Error(ErrorCode::ConfigError,
                    "scenario requires exactly one ORCHESTRATOR actor");
    }
    if (clients == 0) {
        throw Error(ErrorCode::ConfigError,
                    "scenario requires at least one CLIENT actor");
    }

    if (doc.contains("qkd_links")) {
        if (!doc["qkd_links"].is_array()) {
            throw Error(ErrorCode::ConfigError,
                        "qkd_links must be an array of [u, v] pairs");
        }
        for (const auto& link : doc["qkd_links"]) {
            if (!link.is_array() || link.size() != 2 ||
                !link[0].is_string() || !link[1].is_string()) {
                throw Error(ErrorCode::ConfigError,
                            "each qkd_links entry must be [\"u\", \"v\"]");
            }
            auto u = link[0].get<std::string>();
            auto v = link[1].get<std::string>();
            if (u == v || !ids.count(u) || !ids.count(v)) {
                throw Error(ErrorCode::ConfigError,
                            "qkd_links entry [" + u + ", " + v +
                                "] must name two distinct declared actors");
            }
            sc.qkd_links.emplace_back(std::move(u), std::move(v));
        }
    }

    if (doc.contains("policy")) parse_policy(doc["policy"], sc.policy);

    if (doc.contains("compliance_matrix")) {
        const auto& m = doc["compliance_matrix"];
        if (m.is_string() && m.get<std::string>() == "builtin") {
            // keep the default
        } else if (m.is_object()) {
            reject_unknown_keys(m, {"path"}, "compliance_matrix");
            auto path = resolve_path(get_string(m, "path", "compliance_matrix"),
                                     base_dir);
            sc.policy.matrix =
                policy::ComplianceMatrix::from_json(load_json_file(path));
        } else {
            throw Error(ErrorCode::ConfigError,
                        "compliance_matrix must be \"builtin\" or {\"path\": "
                        "...}");
        }
    }

    if (!doc.contains("request")) {
        throw Error(ErrorCode::ConfigError, "scenario requires 'request'");
    }
    const auto& req = doc["request"];
    require_object(req, "request");
    if (req.contains("path")) {
        reject_unknown_keys(req, {"path"}, "request");
        sc.request =
            load_json_file(resolve_path(get_string(req, "path", "request"),
                                        base_dir));
    } else {
        sc.request = req;
    }
    if (doc.contains("reducer")) {
        sc.request["reducer"] = get_string(doc, "reducer", "scenario");
    }
    // Fail on a malformed request at load time, not mid-run.
    (void)taskgraph::RequestDoc::parse_json(sc.request);

    if (doc.contains("ruleset")) {
        const auto& r = doc["ruleset"];
        require_object(r, "ruleset");
        reject_unknown_keys(r, {"forbid_cross_border_pii"}, "ruleset");
        sc.ruleset.forbid_cross_border_pii = get_bool(
            r, "forbid_cross_border_pii", sc.ruleset.forbid_cross_border_pii,
            "ruleset");
    }

    if (doc.contains("replicate_event_types")) {
        if (!doc["replicate_event_types"].is_array()) {
            throw Error(ErrorCode::ConfigError,
                        "replicate_event_types must be an array of strings");
        }
        for (const auto& t : doc["replicate_event_types"]) {
            if (!t.is_string()) {
                throw Error(ErrorCode::ConfigError,
                            "replicate_event_types must be strings");
            }
            sc.replicate_event_types.push_back(t.get<std::string>());
        }
    }
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    auto base = std::filesystem::path(path).parent_path().string();
    return from_json(load_json_file(path), base);
}

const ScenarioActor& Scenario::orchestrator() const {
    for (const auto& actor : actors) {
        if (actor.kind == session::ActorKind::ORCHESTRATOR) return actor;
    }
    throw Error(ErrorCode::InternalError, "scenario lost its orchestrator");
}

RunOutcome run_scenario(const Scenario& sc, const std::string& ledger_out) {
    namespace s = session;
    crypto::Suite suite =
        crypto::resolve_suite(crypto::register_simulation_suite());
    crypto::EntropySource entropy(sc.entropy, sc.seed);
    crypto::QkdLinkModel qkd(sc.seed);
    for (const auto& [u, v] : sc.qkd_links) {
        qkd.set_link_bidirectional(u, v, true);
    }
    s::CertificateAuthority ca(suite, entropy);
    audit::AuditLedger ledger(suite, ca.root_public());

    auto make_record = [&](const ScenarioActor& actor) {
        auto sig = suite.sig->keygen(entropy);
        auto kem = suite.kem->keygen(entropy);
        s::ActorRecord rec;
        rec.actor_id = actor.id;
        rec.kind = actor.kind;
        rec.region = actor.region;
        rec.cert = ca.issue(actor.id, sig.public_key);
        rec.kem_public = kem.public_key;
        rec.capabilities.qkd_support = actor.qkd_support;
        rec.physical = actor.physical;
        rec.tee_valid = actor.tee_valid;
        rec.skills = actor.skills;
        return std::pair{rec,
                         s::PrivateIdentity{sig.private_key, kem.private_key}};
    };

    auto [orch_rec, orch_ident] = make_record(sc.orchestrator());
    s::SessionContext ctx(suite, sc.policy, entropy, qkd, ledger, orch_rec,
                          orch_ident);
    for (const auto& actor : sc.actors) {
        if (actor.kind == s::ActorKind::ORCHESTRATOR) continue;
        auto [rec, ident] = make_record(actor);
        ctx.bootstrap_actor(rec, ident);
    }

    orchestrator::PipelineEnv env(ctx);
    env.ruleset = sc.ruleset;
    orchestrator::wire_entropy_alerts(env);

    auto doc = taskgraph::RequestDoc::parse_json(sc.request);
    auto result =
        orchestrator::handle_request(env, doc.client_id, sc.request.dump());

    RunOutcome outcome;
    outcome.response = std::string(result.client_response.begin(),
                                   result.client_response.end());
    outcome.graph_hash = result.graph.graph_hash;

    if (!sc.replicate_event_types.empty()) {
        auto site_kem = suite.kem->keygen(entropy);
        std::map<std::string, audit::ReplicaSite> sites;
        sites["replica-1"] =
            audit::ReplicaSite{"replica-1", site_kem.public_key, false};
        std::set<std::string> filter(sc.replicate_event_types.begin(),
                                     sc.replicate_event_types.end());
        const auto& orch_id = ctx.orchestrator_id();
        auto replication = audit::replicate(
            ledger, sites, "replica-1", orch_id, qkd, entropy,
            ctx.actor(orch_id).cert, ctx.identity(orch_id).sig_private,
            &filter);
        outcome.replica_records = replication.records.size();
        outcome.replication_degraded = replication.degraded_qkd;
    }

    orchestrator::teardown_session(env);

    outcome.event_counts = ledger.type_counts();
    outcome.ledger_records = ledger.size();
    outcome.ledger_ok = ledger.verify().ok;
    if (!ledger_out.empty()) ledger.save(ledger_out);
    return outcome;
}

}  // namespace qsc::scenario
