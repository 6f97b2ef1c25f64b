#pragma once

// Scenario files: one strict JSON document describing a full run (seed,
// entropy personality, actor roster, QKD fiber plan, policy, request and
// audit replication). Unknown keys are configuration errors, so a typo
// fails loudly instead of silently running a different experiment.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qsc/crypto/entropy.hpp"
#include "qsc/orchestrator/orchestrator.hpp"
#include "qsc/session/session.hpp"

namespace qsc::scenario {

struct ScenarioActor {
    std::string id;
    session::ActorKind kind = session::ActorKind::AGENT;
    std::string region = "US";
    bool qkd_support = false;
    bool physical = false;
    bool tee_valid = false;
    std::vector<std::string> skills;
};

struct Scenario {
    std::uint64_t seed = 7;
    crypto::EntropyKind entropy = crypto::EntropyKind::QRNG_SIM;
    std::vector<ScenarioActor> actors;  // exactly one orchestrator
    // Actor pairs with a working QKD fiber (made available both ways).
    std::vector<std::pair<std::string, std::string>> qkd_links;
    session::SessionPolicy policy;
    nlohmann::json request;  // the client request document
    orchestrator::Ruleset ruleset;
    // Event types to replicate off-site after the run; empty disables
    // replication.
    std::vector<std::string> replicate_event_types;

    // base_dir resolves relative "path" references (compliance matrix,
    // request document). Raises ConfigError on any violation.
    static Scenario from_json(const nlohmann::json& doc,
                              const std::string& base_dir);
    static Scenario load(const std::string& path);

    const ScenarioActor& orchestrator() const;
};

struct RunOutcome {
    std::string response;  // final client response document (JSON text)
    std::string graph_hash;
    std::map<std::string, std::size_t> event_counts;
    std::size_t ledger_records = 0;
    bool ledger_ok = false;
    std::size_t replica_records = 0;
    bool replication_degraded = false;
};

// Executes the scenario end to end: bootstrap every actor, run the request
// through the pipeline, replicate the selected event types, tear the
// session down and verify the ledger. When ledger_out is non-empty the
// sealed ledger is saved there.
RunOutcome run_scenario(const Scenario& sc, const std::string& ledger_out = "");

}  // namespace qsc::scenario
