#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "qsc/scenario/scenario.hpp"
#include "test_util.hpp"

using namespace qsc;
using scenario::RunOutcome;
using scenario::Scenario;

namespace {

std::string data_path(const std::string& name) {
    return std::string(QSC_SOURCE_DIR) + "/data/" + name;
}

nlohmann::json minimal_doc() {
    return nlohmann::json::parse(R"({
      "actors": [
        {"id": "orch", "kind": "ORCHESTRATOR"},
        {"id": "client-1", "kind": "CLIENT"},
        {"id": "agent-a", "kind": "AGENT"}
      ],
      "request": {
        "request_id": "req-1",
        "client": "client-1",
        "reducer": "concat",
        "subtasks": [
          {"name": "t1", "op": "echo", "params": {"text": "hi"}}
        ]
      }
    })");
}

Bytes slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return Bytes(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("scenario parsing applies defaults and reads every field") {
    auto doc = minimal_doc();
    auto sc = Scenario::from_json(doc, "");
    CHECK(sc.seed == 7);
    CHECK(sc.entropy == crypto::EntropyKind::QRNG_SIM);
    CHECK(sc.actors.size() == 3);
    CHECK(sc.orchestrator().id == "orch");
    CHECK(sc.qkd_links.empty());
    CHECK(sc.policy.min_tier == policy::PostureTier::PQC);
    CHECK(sc.ruleset.forbid_cross_border_pii);
    CHECK(sc.replicate_event_types.empty());

    doc["seed"] = 99;
    doc["entropy"] = "drbg";
    doc["qkd_links"] =
        nlohmann::json::array({nlohmann::json::array({"orch", "agent-a"})});
    doc["policy"] = {{"weights",
                      {{"security", 1.0}, {"latency", 0.01}, {"cost", 0.01}}},
                     {"min_tier", "PQC_QRNG"},
                     {"reject_degraded_qkd", true}};
    doc["reducer"] = "sum";
    doc["ruleset"] = {{"forbid_cross_border_pii", false}};
    doc["replicate_event_types"] = {"FINAL_RESPONSE_SENT"};
    doc["actors"][2]["qkd_support"] = true;
    doc["actors"][2]["skills"] = {"echo", "sum"};

    auto full = Scenario::from_json(doc, "");
    CHECK(full.seed == 99);
    CHECK(full.entropy == crypto::EntropyKind::DRBG_FALLBACK);
    CHECK(full.qkd_links ==
          std::vector<std::pair<std::string, std::string>>{
              {"orch", "agent-a"}});
    CHECK(full.policy.weights.latency == doctest::Approx(0.01));
    CHECK(full.policy.min_tier == policy::PostureTier::PQC_QRNG);
    CHECK(full.policy.reject_degraded_qkd);
    CHECK(full.request["reducer"] == "sum");  // scenario-level override
    CHECK_FALSE(full.ruleset.forbid_cross_border_pii);
    CHECK(full.replicate_event_types ==
          std::vector<std::string>{"FINAL_RESPONSE_SENT"});
    CHECK(full.actors[2].skills == std::vector<std::string>{"echo", "sum"});
}

TEST_CASE("scenario parsing rejects schema violations") {
    auto throws_config = [](nlohmann::json doc) {
        try {
            (void)Scenario::from_json(doc, "");
            FAIL_CHECK("expected ConfigError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigError);
        }
    };

    auto doc = minimal_doc();
    doc["typo_key"] = 1;
    throws_config(doc);

    doc = minimal_doc();
    doc["actors"][0]["colour"] = "red";
    throws_config(doc);

    doc = minimal_doc();
    doc["actors"][2]["kind"] = "ORCHESTRATOR";  // two orchestrators
    throws_config(doc);

    doc = minimal_doc();
    doc["actors"][1]["kind"] = "AGENT";  // no client left
    throws_config(doc);

    doc = minimal_doc();
    doc["actors"][2]["id"] = "orch";  // duplicate id
    throws_config(doc);

    doc = minimal_doc();
    doc["qkd_links"] =
        nlohmann::json::array({nlohmann::json::array({"orch", "ghost"})});
    throws_config(doc);

    doc = minimal_doc();
    doc["entropy"] = "dilithium-crystal";
    throws_config(doc);

    doc = minimal_doc();
    doc["policy"] = {{"min_tier", "QKD"}};  // not a tier name
    throws_config(doc);

    doc = minimal_doc();
    doc["seed"] = -3;
    throws_config(doc);

    doc = minimal_doc();
    doc.erase("request");
    throws_config(doc);

    // A structurally valid scenario carrying a bad request document fails
    // as a malformed request, at load time.
    doc = minimal_doc();
    doc["request"] = {{"request_id", "r"}, {"client", "client-1"}};
    try {
        (void)Scenario::from_json(doc, "");
        FAIL_CHECK("expected MalformedRequest");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedRequest);
    }
}

TEST_CASE("path references resolve against the scenario directory") {
    auto doc = minimal_doc();
    doc["request"] = {{"path", "request_basic.json"}};
    doc["compliance_matrix"] = {{"path", "compliance_matrix.json"}};
    auto sc = Scenario::from_json(doc, std::string(QSC_SOURCE_DIR) + "/data");
    CHECK(sc.request["request_id"] == "req-1");
    CHECK(sc.request["subtasks"].size() == 3);
    CHECK(sc.policy.matrix.to_json() ==
          policy::ComplianceMatrix::builtin_default().to_json());

    doc["request"] = {{"path", "no-such-file.json"}};
    CHECK_THROWS_AS((void)Scenario::from_json(
                        doc, std::string(QSC_SOURCE_DIR) + "/data"),
                    Error);
}

TEST_CASE("shipped scenario fixtures load") {
    auto basic = Scenario::load(data_path("scenario_basic.json"));
    CHECK(basic.seed == 7);
    CHECK(basic.actors.size() == 4);
    CHECK(basic.request["request_id"] == "req-1");

    // The veto fixture parses fine; it fails at run time, by design.
    auto veto = Scenario::load(data_path("scenario_policy_veto.json"));
    CHECK(veto.policy.min_tier == policy::PostureTier::QKD_PQC_QRNG);
    CHECK(veto.qkd_links.size() == 2);

    auto matrix_doc = nlohmann::json::parse(
        std::ifstream(data_path("compliance_matrix.json")));
    CHECK(policy::ComplianceMatrix::from_json(matrix_doc).to_json() ==
          policy::ComplianceMatrix::builtin_default().to_json());
}

TEST_CASE("running the basic scenario yields the canonical event trace") {
    auto sc = Scenario::load(data_path("scenario_basic.json"));
    auto outcome = scenario::run_scenario(sc);
    CHECK(outcome.ledger_ok);
    CHECK(outcome.ledger_records == 11);
    CHECK(outcome.response.find("hello+WORLD") != std::string::npos);
    CHECK(outcome.graph_hash.size() == 64);

    std::map<std::string, std::size_t> expected = {
        {"BOOTSTRAP_INIT", 4},          {"TASK_GRAPH_CREATED", 1},
        {"AGENT_EXECUTION_COMPLETED", 3}, {"MERGE_REASONING_COMPLETED", 1},
        {"FINAL_RESPONSE_SENT", 1},     {"SESSION_TEARDOWN", 1},
    };
    CHECK(outcome.event_counts == expected);
}

TEST_CASE("scenario runs are reproducible down to the ledger bytes") {
    auto tmp = std::filesystem::temp_directory_path();
    auto file_a = (tmp / "qsc_scenario_ledger_a.bin").string();
    auto file_b = (tmp / "qsc_scenario_ledger_b.bin").string();

    auto sc = Scenario::load(data_path("scenario_basic.json"));
    auto a = scenario::run_scenario(sc, file_a);
    auto b = scenario::run_scenario(sc, file_b);
    CHECK(a.response == b.response);
    CHECK(a.graph_hash == b.graph_hash);
    CHECK(slurp(file_a) == slurp(file_b));

    // A different seed moves the nonces but not the semantics.
    sc.seed = 8;
    auto c = scenario::run_scenario(sc);
    CHECK(c.ledger_ok);
    CHECK(c.response.find("hello+WORLD") != std::string::npos);
    CHECK(c.graph_hash == a.graph_hash);  // structural hash is seed-free

    std::filesystem::remove(file_a);
    std::filesystem::remove(file_b);
}

TEST_CASE("replication filters copy the selected event types off-site") {
    auto doc = nlohmann::json::parse(
        std::ifstream(data_path("scenario_basic.json")));
    doc["replicate_event_types"] = {"FINAL_RESPONSE_SENT",
                                    "TASK_GRAPH_CREATED"};
    auto sc = Scenario::from_json(doc, std::string(QSC_SOURCE_DIR) + "/data");
    auto outcome = scenario::run_scenario(sc);
    CHECK(outcome.replica_records == 2);
    CHECK_FALSE(outcome.replication_degraded);
    CHECK(outcome.ledger_ok);
    CHECK(outcome.ledger_records == 11);  // clean PQC path, no alerts
}

TEST_CASE("the veto scenario is rejected by posture policy at bootstrap") {
    auto sc = Scenario::load(data_path("scenario_policy_veto.json"));
    try {
        (void)scenario::run_scenario(sc);
        FAIL("expected NoCompliantPosture");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCompliantPosture);
    }
}
