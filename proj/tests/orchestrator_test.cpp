#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <unistd.h>
#include <vector>

#include "doctest.h"

#include "qsc/error.hpp"
#include "qsc/orchestrator/orchestrator.hpp"
#include "test_util.hpp"

using namespace qsc;
using namespace qsc::orchestrator;
using qsc_test::World;
using qsc_test::count_events;
using session::ActorKind;
using session::SessionContext;
using session::SessionPolicy;

namespace {

struct Pipe {
    World w;
    SessionContext ctx;
    PipelineEnv env;

    explicit Pipe(std::uint64_t seed = 21,
                  const std::string& client_region = "US",
                  crypto::EntropyKind kind = crypto::EntropyKind::QRNG_SIM)
        : w(seed, kind), ctx(make_ctx(w)), env(ctx) {
        auto [client, cid] =
            w.make_actor("client-1", ActorKind::CLIENT, client_region);
        ctx.bootstrap_actor(client, cid);
        for (const auto& id : {"agent-a", "agent-b"}) {
            auto [rec, ident] = w.make_actor(id, ActorKind::AGENT, "US");
            ctx.bootstrap_actor(rec, ident);
        }
    }

    static SessionContext make_ctx(World& w) {
        auto [orch, orch_id] =
            w.make_actor("orch", ActorKind::ORCHESTRATOR, "US");
        return SessionContext(w.suite, SessionPolicy{}, w.entropy, w.qkd,
                              w.ledger, orch, orch_id);
    }
};

std::map<std::string, std::size_t> event_multiset(
    const audit::AuditLedger& ledger) {
    std::map<std::string, std::size_t> counts;
    for (const auto& rec : ledger.records()) ++counts[rec.event_type];
    return counts;
}

std::size_t first_index_of(const audit::AuditLedger& ledger,
                           std::string_view type) {
    const auto& recs = ledger.records();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].event_type == type) return i;
    }
    return recs.size();
}

taskgraph::TaskNode node_with_params(const nlohmann::json& params) {
    taskgraph::TaskNode n;
    n.name = "n";
    n.op = "x";
    n.params = params;
    return n;
}

}  // namespace

TEST_CASE("default handlers compute the documented operations") {
    auto handlers = default_handlers();
    std::vector<Bytes> no_deps;

    CHECK(to_string(handlers["echo"](
              node_with_params({{"text", "hi"}}), no_deps)) == "hi");
    CHECK_THROWS_AS(
        (void)handlers["echo"](node_with_params({{"x", 1}}), no_deps), Error);

    CHECK(to_string(handlers["upper"](
              node_with_params({{"text", "MiXed 42!"}}), no_deps)) ==
          "MIXED 42!");
    CHECK(to_string(handlers["upper"](
              node_with_params(nlohmann::json::object()),
              {to_bytes(std::string("ab")), to_bytes(std::string("cd"))})) ==
          "ABCD");

    CHECK(to_string(handlers["concat"](
              node_with_params(nlohmann::json::object()),
              {to_bytes(std::string("x")), to_bytes(std::string("y"))})) ==
          "x+y");
    CHECK(to_string(handlers["concat"](
              node_with_params({{"sep", "/"}}),
              {to_bytes(std::string("x")), to_bytes(std::string("y"))})) ==
          "x/y");

    CHECK(to_string(handlers["sum"](
              node_with_params({{"value", 5}}),
              {to_bytes(std::string("10")), to_bytes(std::string("-3"))})) ==
          "12");
    CHECK_THROWS_AS((void)handlers["sum"](
                        node_with_params(nlohmann::json::object()),
                        {to_bytes(std::string("ten"))}),
                    Error);

    try {
        (void)handlers["fail"](node_with_params(nlohmann::json::object()),
                               no_deps);
        FAIL("fail handler returned");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HandlerFailure);
    }
}

TEST_CASE("provenance canonical form separates every field") {
    ProvenanceRecord a;
    a.task_name = "t";
    a.task_id_hex = "00";
    a.request_id = "r";
    a.agent_id = "g";
    a.logical_time = 1;
    a.nonce = Bytes(24, 0x01);

    auto base = a.canonical();
    auto b = a;
    b.task_name = "u";
    CHECK(base != b.canonical());
    b = a;
    b.logical_time = 2;
    CHECK(base != b.canonical());
    b = a;
    b.qkd_session_id = "qkd-1";
    CHECK(base != b.canonical());
    b = a;
    b.nonce[0] ^= 1;
    CHECK(base != b.canonical());
}

TEST_CASE("clean three-task run produces the exact event multiset in order") {
    Pipe p;
    auto result = handle_request(p.env, "client-1",
                                 qsc_test::kBasicRequestText);
    CHECK(teardown_session(p.env));

    CHECK(to_string(result.merged.result) == "hello+WORLD");
    auto response = nlohmann::json::parse(to_string(result.client_response));
    CHECK(response.at("result") == "hello+WORLD");
    CHECK(response.at("provenance_hash") == result.merged.provenance_hash);

    std::map<std::string, std::size_t> expected = {
        {"BOOTSTRAP_INIT", 4},
        {"TASK_GRAPH_CREATED", 1},
        {"AGENT_EXECUTION_COMPLETED", 3},
        {"MERGE_REASONING_COMPLETED", 1},
        {"FINAL_RESPONSE_SENT", 1},
        {"SESSION_TEARDOWN", 1},
    };
    CHECK(event_multiset(p.w.ledger) == expected);
    CHECK(p.w.ledger.size() == 11);

    // Causal order: graph creation precedes every execution, which precede
    // merge, response and teardown.
    auto graph_at = first_index_of(p.w.ledger, audit::kEvTaskGraphCreated);
    auto merge_at =
        first_index_of(p.w.ledger, audit::kEvMergeReasoningCompleted);
    auto response_at = first_index_of(p.w.ledger, audit::kEvFinalResponseSent);
    auto teardown_at = first_index_of(p.w.ledger, audit::kEvSessionTeardown);
    std::vector<std::size_t> exec_at;
    const auto& recs = p.w.ledger.records();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].event_type == audit::kEvAgentExecutionCompleted) {
            exec_at.push_back(i);
        }
    }
    REQUIRE(exec_at.size() == 3);
    CHECK(graph_at < exec_at.front());
    CHECK(exec_at.back() < merge_at);
    CHECK(merge_at < response_at);
    CHECK(response_at < teardown_at);

    // Logical time is strictly monotone over the ledger.
    for (std::size_t i = 1; i < recs.size(); ++i) {
        CHECK(recs[i].logical_time > recs[i - 1].logical_time);
    }
    // The fan-in task completed last of the three.
    CHECK(recs[exec_at.back()].payload_json().at("task") == "t3");

    CHECK(p.w.ledger.verify().ok);
}

TEST_CASE("seeded runs write byte-identical ledgers") {
    auto run_to_file = [](std::uint64_t seed, const std::string& path) {
        Pipe p(seed);
        (void)handle_request(p.env, "client-1", qsc_test::kBasicRequestText);
        (void)teardown_session(p.env);
        p.w.ledger.save(path);
    };
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    auto base = "/tmp/qsc_orch_" + std::to_string(getpid());
    run_to_file(77, base + "_a.bin");
    run_to_file(77, base + "_b.bin");
    run_to_file(78, base + "_c.bin");
    auto a = slurp(base + "_a.bin");
    CHECK(a == slurp(base + "_b.bin"));
    CHECK(a != slurp(base + "_c.bin"));
    CHECK_FALSE(a.empty());
    for (auto suffix : {"_a.bin", "_b.bin", "_c.bin"}) {
        std::remove((base + suffix).c_str());
    }
}

TEST_CASE("handler failure aborts the pipeline and is fully recorded") {
    Pipe p;
    std::string text(qsc_test::kBasicRequestText);
    auto pos = text.find("\"upper\"");
    text.replace(pos, 7, "\"fail\"");

    try {
        (void)handle_request(p.env, "client-1", text);
        FAIL("pipeline succeeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HandlerFailure);
    }
    CHECK(count_events(p.w.ledger, audit::kEvAgentExecutionCompleted) == 1);
    CHECK(count_events(p.w.ledger, audit::kEvAgentExecutionFailed) == 1);
    CHECK(count_events(p.w.ledger, audit::kEvPipelineAborted) == 1);
    CHECK(count_events(p.w.ledger, audit::kEvMergeReasoningCompleted) == 0);

    auto aborted = p.w.ledger.records().back().payload_json();
    // t2 failed directly; t3 failed for the missing dependency.
    CHECK(aborted.at("failed_tasks") ==
          nlohmann::json::array({"t2", "t3"}));

    // The failure artifact is stored, signed and marked not-ok.
    const auto* failure = p.env.store.lookup("req-1", "t2");
    REQUIRE(failure != nullptr);
    CHECK_FALSE(failure->ok);
    CHECK(p.w.ledger.verify().ok);
}

TEST_CASE("store rejects forged artifacts and writes after sealing") {
    Pipe p;
    auto req = taskgraph::RequestDoc::parse_text(qsc_test::kBasicRequestText);
    auto graph = taskgraph::build_task_graph(p.ctx, req);

    StoredArtifact artifact;
    artifact.provenance.task_name = "t1";
    artifact.provenance.task_id_hex = to_hex(graph.node("t1").task_id);
    artifact.provenance.request_id = "req-1";
    artifact.provenance.agent_id = "agent-a";
    artifact.provenance.nonce = p.w.entropy.sample(24);
    artifact.payload = to_bytes(std::string("forged"));
    artifact.signature = Bytes(32, 0xEE);
    try {
        p.env.store.append(artifact, p.ctx);
        FAIL("forged artifact accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SignatureInvalid);
    }

    // Properly signed artifacts are accepted until the store seals.
    artifact.signature = p.ctx.suite().sig->sign(
        p.ctx.identity("agent-a").sig_private, artifact_digest(artifact));
    CHECK_NOTHROW(p.env.store.append(artifact, p.ctx));
    p.env.store.seal();
    try {
        p.env.store.append(artifact, p.ctx);
        FAIL("sealed store accepted a write");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LedgerSealed);
    }
}

TEST_CASE("merge re-verifies artifacts against in-memory corruption") {
    Pipe p;
    auto req = secure_client_intake(p.env, "client-1",
                                    qsc_test::kBasicRequestText);
    auto graph = taskgraph::build_task_graph(p.ctx, req);
    for (const auto& wave : graph.waves) {
        for (const auto& name : wave) {
            REQUIRE(execute_task(p.env, graph, name));
        }
    }
    REQUIRE_NOTHROW((void)merge_and_reason(p.env, graph));

    SUBCASE("payload corruption") {
        p.env.store.entries()[0].payload.push_back(0x00);
        try {
            (void)merge_and_reason(p.env, graph);
            FAIL("merged corrupted artifact");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SignatureMismatchError);
        }
    }
    SUBCASE("duplicated delivery nonce") {
        auto& entries = p.env.store.entries();
        REQUIRE(entries.size() == 3);
        entries[1].provenance.nonce = entries[0].provenance.nonce;
        // Re-sign so only the nonce reuse (not the signature) trips.
        entries[1].signature = p.ctx.suite().sig->sign(
            p.ctx.identity(entries[1].provenance.agent_id).sig_private,
            artifact_digest(entries[1]));
        try {
            (void)merge_and_reason(p.env, graph);
            FAIL("merged despite nonce reuse");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EntropyReplayDetected);
        }
    }
    SUBCASE("missing artifact") {
        p.env.store.entries().pop_back();
        try {
            (void)merge_and_reason(p.env, graph);
            FAIL("merged with a missing artifact");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IncompleteResults);
        }
    }
}

TEST_CASE("sum reducer aggregates terminal outputs") {
    Pipe p;
    const char* text = R"({
      "request_id": "req-sum",
      "client": "client-1",
      "reducer": "sum",
      "subtasks": [
        {"name": "a", "op": "echo", "params": {"text": "20"}},
        {"name": "b", "op": "sum", "params": {"value": 2}, "inputs": ["a"]},
        {"name": "c", "op": "sum", "params": {"value": 4}, "inputs": ["a"]}
      ]
    })";
    auto result = handle_request(p.env, "client-1", text);
    // b = 22, c = 24; terminals are b and c.
    CHECK(to_string(result.merged.result) == "46");
}

TEST_CASE("pii responses are blocked at a region boundary") {
    const char* text = R"({
      "request_id": "req-pii",
      "client": "client-1",
      "tags": ["pii"],
      "subtasks": [{"name": "t", "op": "echo", "params": {"text": "ssn"}}]
    })";
    SUBCASE("cross-border client is refused") {
        Pipe p(21, "EU");
        try {
            (void)handle_request(p.env, "client-1", text);
            FAIL("pii crossed the border");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::PolicyViolationError);
        }
        CHECK(count_events(p.w.ledger, audit::kEvPipelineAborted) == 1);
        CHECK(count_events(p.w.ledger, audit::kEvFinalResponseSent) == 0);
        CHECK(p.w.ledger.records().back().payload_json().at("reason") ==
              "PolicyViolationError");
    }
    SUBCASE("same-region client passes") {
        Pipe p(21, "US");
        CHECK_NOTHROW((void)handle_request(p.env, "client-1", text));
    }
    SUBCASE("permissive ruleset allows it") {
        Pipe p(21, "EU");
        p.env.ruleset.forbid_cross_border_pii = false;
        CHECK_NOTHROW((void)handle_request(p.env, "client-1", text));
    }
}

TEST_CASE("intake rejections are recorded before the error propagates") {
    Pipe p;
    SUBCASE("malformed request text") {
        CHECK_THROWS_AS(
            (void)secure_client_intake(p.env, "client-1", "{broken"), Error);
        CHECK(count_events(p.w.ledger, audit::kEvIntakeRejected) == 1);
        CHECK(p.w.ledger.records().back().payload_json().at("reason") ==
              "MalformedRequest");
    }
    SUBCASE("client id mismatch") {
        std::string text(qsc_test::kBasicRequestText);
        auto pos = text.find("client-1");
        text.replace(pos, 8, "client-9");
        CHECK_THROWS_AS(
            (void)secure_client_intake(p.env, "client-1", text), Error);
        CHECK(count_events(p.w.ledger, audit::kEvIntakeRejected) == 1);
    }
    SUBCASE("non-client sender") {
        CHECK_THROWS_AS((void)secure_client_intake(
                            p.env, "agent-a", qsc_test::kBasicRequestText),
                        Error);
        CHECK(count_events(p.w.ledger, audit::kEvIntakeRejected) == 1);
    }
    CHECK(p.w.ledger.verify().ok);
}

TEST_CASE("teardown wipes keys, is idempotent and keeps the ledger writable") {
    Pipe p;
    (void)handle_request(p.env, "client-1", qsc_test::kBasicRequestText);

    CHECK(teardown_session(p.env));
    CHECK(p.env.store.sealed());
    CHECK(p.ctx.link("client-1", "orch").key.secret.empty());
    auto teardown_payload = p.w.ledger.records().back().payload_json();
    CHECK(teardown_payload.at("proof_system") == "ZKP_NOT_IMPLEMENTED");
    CHECK(teardown_payload.at("keys_wiped") == 6);  // 3 pairs, 2 directions

    CHECK_FALSE(teardown_session(p.env));
    CHECK(p.w.ledger.records().back().event_type ==
          audit::kEvSessionTeardownNoop);

    // Post-teardown traffic fails and the failure is recorded.
    CHECK_THROWS_AS((void)handle_request(p.env, "client-1",
                                         qsc_test::kBasicRequestText),
                    Error);
    CHECK(count_events(p.w.ledger, audit::kEvIntakeRejected) == 1);
    CHECK(p.w.ledger.verify().ok);
}

TEST_CASE("used links rotate at the start of the following request") {
    Pipe p;
    (void)handle_request(p.env, "client-1", qsc_test::kBasicRequestText);
    CHECK(count_events(p.w.ledger, audit::kEvKeyRotated) == 0);
    auto old_key = p.ctx.link("client-1", "orch").key.fingerprint();

    std::string second(qsc_test::kBasicRequestText);
    auto pos = second.find("req-1");
    second.replace(pos, 5, "req-2");
    (void)handle_request(p.env, "client-1", second);

    // client + both agents rotated, two directions each.
    CHECK(count_events(p.w.ledger, audit::kEvKeyRotated) == 6);
    CHECK(p.ctx.link("client-1", "orch").key.fingerprint() != old_key);
    CHECK(p.ctx.link("client-1", "orch").epoch == 1);
    CHECK(p.w.ledger.verify().ok);
}

TEST_CASE("degraded entropy is alerted into the ledger without recursion") {
    Pipe p(33, "US", crypto::EntropyKind::DRBG_FALLBACK);
    wire_entropy_alerts(p.env);
    REQUIRE(p.w.entropy.degraded());

    auto before = count_events(p.w.ledger, audit::kEvDegradedEntropy);
    (void)p.w.entropy.sample(16);
    auto after = count_events(p.w.ledger, audit::kEvDegradedEntropy);
    CHECK(after == before + 1);
    CHECK(p.w.ledger.verify().ok);
    p.w.entropy.set_alert_sink(nullptr);  // env outlives this test scope only
}
