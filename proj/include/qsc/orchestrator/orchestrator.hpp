#pragma once

// Pipeline orchestration: sealed client intake, wave-ordered task
// execution over sealed frames, signed artifacts in an append-only shared
// store, merge with provenance re-verification, sealed final response and
// idempotent teardown. Every cross-actor hop goes through wire::seal /
// wire::open, so the audit trail reflects real verification work.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsc/audit/ledger.hpp"
#include "qsc/bytes.hpp"
#include "qsc/error.hpp"
#include "qsc/session/session.hpp"
#include "qsc/taskgraph/taskgraph.hpp"
#include "qsc/wire/wire.hpp"

namespace qsc::orchestrator {

// Where one artifact came from: enough to re-verify it at merge time and
// to tie it to the frame nonce that delivered it.
struct ProvenanceRecord {
    std::string task_name;
    std::string task_id_hex;
    std::string request_id;
    std::string agent_id;
    std::uint64_t logical_time = 0;
    std::optional<std::string> qkd_session_id;
    Bytes nonce;  // nonce of the TASK_RESULT frame

    Bytes canonical() const;  // length-prefixed packing, signature input
};

struct StoredArtifact {
    ProvenanceRecord provenance;
    Bytes payload;
    Bytes signature;  // agent signature over (payload, provenance)
    bool ok = true;   // false marks a recorded failure
};

Bytes artifact_digest(const StoredArtifact& artifact);

// Append-only artifact store. Appends verify the writer's signature
// against its roster certificate; a sealed store refuses further writes.
class SharedMemoryStore {
public:
    void append(StoredArtifact artifact, const session::SessionContext& ctx);
    const StoredArtifact* lookup(const std::string& request_id,
                                 const std::string& task_name) const;
    const std::vector<StoredArtifact>& entries() const { return entries_; }
    // The store models a plain shared-memory region, which is corruptible
    // by construction; merge-time re-verification is the defense. Mutable
    // access exists so that corruption can be exercised.
    std::vector<StoredArtifact>& entries() { return entries_; }
    void seal();
    bool sealed() const { return sealed_; }

private:
    std::vector<StoredArtifact> entries_;
    bool sealed_ = false;
};

// Task handler: dep payloads arrive in the node's input order.
using Handler =
    std::function<Bytes(const taskgraph::TaskNode&, const std::vector<Bytes>&)>;

// echo, upper, concat, sum, fail (always raises HandlerFailure).
std::map<std::string, Handler> default_handlers();

struct Ruleset {
    bool forbid_cross_border_pii = true;
};

struct PipelineEnv {
    session::SessionContext& ctx;
    wire::ReplayRegistry replay;
    SharedMemoryStore store;
    std::map<std::string, Handler> handlers = default_handlers();
    Ruleset ruleset;
    std::uint64_t logical_ms = 0;
    // Link pairs due for rotation; applied at the start of the next
    // request so a single run's event sequence stays minimal.
    std::vector<std::pair<std::string, std::string>> rotation_queue;
    bool torn_down = false;

    explicit PipelineEnv(session::SessionContext& context) : ctx(context) {}

    std::uint64_t next_ms() { return ++logical_ms; }
};

// Routes entropy degradation alerts into the ledger as DEGRADED_ENTROPY
// records signed by the orchestrator.
void wire_entropy_alerts(PipelineEnv& env);

// Runs and clears the rotation queue (one KEY_ROTATED record per direction).
void apply_scheduled_rotations(PipelineEnv& env);

// The client seals the request text to the orchestrator; the orchestrator
// opens and parses it. Rejections (unknown or non-CLIENT sender, frame
// verification failure, malformed document, client id mismatch) append one
// INTAKE_REJECTED record before rethrowing.
taskgraph::RequestDoc secure_client_intake(PipelineEnv& env,
                                           const std::string& client_id,
                                           const std::string& request_text);

// Executes one node: sealed assignment to the agent, handler run, sealed
// result back, signature-verified store append, AGENT_EXECUTION_COMPLETED.
// A HandlerFailure is recorded (failure artifact + AGENT_EXECUTION_FAILED)
// and reported as false; missing dep artifacts raise MissingDependency.
bool execute_task(PipelineEnv& env, const taskgraph::TaskGraph& graph,
                  const std::string& task_name);

struct MergeOutcome {
    Bytes result;
    std::string provenance_hash;
};

// Re-verifies every artifact (SignatureMismatchError on a bad stored
// signature, EntropyReplayDetected on a duplicated delivery nonce,
// IncompleteResults when artifacts are missing or failed), then reduces in
// wave order with the request's reducer.
MergeOutcome merge_and_reason(PipelineEnv& env,
                              const taskgraph::TaskGraph& graph);

// Policy gate (PII must not cross regions when the ruleset forbids it),
// sealed FINAL_RESPONSE to the client, FINAL_RESPONSE_SENT record, link
// rotations scheduled. Returns the response payload as the client opened it.
Bytes finalize_and_respond(PipelineEnv& env, const taskgraph::TaskGraph& graph,
                           const MergeOutcome& merged);

struct PipelineResult {
    taskgraph::TaskGraph graph;
    MergeOutcome merged;
    Bytes client_response;
};

// Full pipeline: scheduled rotations, intake, graph build, wave execution
// (any failed task aborts with PIPELINE_ABORTED + HandlerFailure), merge,
// finalize.
PipelineResult handle_request(PipelineEnv& env, const std::string& client_id,
                              const std::string& request_text);

// Wipes session keys, clears the replay registry and seals the store, then
// records SESSION_TEARDOWN (payload notes the proof system as
// ZKP_NOT_IMPLEMENTED). A second call only records SESSION_TEARDOWN_NOOP
// and returns false. The audit ledger itself stays writable.
bool teardown_session(PipelineEnv& env);

}  // namespace qsc::orchestrator
