#include "qsc/orchestrator/orchestrator.hpp"

#include <algorithm>
#include <set>

#include "qsc/sha256.hpp"

namespace qsc::orchestrator {

namespace {

Bytes zero_task_id() { return Bytes(wire::kTaskIdBytes, 0); }

std::string ascii_upper(std::string s) {
    for (auto& c : s) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return s;
}

long long parse_int(const std::string& text) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::HandlerFailure,
                    "expected an integer, got '" + text + "'");
    }
}

const session::ActorRecord& orch_record(PipelineEnv& env) {
    return env.ctx.actor(env.ctx.orchestrator_id());
}

void append_orch_event(PipelineEnv& env, std::string_view event_type,
                       const std::string& scope,
                       const nlohmann::json& payload,
                       bool qkd_active = false) {
    const auto& orch = orch_record(env);
    env.ctx.ledger().append(orch.actor_id, event_type, to_bytes(scope),
                            payload, qkd_active, orch.cert,
                            env.ctx.identity(orch.actor_id).sig_private,
                            env.ctx.entropy());
}

// Terminal nodes: nothing in the graph depends on them.
std::vector<std::string> terminal_tasks(const taskgraph::TaskGraph& graph) {
    std::set<std::string> has_dependent;
    for (const auto& [name, node] : graph.nodes) {
        for (const auto& dep : node.deps) has_dependent.insert(dep);
    }
    std::vector<std::string> out;
    for (const auto& [name, node] : graph.nodes) {
        if (has_dependent.count(name) == 0) out.push_back(name);
    }
    return out;  // map order: already sorted by name
}

std::vector<std::string> flattened(const taskgraph::TaskGraph& graph) {
    std::vector<std::string> out;
    for (const auto& wave : graph.waves) {
        out.insert(out.end(), wave.begin(), wave.end());
    }
    return out;
}

const StoredArtifact& verified_artifact(const PipelineEnv& env,
                                        const taskgraph::TaskGraph& graph,
                                        const std::string& name) {
    const auto* artifact = env.store.lookup(graph.request_id, name);
    if (artifact == nullptr || !artifact->ok) {
        throw Error(ErrorCode::IncompleteResults,
                    "no successful artifact for task '" + name + "'");
    }
    const auto& agent = env.ctx.actor(artifact->provenance.agent_id);
    if (!env.ctx.suite().sig->verify(agent.cert.sig_public,
                                     artifact_digest(*artifact),
                                     artifact->signature)) {
        throw Error(ErrorCode::SignatureMismatchError,
                    "stored artifact for '" + name + "' fails re-verification");
    }
    if (artifact->provenance.request_id != graph.request_id) {
        throw Error(ErrorCode::SignatureMismatchError,
                    "artifact for '" + name + "' belongs to another request");
    }
    return *artifact;
}

}  // namespace

Bytes ProvenanceRecord::canonical() const {
    Bytes out;
    append_lp(out, to_bytes(task_name));
    append_lp(out, to_bytes(task_id_hex));
    append_lp(out, to_bytes(request_id));
    append_lp(out, to_bytes(agent_id));
    append_u64_be(out, logical_time);
    append_lp(out, to_bytes(qkd_session_id.value_or("")));
    append_lp(out, nonce);
    return out;
}

Bytes artifact_digest(const StoredArtifact& artifact) {
    Bytes ok_byte{artifact.ok ? std::uint8_t{1} : std::uint8_t{0}};
    return hash_segments({to_bytes(std::string("qsc.artifact")),
                          artifact.payload, artifact.provenance.canonical(),
                          ok_byte});
}

void SharedMemoryStore::append(StoredArtifact artifact,
                               const session::SessionContext& ctx) {
    if (sealed_) {
        throw Error(ErrorCode::LedgerSealed,
                    "shared store is sealed; session is torn down");
    }
    const auto& writer = ctx.actor(artifact.provenance.agent_id);
    if (!ctx.suite().sig->verify(writer.cert.sig_public,
                                 artifact_digest(artifact),
                                 artifact.signature)) {
        throw Error(ErrorCode::SignatureInvalid,
                    "artifact signature rejected for task '" +
                        artifact.provenance.task_name + "'");
    }
    entries_.push_back(std::move(artifact));
}

const StoredArtifact* SharedMemoryStore::lookup(
    const std::string& request_id, const std::string& task_name) const {
    // Last write wins so a retry could supersede a failure artifact.
    const StoredArtifact* found = nullptr;
    for (const auto& e : entries_) {
        if (e.provenance.request_id == request_id &&
            e.provenance.task_name == task_name) {
            found = &e;
        }
    }
    return found;
}

void SharedMemoryStore::seal() { sealed_ = true; }

std::map<std::string, Handler> default_handlers() {
    std::map<std::string, Handler> handlers;
    handlers["echo"] = [](const taskgraph::TaskNode& node,
                          const std::vector<Bytes>&) {
        if (!node.params.contains("text") || !node.params["text"].is_string()) {
            throw Error(ErrorCode::HandlerFailure,
                        "echo needs a string param 'text'");
        }
        return to_bytes(node.params["text"].get<std::string>());
    };
    handlers["upper"] = [](const taskgraph::TaskNode& node,
                           const std::vector<Bytes>& deps) {
        std::string text;
        if (node.params.contains("text") && node.params["text"].is_string()) {
            text = node.params["text"].get<std::string>();
        } else {
            for (const auto& d : deps) text += to_string(d);
        }
        return to_bytes(ascii_upper(text));
    };
    handlers["concat"] = [](const taskgraph::TaskNode& node,
                            const std::vector<Bytes>& deps) {
        std::string sep = "+";
        if (node.params.contains("sep") && node.params["sep"].is_string()) {
            sep = node.params["sep"].get<std::string>();
        }
        std::string out;
        for (std::size_t i = 0; i < deps.size(); ++i) {
            if (i > 0) out += sep;
            out += to_string(deps[i]);
        }
        return to_bytes(out);
    };
    handlers["sum"] = [](const taskgraph::TaskNode& node,
                         const std::vector<Bytes>& deps) {
        long long total = 0;
        for (const auto& d : deps) total += parse_int(to_string(d));
        if (node.params.contains("value")) {
            if (!node.params["value"].is_number_integer()) {
                throw Error(ErrorCode::HandlerFailure,
                            "sum param 'value' must be an integer");
            }
            total += node.params["value"].get<long long>();
        }
        return to_bytes(std::to_string(total));
    };
    handlers["fail"] = [](const taskgraph::TaskNode& node,
                          const std::vector<Bytes>&) -> Bytes {
        throw Error(ErrorCode::HandlerFailure,
                    "task '" + node.name + "' is configured to fail");
    };
    return handlers;
}

void wire_entropy_alerts(PipelineEnv& env) {
    // The sink holds references into env; the scenario owns both and tears
    // the sink down with the entropy source.
    env.ctx.entropy().set_alert_sink([&env](std::string_view alert) {
        append_orch_event(env, audit::kEvDegradedEntropy, "entropy",
                          {{"alert", std::string(alert)}});
    });
}

void apply_scheduled_rotations(PipelineEnv& env) {
    std::set<std::pair<std::string, std::string>> done;
    for (const auto& [u, v] : env.rotation_queue) {
        auto key = u < v ? std::pair{u, v} : std::pair{v, u};
        if (!done.insert(key).second) continue;
        env.ctx.rotate_key(u, v);
    }
    env.rotation_queue.clear();
}

taskgraph::RequestDoc secure_client_intake(PipelineEnv& env,
                                           const std::string& client_id,
                                           const std::string& request_text) {
    auto reject = [&](std::string_view reason) {
        append_orch_event(env, audit::kEvIntakeRejected, client_id,
                          {{"client", client_id},
                           {"reason", std::string(reason)}});
    };
    if (env.torn_down) {
        reject("session-torn-down");
        throw Error(ErrorCode::LedgerSealed,
                    "session is torn down; no further intake");
    }
    if (!env.ctx.has_actor(client_id) ||
        env.ctx.actor(client_id).kind != session::ActorKind::CLIENT) {
        reject("not-an-admitted-client");
        throw Error(ErrorCode::MalformedRequest,
                    "intake requires an admitted CLIENT actor, got '" +
                        client_id + "'");
    }

    const auto& orch_id = env.ctx.orchestrator_id();
    taskgraph::RequestDoc req;
    try {
        auto frame = wire::seal(env.ctx, client_id, orch_id,
                                wire::MsgKind::REQUEST, zero_task_id(),
                                to_bytes(request_text), env.next_ms());
        auto opened = wire::open(env.ctx, env.replay, frame);
        req = taskgraph::RequestDoc::parse_text(to_string(opened.payload));
    } catch (const Error& e) {
        reject(e.name());
        throw;
    }
    if (req.client_id != client_id) {
        reject("client-id-mismatch");
        throw Error(ErrorCode::MalformedRequest,
                    "request names client '" + req.client_id +
                        "' but was sent by '" + client_id + "'");
    }
    return req;
}

bool execute_task(PipelineEnv& env, const taskgraph::TaskGraph& graph,
                  const std::string& task_name) {
    const auto& node = graph.node(task_name);
    const auto& orch_id = env.ctx.orchestrator_id();
    const auto& agent = env.ctx.actor(node.agent_id);

    // Collect dependency payloads (successful artifacts only).
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& dep : node.deps) {
        const auto* artifact = env.store.lookup(graph.request_id, dep);
        if (artifact == nullptr || !artifact->ok) {
            throw Error(ErrorCode::MissingDependency,
                        "task '" + task_name + "' needs artifact of '" + dep +
                            "' which is unavailable");
        }
        inputs.push_back({dep, to_hex(artifact->payload)});
    }

    // Orchestrator -> agent: sealed assignment.
    nlohmann::json assignment = {
        {"task", node.name},
        {"op", node.op},
        {"params", node.params},
        {"inputs", inputs},
    };
    auto assign_frame =
        wire::seal(env.ctx, orch_id, node.agent_id,
                   wire::MsgKind::TASK_ASSIGNMENT, node.task_id,
                   to_bytes(assignment.dump()), env.next_ms());
    auto assigned = wire::open(env.ctx, env.replay, assign_frame);

    // Agent side: parse, run the handler.
    auto doc = nlohmann::json::parse(to_string(assigned.payload));
    std::vector<Bytes> dep_payloads;
    for (const auto& item : doc["inputs"]) {
        dep_payloads.push_back(from_hex(item[1].get<std::string>()));
    }

    const auto& link_in = env.ctx.link(node.agent_id, orch_id);
    auto make_provenance = [&](const Bytes& nonce, std::uint64_t when) {
        ProvenanceRecord prov;
        prov.task_name = node.name;
        prov.task_id_hex = to_hex(node.task_id);
        prov.request_id = graph.request_id;
        prov.agent_id = node.agent_id;
        prov.logical_time = when;
        prov.qkd_session_id = link_in.qkd_session_id;
        prov.nonce = nonce;
        return prov;
    };
    auto sign_artifact = [&](StoredArtifact& artifact) {
        artifact.signature =
            env.ctx.suite().sig->sign(env.ctx.identity(node.agent_id).sig_private,
                                      artifact_digest(artifact));
    };

    Bytes result;
    try {
        auto it = env.handlers.find(node.op);
        if (it == env.handlers.end()) {
            throw Error(ErrorCode::HandlerFailure,
                        "no handler registered for op '" + node.op + "'");
        }
        result = it->second(node, dep_payloads);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::HandlerFailure) throw;
        StoredArtifact failure;
        failure.provenance =
            make_provenance(assign_frame.nonce, assigned.timestamp_ms);
        failure.payload = to_bytes(std::string(e.what()));
        failure.ok = false;
        sign_artifact(failure);
        env.store.append(std::move(failure), env.ctx);
        env.ctx.ledger().append(
            node.agent_id, audit::kEvAgentExecutionFailed, node.task_id,
            {{"task", node.name},
             {"agent", node.agent_id},
             {"op", node.op},
             {"error", std::string(e.what())}},
            link_in.k_qkd.has_value(), agent.cert,
            env.ctx.identity(node.agent_id).sig_private, env.ctx.entropy());
        return false;
    }

    // Agent -> orchestrator: sealed result, then the verified store append.
    auto result_frame =
        wire::seal(env.ctx, node.agent_id, orch_id, wire::MsgKind::TASK_RESULT,
                   node.task_id, result, env.next_ms());
    auto delivered = wire::open(env.ctx, env.replay, result_frame);

    StoredArtifact artifact;
    artifact.provenance =
        make_provenance(result_frame.nonce, delivered.timestamp_ms);
    artifact.payload = delivered.payload;
    sign_artifact(artifact);
    env.store.append(artifact, env.ctx);

    env.ctx.ledger().append(
        node.agent_id, audit::kEvAgentExecutionCompleted, node.task_id,
        {{"task", node.name},
         {"agent", node.agent_id},
         {"op", node.op},
         {"result_hash", to_hex(hash_segments({delivered.payload}))},
         {"logical_time", delivered.timestamp_ms}},
        link_in.k_qkd.has_value(), agent.cert,
        env.ctx.identity(node.agent_id).sig_private, env.ctx.entropy());
    return true;
}

MergeOutcome merge_and_reason(PipelineEnv& env,
                              const taskgraph::TaskGraph& graph) {
    auto order = flattened(graph);

    // Re-verify everything and screen delivery nonces for reuse.
    std::set<Bytes> nonces;
    Bytes prov_canon;
    for (const auto& name : order) {
        const auto& artifact = verified_artifact(env, graph, name);
        if (!nonces.insert(artifact.provenance.nonce).second) {
            throw Error(ErrorCode::EntropyReplayDetected,
                        "delivery nonce reused by artifact of '" + name + "'");
        }
        append_lp(prov_canon, artifact.provenance.canonical());
        append_lp(prov_canon, artifact.payload);
        append_lp(prov_canon, artifact.signature);
    }

    MergeOutcome out;
    out.provenance_hash = to_hex(
        hash_segments({to_bytes(std::string("qsc.prov")), prov_canon}));

    auto terminals = terminal_tasks(graph);
    if (graph.reducer == "sum") {
        long long total = 0;
        for (const auto& name : terminals) {
            total += parse_int(
                to_string(env.store.lookup(graph.request_id, name)->payload));
        }
        out.result = to_bytes(std::to_string(total));
    } else {
        std::string joined;
        for (std::size_t i = 0; i < terminals.size(); ++i) {
            if (i > 0) joined += "+";
            joined += to_string(
                env.store.lookup(graph.request_id, terminals[i])->payload);
        }
        out.result = to_bytes(joined);
    }

    append_orch_event(env, audit::kEvMergeReasoningCompleted, graph.request_id,
                      {{"request_id", graph.request_id},
                       {"reducer", graph.reducer},
                       {"terminal_tasks", terminals},
                       {"result_hash", to_hex(hash_segments({out.result}))},
                       {"provenance_hash", out.provenance_hash}});
    return out;
}

Bytes finalize_and_respond(PipelineEnv& env, const taskgraph::TaskGraph& graph,
                           const MergeOutcome& merged) {
    // Artifacts must still verify between merge and response.
    for (const auto& name : flattened(graph)) {
        (void)verified_artifact(env, graph, name);
    }

    const auto& orch = orch_record(env);
    const auto& client = env.ctx.actor(graph.client_id);
    bool pii = std::find(graph.tags.begin(), graph.tags.end(), "pii") !=
               graph.tags.end();
    if (env.ruleset.forbid_cross_border_pii && pii &&
        client.region != orch.region) {
        append_orch_event(env, audit::kEvPipelineAborted, graph.request_id,
                          {{"request_id", graph.request_id},
                           {"reason", "PolicyViolationError"},
                           {"detail", "pii result may not cross regions"}});
        throw Error(ErrorCode::PolicyViolationError,
                    "response tagged pii may not cross " + orch.region + "->" +
                        client.region);
    }

    nlohmann::json response = {
        {"request_id", graph.request_id},
        {"result", to_string(merged.result)},
        {"provenance_hash", merged.provenance_hash},
    };
    auto frame = wire::seal(env.ctx, orch.actor_id, graph.client_id,
                            wire::MsgKind::FINAL_RESPONSE, zero_task_id(),
                            to_bytes(response.dump()), env.next_ms());
    auto opened = wire::open(env.ctx, env.replay, frame);

    append_orch_event(env, audit::kEvFinalResponseSent, graph.request_id,
                      {{"request_id", graph.request_id},
                       {"client", graph.client_id},
                       {"response_hash",
                        to_hex(hash_segments({opened.payload}))}});

    // Schedule rotation of every link the request used; the rotations run
    // at the start of the next request.
    std::set<std::string> used{graph.client_id};
    for (const auto& [name, node] : graph.nodes) used.insert(node.agent_id);
    for (const auto& id : used) {
        env.rotation_queue.emplace_back(id, env.ctx.orchestrator_id());
    }
    return opened.payload;
}

PipelineResult handle_request(PipelineEnv& env, const std::string& client_id,
                              const std::string& request_text) {
    if (!env.torn_down) apply_scheduled_rotations(env);
    auto req = secure_client_intake(env, client_id, request_text);
    PipelineResult result{taskgraph::build_task_graph(env.ctx, req), {}, {}};

    std::vector<std::string> failed;
    for (const auto& wave : result.graph.waves) {
        for (const auto& name : wave) {
            bool ok = false;
            try {
                ok = execute_task(env, result.graph, name);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MissingDependency) throw;
                ok = false;  // upstream failure already recorded
            }
            if (!ok) failed.push_back(name);
        }
    }
    if (!failed.empty()) {
        append_orch_event(env, audit::kEvPipelineAborted,
                          result.graph.request_id,
                          {{"request_id", result.graph.request_id},
                           {"reason", "HandlerFailure"},
                           {"failed_tasks", failed}});
        throw Error(ErrorCode::HandlerFailure,
                    std::to_string(failed.size()) +
                        " task(s) failed; pipeline aborted");
    }

    result.merged = merge_and_reason(env, result.graph);
    result.client_response = finalize_and_respond(env, result.graph,
                                                  result.merged);
    return result;
}

bool teardown_session(PipelineEnv& env) {
    if (env.torn_down) {
        append_orch_event(env, audit::kEvSessionTeardownNoop, "teardown",
                          {{"note", "session already torn down"}});
        return false;
    }
    auto wiped = env.ctx.wipe_keys();
    env.replay.clear();
    env.store.seal();
    env.torn_down = true;
    append_orch_event(env, audit::kEvSessionTeardown, "teardown",
                      {{"keys_wiped", wiped},
                       {"replay_registry", "cleared"},
                       {"store", "sealed"},
                       {"proof_system", "ZKP_NOT_IMPLEMENTED"}});
    return true;
}

}  // namespace qsc::orchestrator
