#include "qsc/taskgraph/taskgraph.hpp"

#include <algorithm>
#include <set>

#include "qsc/sha256.hpp"
#include "qsc/wire/wire.hpp"

namespace qsc::taskgraph {

namespace {

[[noreturn]] void malformed(const std::string& why) {
    throw Error(ErrorCode::MalformedRequest, why);
}

std::string require_string(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_string() ||
        doc[key].get<std::string>().empty()) {
        malformed(std::string("request field '") + key +
                  "' must be a non-empty string");
    }
    return doc[key].get<std::string>();
}

}  // namespace

RequestDoc RequestDoc::parse_json(const nlohmann::json& doc) {
    if (!doc.is_object()) malformed("request must be a JSON object");
    RequestDoc req;
    req.request_id = require_string(doc, "request_id");
    req.client_id = require_string(doc, "client");
    if (doc.contains("reducer")) {
        if (!doc["reducer"].is_string()) malformed("reducer must be a string");
        req.reducer = doc["reducer"].get<std::string>();
    }
    if (req.reducer != "concat" && req.reducer != "sum") {
        malformed("unknown reducer '" + req.reducer + "'");
    }
    if (doc.contains("tags")) {
        if (!doc["tags"].is_array()) malformed("tags must be an array");
        for (const auto& t : doc["tags"]) {
            if (!t.is_string()) malformed("tags must be strings");
            req.tags.push_back(t.get<std::string>());
        }
    }
    if (!doc.contains("subtasks") || !doc["subtasks"].is_array() ||
        doc["subtasks"].empty()) {
        malformed("request needs a non-empty subtasks array");
    }
    std::set<std::string> names;
    for (const auto& item : doc["subtasks"]) {
        if (!item.is_object()) malformed("subtask must be an object");
        SubtaskSpec spec;
        spec.name = require_string(item, "name");
        spec.op = require_string(item, "op");
        if (!names.insert(spec.name).second) {
            malformed("duplicate subtask name '" + spec.name + "'");
        }
        if (item.contains("params")) {
            if (!item["params"].is_object()) {
                malformed("params must be an object");
            }
            spec.params = item["params"];
        }
        if (item.contains("inputs")) {
            if (!item["inputs"].is_array()) malformed("inputs must be an array");
            for (const auto& in : item["inputs"]) {
                if (!in.is_string()) malformed("inputs must be strings");
                spec.inputs.push_back(in.get<std::string>());
            }
        }
        req.subtasks.push_back(std::move(spec));
    }
    return req;
}

RequestDoc RequestDoc::parse_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        malformed(std::string("request is not valid JSON: ") + e.what());
    }
    return parse_json(doc);
}

nlohmann::json RequestDoc::to_json() const {
    nlohmann::json subtasks = nlohmann::json::array();
    for (const auto& s : this->subtasks) {
        subtasks.push_back({{"name", s.name},
                            {"op", s.op},
                            {"params", s.params},
                            {"inputs", s.inputs}});
    }
    return {{"request_id", request_id},
            {"client", client_id},
            {"reducer", reducer},
            {"tags", tags},
            {"subtasks", subtasks}};
}

const TaskNode& TaskGraph::node(const std::string& name) const {
    auto it = nodes.find(name);
    if (it == nodes.end()) {
        throw Error(ErrorCode::MissingDependency, "no task named " + name);
    }
    return it->second;
}

std::string select_agent(
    const std::vector<const session::ActorRecord*>& agents,
    const std::string& op, const std::map<std::string, std::size_t>& load) {
    const session::ActorRecord* best = nullptr;
    std::size_t best_load = 0;
    for (const auto* agent : agents) {
        bool capable =
            agent->skills.empty() ||
            std::find(agent->skills.begin(), agent->skills.end(), op) !=
                agent->skills.end();
        if (!capable) continue;
        auto it = load.find(agent->actor_id);
        std::size_t l = it == load.end() ? 0 : it->second;
        if (best == nullptr || l < best_load ||
            (l == best_load && agent->actor_id < best->actor_id)) {
            best = agent;
            best_load = l;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::NoCapableAgent,
                    "no admitted agent can run op '" + op + "'");
    }
    return best->actor_id;
}

std::vector<std::vector<std::string>> topological_waves(
    const std::map<std::string, TaskNode>& nodes) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> rdeps;
    for (const auto& [name, node] : nodes) {
        indegree[name] = node.deps.size();
        for (const auto& dep : node.deps) {
            rdeps[dep].push_back(name);
        }
    }
    std::vector<std::vector<std::string>> waves;
    std::size_t placed = 0;
    while (placed < nodes.size()) {
        std::vector<std::string> wave;
        for (const auto& [name, deg] : indegree) {
            if (deg == 0) wave.push_back(name);
        }
        if (wave.empty()) {
            throw Error(ErrorCode::CyclicDependency,
                        "task graph contains a dependency cycle");
        }
        for (const auto& name : wave) {
            indegree.erase(name);
            for (const auto& succ : rdeps[name]) {
                auto it = indegree.find(succ);
                if (it != indegree.end() && it->second > 0) --it->second;
            }
        }
        placed += wave.size();
        waves.push_back(std::move(wave));  // map iteration is already sorted
    }
    return waves;
}

std::string structural_hash(const std::string& request_id,
                            const std::map<std::string, TaskNode>& nodes) {
    Bytes canon;
    append_lp(canon, to_bytes(request_id));
    for (const auto& [name, node] : nodes) {
        append_lp(canon, to_bytes(name));
        append_lp(canon, to_bytes(node.op));
        append_lp(canon, to_bytes(node.agent_id));
        append_lp(canon, to_bytes(node.params.dump()));
        for (const auto& dep : node.deps) {
            append_lp(canon, to_bytes(dep));
        }
    }
    return to_hex(
        hash_segments({to_bytes(std::string("qsc.graph")), canon}));
}

TaskGraph build_task_graph(session::SessionContext& ctx,
                           const RequestDoc& request) {
    TaskGraph graph;
    graph.request_id = request.request_id;
    graph.client_id = request.client_id;
    graph.reducer = request.reducer;
    graph.tags = request.tags;

    std::set<std::string> declared;
    for (const auto& spec : request.subtasks) declared.insert(spec.name);
    for (const auto& spec : request.subtasks) {
        for (const auto& dep : spec.inputs) {
            if (declared.count(dep) == 0) {
                throw Error(ErrorCode::MalformedRequest,
                            "task '" + spec.name +
                                "' depends on undeclared task '" + dep + "'");
            }
            if (dep == spec.name) {
                throw Error(ErrorCode::CyclicDependency,
                            "task '" + spec.name + "' depends on itself");
            }
        }
    }

    std::map<std::string, std::size_t> load;
    auto candidates = ctx.workers();
    for (const auto& spec : request.subtasks) {
        TaskNode node;
        node.name = spec.name;
        node.op = spec.op;
        node.params = spec.params;
        node.deps = spec.inputs;
        node.task_id = ctx.entropy().sample(wire::kTaskIdBytes);
        node.agent_id = select_agent(candidates, spec.op, load);
        ++load[node.agent_id];
        graph.nodes.emplace(node.name, std::move(node));
    }

    graph.waves = topological_waves(graph.nodes);
    graph.graph_hash = structural_hash(graph.request_id, graph.nodes);

    nlohmann::json payload = {
        {"request_id", graph.request_id},
        {"task_count", graph.nodes.size()},
        {"wave_count", graph.waves.size()},
        {"graph_hash", graph.graph_hash},
    };
    const auto& orch = ctx.actor(ctx.orchestrator_id());
    ctx.ledger().append(orch.actor_id, audit::kEvTaskGraphCreated,
                        to_bytes(graph.request_id), payload, false, orch.cert,
                        ctx.identity(orch.actor_id).sig_private,
                        ctx.entropy());
    return graph;
}

}  // namespace qsc::taskgraph
