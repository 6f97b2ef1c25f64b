#pragma once

// Request intake and task-DAG construction: a client request names
// subtasks with explicit input edges; the builder validates the edges,
// assigns each subtask to the least-loaded capable agent, and derives a
// deterministic wave schedule (Kahn levels) plus a structural graph
// fingerprint that is independent of the run seed.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsc/bytes.hpp"
#include "qsc/error.hpp"
#include "qsc/session/session.hpp"

namespace qsc::taskgraph {

struct SubtaskSpec {
    std::string name;
    std::string op;
    nlohmann::json params = nlohmann::json::object();
    std::vector<std::string> inputs;
};

struct RequestDoc {
    std::string request_id;
    std::string client_id;
    std::string reducer = "concat";  // concat | sum
    std::vector<std::string> tags;
    std::vector<SubtaskSpec> subtasks;

    // Strict parse; any missing field, type error, duplicate subtask name
    // or unknown reducer raises MalformedRequest.
    static RequestDoc parse_json(const nlohmann::json& doc);
    static RequestDoc parse_text(const std::string& text);

    nlohmann::json to_json() const;
};

struct TaskNode {
    std::string name;
    std::string op;
    nlohmann::json params = nlohmann::json::object();
    std::vector<std::string> deps;
    Bytes task_id;  // 16 fresh entropy bytes, used in frame associated data
    std::string agent_id;
};

struct TaskGraph {
    std::string request_id;
    std::string client_id;
    std::string reducer;
    std::vector<std::string> tags;
    std::map<std::string, TaskNode> nodes;
    std::vector<std::vector<std::string>> waves;
    std::string graph_hash;  // structural fingerprint, seed-independent

    const TaskNode& node(const std::string& name) const;
};

// Least-loaded capable agent; ties break toward the lexicographically
// smaller id. An agent is capable when its skill list names the op or is
// empty (generalist). Raises NoCapableAgent when no candidate matches.
std::string select_agent(
    const std::vector<const session::ActorRecord*>& agents,
    const std::string& op, const std::map<std::string, std::size_t>& load);

// Kahn levels over the name->deps map; every wave is sorted. Raises
// CyclicDependency when the edge set admits no topological order.
std::vector<std::vector<std::string>> topological_waves(
    const std::map<std::string, TaskNode>& nodes);

// Hash over (name, op, agent, deps, params) per node in name order. Task
// ids deliberately stay out, so the fingerprint is stable across seeds.
std::string structural_hash(const std::string& request_id,
                            const std::map<std::string, TaskNode>& nodes);

// Validates edges, assigns agents from the admitted roster, schedules
// waves and appends a TASK_GRAPH_CREATED record signed by the
// orchestrator.
TaskGraph build_task_graph(session::SessionContext& ctx,
                           const RequestDoc& request);

}  // namespace qsc::taskgraph
