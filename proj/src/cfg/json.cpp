#include <json.hpp>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/common/error.hpp"

namespace nlplan::cfg {

namespace {

using nlohmann::json;

json node_to_json(const CfgNode* node) {
    if (!node) return nullptr;
    json j;
    j["node_id"] = node->node_id;
    j["task_type"] = node->task.task_type;
    j["dependency"] = node->task.dependency;
    j["trigger_index"] = node->task.trigger_index;
    json args = json::object();
    for (const auto& [type, values] : node->task.arguments) args[type] = values;
    j["arguments"] = args;
    j["positive"] = node_to_json(node->positive.get());
    j["negative"] = node_to_json(node->negative.get());
    j["next"] = node_to_json(node->next.get());
    return j;
}

std::unique_ptr<CfgNode> node_from_json(const json& j, const std::string& origin) {
    if (j.is_null()) return nullptr;
    if (!j.is_object()) throw ValidationError(origin + ": graph node must be an object");
    if (!j.contains("task_type") || !j["task_type"].is_string())
        throw ValidationError(origin + ": graph node lacks a task_type");

    auto node = std::make_unique<CfgNode>();
    node->task.task_type = j["task_type"].get<std::string>();
    node->node_id = j.value("node_id", 0);
    node->task.trigger_index = j.value("trigger_index", 0);
    node->task.dependency = j.value("dependency", std::string());
    if (j.contains("arguments")) {
        if (!j["arguments"].is_object())
            throw ValidationError(origin + ": graph node arguments must be an object");
        for (const auto& [type, values] : j["arguments"].items()) {
            if (!values.is_array())
                throw ValidationError(origin + ": argument values must be an array");
            for (const auto& v : values) {
                if (!v.is_string())
                    throw ValidationError(origin + ": argument values must be strings");
                node->task.arguments[type].push_back(v.get<std::string>());
            }
        }
    }
    if (j.contains("positive")) node->positive = node_from_json(j["positive"], origin);
    if (j.contains("negative")) node->negative = node_from_json(j["negative"], origin);
    if (j.contains("next")) node->next = node_from_json(j["next"], origin);

    // Re-read graphs must behave identically under merging and planning, so
    // recover a missing dependency label from the branch structure.
    if (node->task.dependency.empty())
        node->task.dependency = (node->positive || node->negative)
                                    ? corpus::dep_label::conditional
                                    : corpus::dep_label::sequential;
    return node;
}

}  // namespace

std::string graph_to_json(const ControlFlowGraph& graph) {
    return node_to_json(graph.root.get()).dump();
}

ControlFlowGraph graph_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": bad graph record: " + e.what());
    }
    ControlFlowGraph g;
    g.root = node_from_json(j, origin);
    if (!g.root) throw ValidationError(origin + ": graph record has no root node");
    g.recount();
    return g;
}

}  // namespace nlplan::cfg
