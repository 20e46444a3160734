#include <map>
#include <sstream>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"

namespace nlplan::cfg {

namespace {

std::string escape_label(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

// Escapes each line separately and joins with the GraphViz line-break escape,
// so a backslash inside a value cannot be confused with the separator.
std::string node_label(const CfgNode& node) {
    std::string label = escape_label(node.task.task_type);
    for (const auto& [type, values] : node.task.arguments)
        label += "\\n" + escape_label(type + ": " + join(values, ", "));
    return label;
}

void emit_edges(const CfgNode* node, std::ostringstream& out) {
    if (!node) return;
    auto edge = [&](const CfgNode* to, const char* label) {
        out << "  n" << node->node_id << " -> n" << to->node_id << " [label=\"" << label
            << "\"];\n";
    };
    if (node->positive) edge(node->positive.get(), "yes");
    if (node->negative) edge(node->negative.get(), "no");
    if (node->next) edge(node->next.get(), "next");
    emit_edges(node->positive.get(), out);
    emit_edges(node->negative.get(), out);
    emit_edges(node->next.get(), out);
}

}  // namespace

std::string to_dot(const ControlFlowGraph& graph) {
    std::ostringstream out;
    out << "digraph plan {\n";
    for (const CfgNode* node : preorder(graph))
        out << "  n" << node->node_id << " [label=\"" << node_label(*node) << "\"];\n";
    emit_edges(graph.root.get(), out);
    out << "}\n";
    return out.str();
}

ControlFlowGraph parse_dot(const std::string& text) {
    // Reads only the dialect to_dot writes: one node or edge statement per
    // line, labels quoted, edge labels yes/no/next.
    std::map<int, std::unique_ptr<CfgNode>> nodes;
    struct Edge {
        int from, to;
        std::string label;
    };
    std::vector<Edge> edges;

    // Splits a still-escaped label on unescaped \n separators while decoding
    // \" and \\ sequences.
    auto label_lines = [](const std::string& s) {
        std::vector<std::string> lines;
        std::string cur;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) {
                const char c = s[i + 1];
                if (c == 'n') {
                    lines.push_back(cur);
                    cur.clear();
                    ++i;
                    continue;
                }
                if (c == '"' || c == '\\') {
                    cur.push_back(c);
                    ++i;
                    continue;
                }
            }
            cur.push_back(s[i]);
        }
        lines.push_back(cur);
        return lines;
    };

    for (const std::string& raw : split(text, '\n')) {
        std::string line = trim(raw);
        if (line.empty() || line == "}" || line.rfind("digraph", 0) == 0) continue;
        auto label_pos = line.find("[label=\"");
        if (label_pos == std::string::npos)
            throw ValidationError("unrecognized statement in graph text: " + line);
        auto label_end = line.rfind("\"]");
        if (label_end == std::string::npos || label_end <= label_pos + 8)
            throw ValidationError("unterminated label in graph text: " + line);
        std::string head = trim(line.substr(0, label_pos));
        std::string label = line.substr(label_pos + 8, label_end - label_pos - 8);

        auto arrow = head.find("->");
        if (arrow == std::string::npos) {
            if (head.empty() || head[0] != 'n')
                throw ValidationError("bad node name in graph text: " + head);
            int id = std::stoi(head.substr(1));
            auto node = std::make_unique<CfgNode>();
            node->node_id = id;
            // First label line is the task type; the rest are "Type: v, v".
            std::vector<std::string> lines = label_lines(label);
            if (lines.empty() || lines[0].empty())
                throw ValidationError("node label missing a task type: " + line);
            node->task.task_type = lines[0];
            for (std::size_t i = 1; i < lines.size(); ++i) {
                auto colon = lines[i].find(": ");
                if (colon == std::string::npos)
                    throw ValidationError("bad argument line in node label: " + lines[i]);
                std::string type = lines[i].substr(0, colon);
                for (const std::string& v : split(lines[i].substr(colon + 2), ','))
                    node->task.arguments[type].push_back(trim(v));
            }
            if (!nodes.emplace(id, std::move(node)).second)
                throw ValidationError("duplicate node in graph text: n" + std::to_string(id));
        } else {
            std::string from = trim(head.substr(0, arrow));
            std::string to = trim(head.substr(arrow + 2));
            if (from.empty() || to.empty() || from[0] != 'n' || to[0] != 'n')
                throw ValidationError("bad edge endpoints in graph text: " + head);
            edges.push_back({std::stoi(from.substr(1)), std::stoi(to.substr(1)), label});
        }
    }

    std::map<int, int> indegree;
    for (auto& [id, node] : nodes) indegree[id] = 0;
    for (const Edge& e : edges) {
        auto from = nodes.find(e.from);
        auto to = nodes.find(e.to);
        if (from == nodes.end() || to == nodes.end())
            throw ValidationError("edge references an undeclared node");
        if (++indegree[e.to] > 1)
            throw ValidationError("node n" + std::to_string(e.to) + " has two parents");
    }
    // Attach children after indegree screening; each slot may be set once.
    // Raw pointers stay valid while ownership migrates out of the staging map.
    std::map<int, CfgNode*> raw;
    for (auto& [id, node] : nodes) raw[id] = node.get();
    for (const Edge& e : edges) {
        CfgNode& parent = *raw[e.from];
        std::unique_ptr<CfgNode>* slot = nullptr;
        if (e.label == "yes") slot = &parent.positive;
        else if (e.label == "no") slot = &parent.negative;
        else if (e.label == "next") slot = &parent.next;
        else throw ValidationError("unknown edge label: " + e.label);
        if (*slot)
            throw ValidationError("duplicate " + e.label + " edge from n" +
                                  std::to_string(e.from));
        *slot = std::move(nodes[e.to]);
    }

    ControlFlowGraph g;
    for (auto& [id, node] : nodes) {
        if (!node) continue;  // moved into a parent slot
        if (g.root) throw ValidationError("graph text has more than one root");
        g.root = std::move(node);
    }
    if (!g.root) throw ValidationError("graph text has no root node");

    // Recover dependency labels from the branch structure so merging and
    // planning behave the same on re-read graphs.
    struct Fix {
        static void apply(CfgNode* n, const std::string& dep) {
            if (!n) return;
            n->task.dependency = (n->positive || n->negative)
                                     ? corpus::dep_label::conditional
                                     : dep;
            apply(n->positive.get(), corpus::dep_label::dependent_positive);
            apply(n->negative.get(), corpus::dep_label::dependent_negative);
            apply(n->next.get(), dep);
        }
    };
    Fix::apply(g.root.get(), corpus::dep_label::sequential);
    g.recount();
    return g;
}

}  // namespace nlplan::cfg
