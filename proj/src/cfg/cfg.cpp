#include "nlplan/cfg/cfg.hpp"

#include <algorithm>
#include <map>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"

namespace nlplan::cfg {

namespace {

using corpus::dep_label::conditional;
using corpus::dep_label::dependent_negative;
using corpus::dep_label::dependent_positive;
using corpus::dep_label::sequential;

void collect_preorder(const CfgNode* node, std::vector<const CfgNode*>& out) {
    if (!node) return;
    out.push_back(node);
    collect_preorder(node->positive.get(), out);
    collect_preorder(node->negative.get(), out);
    collect_preorder(node->next.get(), out);
}

void append_to_chain(std::unique_ptr<CfgNode>& head, std::unique_ptr<CfgNode> node) {
    if (!head) {
        head = std::move(node);
        return;
    }
    CfgNode* tail = head.get();
    while (tail->next) tail = tail->next.get();
    tail->next = std::move(node);
}

std::map<std::string, std::vector<std::string>> normalized_args(
    const labelers::TaskInstance& task) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [type, values] : task.arguments) {
        std::vector<std::string> norm;
        norm.reserve(values.size());
        for (const auto& v : values) norm.push_back(normalize_value(v));
        std::sort(norm.begin(), norm.end());
        out[type] = std::move(norm);
    }
    return out;
}

// "No dissimilar argument values": every argument type present in both nodes
// must carry the same value multiset; one-sided types never block.
bool mergeable(const CfgNode& a, const CfgNode& b) {
    if (a.task.task_type != b.task.task_type) return false;
    auto na = normalized_args(a.task);
    auto nb = normalized_args(b.task);
    for (const auto& [type, values] : na) {
        auto it = nb.find(type);
        if (it != nb.end() && it->second != values) return false;
    }
    return true;
}

// The unique_ptr slot that owns `target`, searched over the whole tree.
std::unique_ptr<CfgNode>* owner_slot(std::unique_ptr<CfgNode>& slot, const CfgNode* target) {
    if (!slot) return nullptr;
    if (slot.get() == target) return &slot;
    for (auto* child : {&slot->positive, &slot->negative, &slot->next})
        if (auto* found = owner_slot(*child, target)) return found;
    return nullptr;
}

}  // namespace

std::unique_ptr<CfgNode> CfgNode::clone() const {
    auto copy = std::make_unique<CfgNode>();
    copy->task = task;
    copy->node_id = node_id;
    copy->demoted = demoted;
    if (positive) copy->positive = positive->clone();
    if (negative) copy->negative = negative->clone();
    if (next) copy->next = next->clone();
    return copy;
}

ControlFlowGraph ControlFlowGraph::clone() const {
    ControlFlowGraph g;
    if (root) g.root = root->clone();
    g.node_count = node_count;
    return g;
}

void ControlFlowGraph::recount() {
    std::vector<const CfgNode*> nodes;
    collect_preorder(root.get(), nodes);
    node_count = static_cast<int>(nodes.size());
}

std::vector<const CfgNode*> preorder(const ControlFlowGraph& graph) {
    std::vector<const CfgNode*> out;
    collect_preorder(graph.root.get(), out);
    return out;
}

ControlFlowGraph build_graph(const std::vector<labelers::TaskInstance>& tasks) {
    if (tasks.empty()) throw ValidationError("cannot build a graph from zero tasks");

    const int n = static_cast<int>(tasks.size());
    std::vector<std::unique_ptr<CfgNode>> nodes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (!corpus::is_dependency_label(tasks[static_cast<std::size_t>(i)].dependency)) {
            throw ValidationError("task " + std::to_string(i) +
                                  " has an unknown dependency label: '" +
                                  tasks[static_cast<std::size_t>(i)].dependency + "'");
        }
        nodes[static_cast<std::size_t>(i)] = std::make_unique<CfgNode>();
        nodes[static_cast<std::size_t>(i)]->task = tasks[static_cast<std::size_t>(i)];
        nodes[static_cast<std::size_t>(i)]->node_id = i;
    }

    // Nearest conditional, searching backward first, then forward.
    auto governing_conditional = [&](int i) {
        for (int j = i - 1; j >= 0; --j)
            if (tasks[static_cast<std::size_t>(j)].dependency == conditional) return j;
        for (int j = i + 1; j < n; ++j)
            if (tasks[static_cast<std::size_t>(j)].dependency == conditional) return j;
        return -1;
    };

    std::vector<int> top_level;
    for (int i = 0; i < n; ++i) {
        const std::string& dep = tasks[static_cast<std::size_t>(i)].dependency;
        if (dep == dependent_positive || dep == dependent_negative) {
            int gov = governing_conditional(i);
            if (gov < 0) {
                auto& node = nodes[static_cast<std::size_t>(i)];
                node->task.dependency = sequential;
                node->demoted = true;
                top_level.push_back(i);
                continue;
            }
            auto& branch = (dep == dependent_positive)
                               ? nodes[static_cast<std::size_t>(gov)]->positive
                               : nodes[static_cast<std::size_t>(gov)]->negative;
            append_to_chain(branch, std::move(nodes[static_cast<std::size_t>(i)]));
        } else {
            top_level.push_back(i);
        }
    }

    ControlFlowGraph g;
    // Chain surviving top-level nodes (sequentials and conditionals) in
    // instruction order; dependents already hang off their conditionals.
    for (auto it = top_level.rbegin(); it != top_level.rend(); ++it) {
        auto& node = nodes[static_cast<std::size_t>(*it)];
        node->next = std::move(g.root);
        g.root = std::move(node);
    }
    if (!g.root) throw ValidationError("instruction has dependents but no task chain to anchor");
    g.recount();
    return g;
}

ControlFlowGraph merge_redundant(const ControlFlowGraph& graph) {
    ControlFlowGraph g = graph.clone();
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<const CfgNode*> nodes;
        collect_preorder(g.root.get(), nodes);
        for (std::size_t i = 0; i < nodes.size() && !changed; ++i) {
            if (nodes[i]->task.dependency != conditional) continue;
            for (std::size_t j = i + 1; j < nodes.size() && !changed; ++j) {
                if (nodes[j]->task.dependency != conditional) continue;
                if (!mergeable(*nodes[i], *nodes[j])) continue;

                auto* survivor = const_cast<CfgNode*>(nodes[i]);
                auto* slot = owner_slot(g.root, nodes[j]);
                if (!slot) throw InternalError("merge target not owned by its own graph");
                std::unique_ptr<CfgNode> absorbed = std::move(*slot);
                *slot = std::move(absorbed->next);  // splice out of its chain
                append_to_chain(survivor->positive, std::move(absorbed->positive));
                append_to_chain(survivor->negative, std::move(absorbed->negative));
                for (const auto& [type, values] : absorbed->task.arguments)
                    if (!survivor->task.arguments.count(type))
                        survivor->task.arguments[type] = values;
                changed = true;
            }
        }
    }
    g.recount();
    return g;
}

bool graphs_equal(const ControlFlowGraph& a, const ControlFlowGraph& b) {
    struct Cmp {
        static bool nodes(const CfgNode* x, const CfgNode* y) {
            if (!x || !y) return x == y;
            if (x->task.task_type != y->task.task_type) return false;
            if (normalized_args(x->task) != normalized_args(y->task)) return false;
            return nodes(x->positive.get(), y->positive.get()) &&
                   nodes(x->negative.get(), y->negative.get()) &&
                   nodes(x->next.get(), y->next.get());
        }
    };
    return Cmp::nodes(a.root.get(), b.root.get());
}

}  // namespace nlplan::cfg
