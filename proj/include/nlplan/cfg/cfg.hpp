#ifndef NLPLAN_CFG_CFG_HPP
#define NLPLAN_CFG_CFG_HPP

#include <memory>
#include <string>
#include <vector>

#include "nlplan/labelers/labelers.hpp"

namespace nlplan::cfg {

/// One task in the control-flow tree. Conditional nodes own a positive and a
/// negative branch (each a chain of nodes linked by `next`); every node may
/// have a sequential successor via `next`.
struct CfgNode {
    labelers::TaskInstance task;
    int node_id = 0;    // ordinal of the task in its instruction
    bool demoted = false;  // dependent re-labeled sequential for lack of a conditional
    std::unique_ptr<CfgNode> positive;
    std::unique_ptr<CfgNode> negative;
    std::unique_ptr<CfgNode> next;

    std::unique_ptr<CfgNode> clone() const;
};

struct ControlFlowGraph {
    std::unique_ptr<CfgNode> root;
    int node_count = 0;

    ControlFlowGraph clone() const;
    void recount();
};

/// Nodes in deterministic pre-order: node, positive subtree, negative
/// subtree, then the next chain. Shared by DOT emission, merging and the
/// graph edit metric.
std::vector<const CfgNode*> preorder(const ControlFlowGraph& graph);

/// Orders tasks into a tree: sequential tasks (and conditionals) chain in
/// instruction order; each dependent hangs off the positive or negative
/// branch of its governing conditional — the nearest conditional searching
/// backward first, then forward. A dependent with no conditional anywhere is
/// demoted to sequential and flagged.
ControlFlowGraph build_graph(const std::vector<labelers::TaskInstance>& tasks);

/// Merges redundant conditionals: two conditional nodes merge when they have
/// the same task type and no conflicting values for any argument type present
/// in both (types present in only one node do not block). The earlier node
/// survives, keeps its id, gains the absorbed node's extra argument types,
/// and the absorbed node's dependents append to the survivor's branch tails.
/// Runs to a fixed point, so the operation is idempotent.
ControlFlowGraph merge_redundant(const ControlFlowGraph& graph);

/// GraphViz text; positive edges labeled "yes", negative "no", sequential
/// "next"; nodes emitted in pre-order.
std::string to_dot(const ControlFlowGraph& graph);

/// Reads the DOT dialect produced by to_dot back into a graph (testing aid).
ControlFlowGraph parse_dot(const std::string& text);

/// Structural equality: same branch/next topology, same task type per node,
/// same argument maps after value normalization (case folding and leading
/// article removal).
bool graphs_equal(const ControlFlowGraph& a, const ControlFlowGraph& b);

std::string graph_to_json(const ControlFlowGraph& graph);
ControlFlowGraph graph_from_json(const std::string& text, const std::string& origin);

}  // namespace nlplan::cfg

#endif
