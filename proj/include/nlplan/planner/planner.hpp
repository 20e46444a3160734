#ifndef NLPLAN_PLANNER_PLANNER_HPP
#define NLPLAN_PLANNER_PLANNER_HPP

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlplan/cfg/cfg.hpp"

namespace nlplan::planner {

// ---------------------------------------------------------------------------
// STRIPS vocabulary.

/// A predicate applied to constant or variable arguments. `negated` marks
/// deletion in operator effects, required absence in preconditions and goals.
/// States are sets of positive fluents; anything absent is false.
struct Fluent {
    std::string predicate;
    std::vector<std::string> args;
    bool negated = false;

    auto operator<=>(const Fluent&) const = default;
    std::string to_string() const;
};

/// Parses a single fluent written as an s-expression, e.g.
/// "(at coffee kitchen)" or "(not (on tv))".
Fluent parse_fluent(const std::string& text, const std::string& origin);

/// A planning state: the set of ground fluents currently true.
using State = std::set<Fluent>;

/// A ground operator application.
struct Action {
    std::string name;
    std::vector<std::string> args;

    auto operator<=>(const Action&) const = default;
    std::string to_string() const;
};

/// An operator schema. Parameters are `?var` names; preconditions and
/// effects may mention parameters or constants. Negated preconditions
/// require absence; negated effects delete.
struct Operator {
    std::string name;
    std::vector<std::string> params;
    std::vector<Fluent> preconditions;
    std::vector<Fluent> effects;
};

/// An untyped STRIPS domain: declared predicates (with arities) plus
/// operator schemas, both kept in declaration order.
struct Domain {
    std::string name;
    std::vector<std::pair<std::string, int>> predicates;
    std::vector<Operator> operators;

    bool declares(const std::string& predicate, int arity) const;
    const Operator* find_operator(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Task templates.

/// Schema mapping one task type to a goal. `$Type` placeholders in the
/// fluent patterns are substituted with the task's argument values.
/// `assumed_init` lists facts the task presumes true; `when_present`
/// adds extra assumed facts only when the named optional argument was
/// actually extracted (e.g. a source location for taking).
struct TaskTemplate {
    std::string task_type;
    std::vector<std::string> required_args;
    std::vector<std::string> optional_args;
    std::vector<std::string> goal;
    std::vector<std::string> assumed_init;
    std::map<std::string, std::vector<std::string>> when_present;

    /// Checks that the goal is nonempty and every placeholder is a
    /// required or optional argument type. Throws ConfigError.
    void validate() const;
};

/// One task bound to concrete constants: the inherited world state plus the
/// template's assumed facts, and the instantiated goal.
struct GroundedProblem {
    int node_id = 0;
    State init;
    std::vector<Fluent> goal;
    std::optional<std::vector<Action>> plan;
};

/// Raised instead of a problem when a task lacks a required argument (or
/// only has an unresolved pronoun for it).
struct ClarificationRequest {
    int node_id = 0;
    std::string task_type;
    std::vector<std::string> missing_args;
};

// ---------------------------------------------------------------------------
// Conditional plans.

/// Per-node planning record. The tree mirrors the control-flow graph:
/// `positive`/`negative` hang off conditionals, `next` chains siblings.
/// `branch` names the chain the node sits on ("main", "positive" or
/// "negative") and `parent` is the conditional owning that branch (-1 on
/// the main chain). `status` is one of "planned", "clarification",
/// "unsolvable" or "unplanned" (descendant of a failed node).
struct PlanNode {
    int node_id = 0;
    std::string task_type;
    std::string branch = "main";
    int parent = -1;
    std::string status = "planned";
    std::optional<GroundedProblem> problem;
    std::optional<ClarificationRequest> clarification;
    std::string failure;

    std::unique_ptr<PlanNode> positive;
    std::unique_ptr<PlanNode> negative;
    std::unique_ptr<PlanNode> next;
};

struct ConditionalPlan {
    std::unique_ptr<PlanNode> root;

    /// Depth-first lookup by task ordinal; nullptr when absent.
    const PlanNode* find(int node_id) const;
};

// ---------------------------------------------------------------------------
// Operations.

/// Maps an argument value to a planning constant: lowercases, strips a
/// leading article, folds first-person pronouns to "speaker" and
/// second-person to "robot", and replaces characters outside
/// [a-z0-9_-] with '-'.
std::string constant_of(const std::string& value);

/// Finds the template for a task type; throws ConfigError when missing.
const TaskTemplate& template_for(const std::vector<TaskTemplate>& templates,
                                 const std::string& task_type);

/// Instantiates a task against the current world state. Returns a
/// clarification request when a required argument is missing or resolves
/// to a pronoun; otherwise a problem whose init is the world plus the
/// template's assumed facts. Throws ConfigError when a template fluent
/// uses an undeclared predicate.
std::variant<GroundedProblem, ClarificationRequest> ground(
    const cfg::CfgNode& node, const TaskTemplate& tmpl, const State& world,
    const Domain& domain);

/// Breadth-first search for a shortest action sequence from init to goal.
/// Duplicate states are pruned; an empty plan is returned when the goal
/// already holds. Throws UnsolvableError (reporting states explored and
/// the frontier size) when the budget of expansions is exhausted or the
/// reachable space contains no goal state.
std::vector<Action> strips_plan(const GroundedProblem& problem,
                                const Domain& domain,
                                long long budget = 1000000);

/// Replays a plan by operator effects: checks each action's preconditions
/// against the evolving state (throwing ValidationError on a violation)
/// and applies deletes then adds. Returns the final state.
State apply_plan(const State& init, const std::vector<Action>& plan,
                 const Domain& domain);

/// True when every positive goal fluent is in the state and no negated
/// goal fluent is.
bool satisfies(const State& state, const std::vector<Fluent>& goal);

/// Plans every node of a graph. Sequential siblings thread: each node's
/// inherited world is the previous node's init with its plan applied.
/// A conditional's branches start from its two outcome states — the
/// post-plan state with the condition asserted (for check_state, the
/// `($State $Object)` fluent; otherwise the goal fluents themselves) or
/// retracted — while its `next` sibling starts from the outcome-neutral
/// post-plan state. Clarifications and unsolvable nodes are recorded and
/// their descendants marked unplanned.
ConditionalPlan plan_graph(const cfg::ControlFlowGraph& graph,
                           const std::vector<TaskTemplate>& templates,
                           const Domain& domain, const State& world,
                           long long budget = 1000000);

/// One JSON object per line, one line per node in pre-order:
/// {"node_id", "task_type", "branch", "parent", "status", "actions": [...]}
/// plus "missing_args" or "failure" where applicable.
std::string plan_script(const ConditionalPlan& plan);

// ---------------------------------------------------------------------------
// PDDL I/O (STRIPS subset, :requirements :strips).

/// Renders a problem (and the domain it is grounded against) as PDDL text.
/// Objects and init fluents are emitted in sorted order so output is
/// deterministic. Returns {domain_text, problem_text}.
std::pair<std::string, std::string> emit_pddl(const GroundedProblem& problem,
                                              const Domain& domain);

/// A parsed PDDL problem file.
struct PddlProblem {
    std::string name;
    std::string domain;
    std::vector<std::string> objects;
    State init;
    std::vector<Fluent> goal;
};

Domain parse_domain_pddl(const std::string& text, const std::string& origin);
Domain read_domain_pddl(const std::string& path);
PddlProblem parse_problem_pddl(const std::string& text,
                               const std::string& origin);

// ---------------------------------------------------------------------------
// Data files.

/// Templates ship as JSON: {"templates": [{"task_type", "required_args",
/// "optional_args"?, "goal", "assumed_init"?, "when_present"?}, ...]}.
std::vector<TaskTemplate> parse_templates(const std::string& text,
                                          const std::string& origin);
std::vector<TaskTemplate> read_templates(const std::string& path);

/// World files list one fluent per line ('#' comments, blank lines
/// ignored). Negated fluents are rejected: states are closed-world.
State parse_world(const std::string& text, const std::string& origin);
State read_world(const std::string& path);

/// Checks every fluent against the domain's predicate declarations.
/// Throws ValidationError naming `origin` on an unknown predicate or an
/// arity mismatch.
void validate_state(const State& state, const Domain& domain,
                    const std::string& origin);

}  // namespace nlplan::planner

#endif
