#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/common/error.hpp"
#include "nlplan/common/rng.hpp"
#include "nlplan/corpus/types.hpp"
#include "nlplan/labelers/labelers.hpp"
#include "nlplan/planner/planner.hpp"

using namespace nlplan;
using planner::Action;
using planner::Domain;
using planner::Fluent;
using planner::GroundedProblem;
using planner::State;
using planner::TaskTemplate;

namespace {

Fluent fl(std::string pred, std::vector<std::string> args, bool neg = false) {
    return Fluent{std::move(pred), std::move(args), neg};
}

labelers::TaskInstance task(
    std::string type, std::string dep,
    std::map<std::string, std::vector<std::string>> args, int trigger = 0) {
    labelers::TaskInstance t;
    t.task_type = std::move(type);
    t.dependency = std::move(dep);
    t.arguments = std::move(args);
    t.trigger_index = trigger;
    return t;
}

// The shipped household data, loaded once.
struct HouseholdData {
    Domain domain;
    std::vector<TaskTemplate> templates;
    State world;

    static const HouseholdData& get() {
        static HouseholdData data{
            planner::read_domain_pddl(std::string(NLPLAN_DATA_DIR) +
                                      "/domain.pddl"),
            planner::read_templates(std::string(NLPLAN_DATA_DIR) +
                                    "/templates.json"),
            planner::read_world(std::string(NLPLAN_DATA_DIR) + "/world.facts")};
        return data;
    }
};

// Minimal mover world used by the single-step examples.
Domain mover_domain() {
    Domain d;
    d.name = "mover";
    d.predicates = {{"robot-at", 1}, {"location", 1}};
    planner::Operator move;
    move.name = "move";
    move.params = {"?from", "?to"};
    move.preconditions = {fl("robot-at", {"?from"}),
                          fl("location", {"?from"}), fl("location", {"?to"})};
    move.effects = {fl("robot-at", {"?to"}), fl("robot-at", {"?from"}, true)};
    d.operators = {move};
    return d;
}

// Checks replay validity everywhere and, along every chain, that each
// planned node's init re-derives exactly from its predecessor's final
// state by grounding the same task again.
void check_threading(const cfg::CfgNode* g, const planner::PlanNode* p,
                     const HouseholdData& d) {
    if (!g) {
        CHECK(p == nullptr);
        return;
    }
    REQUIRE(p != nullptr);
    CHECK(p->node_id == g->node_id);
    CHECK(p->task_type == g->task.task_type);
    if (p->status == "planned") {
        REQUIRE(p->problem.has_value());
        REQUIRE(p->problem->plan.has_value());
        State post =
            planner::apply_plan(p->problem->init, *p->problem->plan, d.domain);
        CHECK(planner::satisfies(post, p->problem->goal));
        if (g->next && p->next && p->next->status == "planned") {
            auto expected = planner::ground(
                *g->next,
                planner::template_for(d.templates, g->next->task.task_type),
                post, d.domain);
            REQUIRE(std::holds_alternative<GroundedProblem>(expected));
            CHECK(std::get<GroundedProblem>(expected).init ==
                  p->next->problem->init);
        }
    }
    check_threading(g->positive.get(), p->positive.get(), d);
    check_threading(g->negative.get(), p->negative.get(), d);
    check_threading(g->next.get(), p->next.get(), d);
}

void collect_inits(const planner::PlanNode* p, std::vector<State>* out) {
    if (!p) return;
    if (p->problem) out->push_back(p->problem->init);
    collect_inits(p->positive.get(), out);
    collect_inits(p->negative.get(), out);
    collect_inits(p->next.get(), out);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("fluents and actions render as s-expressions") {
    CHECK(fl("at", {"coffee", "kitchen"}).to_string() ==
          "(at coffee kitchen)");
    CHECK(fl("on", {"tv"}, true).to_string() == "(not (on tv))");
    CHECK(fl("hand-empty", {}).to_string() == "(hand-empty)");
    CHECK(Action{"move", {"kitchen", "table"}}.to_string() ==
          "(move kitchen table)");

    Fluent f = planner::parse_fluent("(not (on tv))", "test");
    CHECK(f.predicate == "on");
    CHECK(f.negated);
    CHECK(f.args == std::vector<std::string>{"tv"});
    CHECK(planner::parse_fluent("  (At Coffee Kitchen) ", "test").to_string() ==
          "(at coffee kitchen)");

    CHECK_THROWS_AS(planner::parse_fluent("(at coffee", "test"),
                    ValidationError);
    CHECK_THROWS_AS(planner::parse_fluent("(at) extra", "test"),
                    ValidationError);
    CHECK_THROWS_AS(planner::parse_fluent("()", "test"), ValidationError);
    CHECK_THROWS_AS(planner::parse_fluent("atom", "test"), ValidationError);
}

TEST_CASE("domain parsing rejects malformed input") {
    auto parse = [](const std::string& text) {
        return planner::parse_domain_pddl(text, "test");
    };
    const std::string ok =
        "(define (domain d) (:requirements :strips)"
        " (:predicates (p ?x))"
        " (:action a :parameters (?x) :precondition (p ?x)"
        "  :effect (not (p ?x))))";
    CHECK(parse(ok).name == "d");
    CHECK(parse(ok).operators.size() == 1);
    CHECK(parse(ok).declares("p", 1));
    CHECK_FALSE(parse(ok).declares("p", 2));

    CHECK_THROWS_AS(parse("(defun (domain d))"), ValidationError);
    CHECK_THROWS_AS(parse("(define (domain d) (:functions (f)))"),
                    ValidationError);
    CHECK_THROWS_AS(parse("(define (domain d) (:requirements :typing))"),
                    ValidationError);
    // Unbound variable in an effect.
    CHECK_THROWS_AS(
        parse("(define (domain d) (:predicates (p ?x))"
              " (:action a :parameters (?x) :effect (p ?y)))"),
        ValidationError);
    // Undeclared predicate.
    CHECK_THROWS_AS(
        parse("(define (domain d) (:predicates (p ?x))"
              " (:action a :parameters (?x) :effect (q ?x)))"),
        ValidationError);
    // Effectless action and dangling keyword.
    CHECK_THROWS_AS(
        parse("(define (domain d) (:predicates (p ?x))"
              " (:action a :parameters (?x)))"),
        ValidationError);
    CHECK_THROWS_AS(
        parse("(define (domain d) (:predicates (p ?x))"
              " (:action a :parameters (?x) :effect (p ?x) :precondition))"),
        ValidationError);
    CHECK_THROWS_AS(parse("(define (domain d) (:predicates (p x)))"),
                    ValidationError);
}

TEST_CASE("shipped household data loads and covers every task type") {
    const auto& d = HouseholdData::get();
    CHECK(d.domain.name == "household");
    CHECK(d.domain.operators.size() == 8);
    CHECK(d.domain.declares("delivered", 2));
    CHECK(d.domain.declares("hot", 1));
    CHECK_NOTHROW(planner::validate_state(d.world, d.domain, "world"));
    for (const auto& type : corpus::default_task_types())
        CHECK_NOTHROW(planner::template_for(d.templates, type));
    CHECK_THROWS_AS(planner::template_for(d.templates, "juggling"),
                    ConfigError);
}

TEST_CASE("template and world files are validated") {
    auto tparse = [](const std::string& text) {
        return planner::parse_templates(text, "test");
    };
    CHECK_THROWS_AS(tparse("not json"), ConfigError);
    CHECK_THROWS_AS(tparse("{\"templates\": []}"), ConfigError);
    CHECK_THROWS_AS(
        tparse("{\"templates\": [{\"task_type\": \"going\","
               " \"required_args\": [\"Location\"], \"goal\": []}]}"),
        ConfigError);
    // Placeholder not among the declared arguments.
    CHECK_THROWS_AS(
        tparse("{\"templates\": [{\"task_type\": \"going\","
               " \"required_args\": [\"Location\"],"
               " \"goal\": [\"(robot-at $Device)\"]}]}"),
        ConfigError);
    // when_present keyed by a non-optional argument.
    CHECK_THROWS_AS(
        tparse("{\"templates\": [{\"task_type\": \"going\","
               " \"required_args\": [\"Location\"],"
               " \"goal\": [\"(robot-at $Location)\"],"
               " \"when_present\": {\"Location\": []}}]}"),
        ConfigError);
    CHECK_THROWS_AS(
        tparse("{\"templates\": ["
               "{\"task_type\": \"going\", \"required_args\": [],"
               " \"goal\": [\"(hand-empty)\"]},"
               "{\"task_type\": \"going\", \"required_args\": [],"
               " \"goal\": [\"(hand-empty)\"]}]}"),
        ConfigError);
    CHECK_THROWS_AS(planner::read_templates("/nonexistent/t.json"),
                    ConfigError);

    State w = planner::parse_world("# comment\n\n  (at coffee kitchen)\n",
                                   "test");
    CHECK(w == State{fl("at", {"coffee", "kitchen"})});
    CHECK_THROWS_AS(planner::parse_world("(not (on tv))\n", "test"),
                    ValidationError);
    CHECK_THROWS_AS(planner::read_world("/nonexistent/w.facts"), ConfigError);

    Domain mover = mover_domain();
    CHECK_THROWS_AS(
        planner::validate_state({fl("holding", {"pen"})}, mover, "w"),
        ValidationError);
}

TEST_CASE("argument values map to planning constants") {
    CHECK(planner::constant_of("the coffee") == "coffee");
    CHECK(planner::constant_of("Tea") == "tea");
    CHECK(planner::constant_of("me") == "speaker");
    CHECK(planner::constant_of("I") == "speaker");
    CHECK(planner::constant_of("you") == "robot");
    CHECK(planner::constant_of("living room") == "living-room");
    CHECK(planner::constant_of("an umbrella") == "umbrella");
}

TEST_CASE("grounding instantiates goals and assumed facts") {
    const auto& d = HouseholdData::get();

    cfg::CfgNode node;
    node.node_id = 3;
    node.task = task("bringing", corpus::dep_label::sequential,
                     {{"Object", {"the coffee"}}, {"Goal", {"me"}}});
    auto result = planner::ground(
        node, planner::template_for(d.templates, "bringing"), d.world,
        d.domain);
    REQUIRE(std::holds_alternative<GroundedProblem>(result));
    const auto& problem = std::get<GroundedProblem>(result);
    CHECK(problem.node_id == 3);
    CHECK(problem.goal ==
          std::vector<Fluent>{fl("delivered", {"coffee", "speaker"})});
    CHECK(problem.init.count(fl("graspable", {"coffee"})) == 1);
    for (const auto& f : d.world) CHECK(problem.init.count(f) == 1);
    CHECK_FALSE(problem.plan.has_value());

    // Optional source: assumed placement only when the argument is there.
    cfg::CfgNode take;
    take.node_id = 0;
    take.task = task("taking", corpus::dep_label::sequential,
                     {{"Object", {"the milk"}}, {"Source", {"the fridge"}}});
    auto with_source = planner::ground(
        take, planner::template_for(d.templates, "taking"), d.world, d.domain);
    CHECK(std::get<GroundedProblem>(with_source)
              .init.count(fl("at", {"milk", "fridge"})) == 1);
    take.task.arguments.erase("Source");
    auto without = planner::ground(
        take, planner::template_for(d.templates, "taking"), d.world, d.domain);
    CHECK(std::holds_alternative<GroundedProblem>(without));

    // Missing required arguments, in template order.
    cfg::CfgNode bare;
    bare.node_id = 7;
    bare.task = task("bringing", corpus::dep_label::sequential, {});
    auto missing = planner::ground(
        bare, planner::template_for(d.templates, "bringing"), d.world,
        d.domain);
    REQUIRE(std::holds_alternative<planner::ClarificationRequest>(missing));
    const auto& req = std::get<planner::ClarificationRequest>(missing);
    CHECK(req.node_id == 7);
    CHECK(req.task_type == "bringing");
    CHECK(req.missing_args == std::vector<std::string>{"Object", "Goal"});

    // An unresolved pronoun is as unusable as a missing argument.
    bare.task.arguments = {{"Object", {"it"}}, {"Goal", {"me"}}};
    auto pronoun = planner::ground(
        bare, planner::template_for(d.templates, "bringing"), d.world,
        d.domain);
    REQUIRE(std::holds_alternative<planner::ClarificationRequest>(pronoun));
    CHECK(std::get<planner::ClarificationRequest>(pronoun).missing_args ==
          std::vector<std::string>{"Object"});

    // Template applied to the wrong task type.
    CHECK_THROWS_AS(
        planner::ground(bare, planner::template_for(d.templates, "going"),
                        d.world, d.domain),
        ConfigError);
}

TEST_CASE("one-step relocation yields exactly the single move") {
    Domain mover = mover_domain();
    GroundedProblem problem;
    problem.init = {fl("robot-at", {"kitchen"}), fl("location", {"kitchen"}),
                    fl("location", {"table"})};
    problem.goal = {fl("robot-at", {"table"})};

    auto plan = planner::strips_plan(problem, mover);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0] == Action{"move", {"kitchen", "table"}});
    CHECK(planner::satisfies(
        planner::apply_plan(problem.init, plan, mover), problem.goal));

    // Goal already true: the empty plan.
    GroundedProblem noop = problem;
    noop.goal = {fl("robot-at", {"kitchen"})};
    CHECK(planner::strips_plan(noop, mover).empty());

    // Unreachable: garden is not a location, so no move can enter it.
    GroundedProblem stuck = problem;
    stuck.goal = {fl("robot-at", {"garden"})};
    try {
        planner::strips_plan(stuck, mover);
        FAIL("expected UnsolvableError");
    } catch (const UnsolvableError& e) {
        CHECK(std::string(e.what()).find("unreachable") != std::string::npos);
        CHECK(std::string(e.what()).find("frontier 0") != std::string::npos);
    }
}

TEST_CASE("negated goals and preconditions are honored") {
    Domain d;
    d.name = "switches";
    d.predicates = {{"on", 1}, {"device", 1}};
    planner::Operator on;
    on.name = "switch-on";
    on.params = {"?d"};
    on.preconditions = {fl("device", {"?d"}), fl("on", {"?d"}, true)};
    on.effects = {fl("on", {"?d"})};
    planner::Operator off;
    off.name = "switch-off";
    off.params = {"?d"};
    off.preconditions = {fl("device", {"?d"}), fl("on", {"?d"})};
    off.effects = {fl("on", {"?d"}, true)};
    d.operators = {on, off};

    GroundedProblem problem;
    problem.init = {fl("device", {"tv"}), fl("on", {"tv"})};
    problem.goal = {fl("on", {"tv"}, true)};
    auto plan = planner::strips_plan(problem, d);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0] == Action{"switch-off", {"tv"}});

    // The negated precondition blocks switching an already-on device.
    problem.goal = {fl("on", {"tv"})};
    CHECK(planner::strips_plan(problem, d).empty());
    State after = planner::apply_plan(problem.init, plan, d);
    CHECK(after.count(fl("on", {"tv"})) == 0);

    // Budget exhaustion reports the frontier.
    GroundedProblem chain;
    chain.init = {fl("device", {"a"}), fl("device", {"b"})};
    chain.goal = {fl("on", {"a"}), fl("on", {"b"})};
    try {
        planner::strips_plan(chain, d, 1);
        FAIL("expected UnsolvableError");
    } catch (const UnsolvableError& e) {
        CHECK(std::string(e.what()).find("budget") != std::string::npos);
        CHECK(std::string(e.what()).find("frontier") != std::string::npos);
    }
    CHECK(planner::strips_plan(chain, d, 100).size() == 2);
    CHECK_THROWS_AS(planner::strips_plan(chain, d, 0), ConfigError);
}

TEST_CASE("replay rejects invalid action sequences") {
    Domain mover = mover_domain();
    State init = {fl("robot-at", {"kitchen"}), fl("location", {"kitchen"}),
                  fl("location", {"table"})};

    CHECK_THROWS_AS(
        planner::apply_plan(init, {Action{"fly", {"kitchen"}}}, mover),
        ValidationError);
    CHECK_THROWS_AS(planner::apply_plan(init, {Action{"move", {"kitchen"}}},
                                        mover),
                    ValidationError);
    // Precondition violated: the robot is not at the table.
    CHECK_THROWS_AS(
        planner::apply_plan(init, {Action{"move", {"table", "kitchen"}}},
                            mover),
        ValidationError);

    // Deletes apply before adds: an effect may delete and re-add a fluent.
    Domain d;
    d.name = "cycle";
    d.predicates = {{"p", 0}};
    planner::Operator op;
    op.name = "spin";
    op.params = {};
    op.preconditions = {fl("p", {})};
    op.effects = {fl("p", {}, true), fl("p", {})};
    d.operators = {op};
    State result = planner::apply_plan({fl("p", {})}, {Action{"spin", {}}}, d);
    CHECK(result.count(fl("p", {})) == 1);
}

TEST_CASE("search matches an exhaustive oracle on random domains") {
    Rng rng(20240817);
    int solvable = 0, unsolvable = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const int P = 4 + static_cast<int>(rng.uniform_int(0, 4));
        Domain d;
        d.name = "toy";
        for (int i = 0; i < P; ++i)
            d.predicates.emplace_back("q" + std::to_string(i), 0);

        struct Mask {
            unsigned pre_pos = 0, pre_neg = 0, add = 0, del = 0;
        };
        std::vector<Mask> masks;
        const int M = 4 + static_cast<int>(rng.uniform_int(0, 6));
        for (int m = 0; m < M; ++m) {
            Mask mask;
            planner::Operator op;
            op.name = "op" + std::to_string(m);
            for (int i = 0; i < P; ++i) {
                unsigned long long r = rng.uniform_int(0, 9);
                if (r < 2) {
                    op.preconditions.push_back(fl("q" + std::to_string(i), {}));
                    mask.pre_pos |= 1u << i;
                } else if (r == 2) {
                    op.preconditions.push_back(
                        fl("q" + std::to_string(i), {}, true));
                    mask.pre_neg |= 1u << i;
                }
            }
            for (int i = 0; i < P; ++i) {
                unsigned long long r = rng.uniform_int(0, 9);
                if (r < 2) {
                    op.effects.push_back(fl("q" + std::to_string(i), {}));
                    mask.add |= 1u << i;
                } else if (r == 2) {
                    op.effects.push_back(fl("q" + std::to_string(i), {}, true));
                    mask.del |= 1u << i;
                }
            }
            if (op.effects.empty()) {
                op.effects.push_back(fl("q0", {}));
                mask.add |= 1u;
            }
            masks.push_back(mask);
            d.operators.push_back(std::move(op));
        }

        GroundedProblem problem;
        unsigned init_mask = 0;
        for (int i = 0; i < P; ++i)
            if (rng.chance(0.5)) {
                problem.init.insert(fl("q" + std::to_string(i), {}));
                init_mask |= 1u << i;
            }
        unsigned goal_pos = 0, goal_neg = 0;
        const int goals = 1 + static_cast<int>(rng.uniform_int(0, 1));
        for (int gi = 0; gi < goals; ++gi) {
            int i = static_cast<int>(rng.uniform_int(0, P - 1));
            if (rng.chance(0.25)) {
                problem.goal.push_back(fl("q" + std::to_string(i), {}, true));
                goal_neg |= 1u << i;
            } else {
                problem.goal.push_back(fl("q" + std::to_string(i), {}));
                goal_pos |= 1u << i;
            }
        }

        // Independent breadth-first distance over bitmask states.
        std::vector<int> dist(1u << P, -1);
        std::vector<unsigned> queue = {init_mask};
        dist[init_mask] = 0;
        int best = -1;
        auto is_goal = [&](unsigned s) {
            return (s & goal_pos) == goal_pos && (s & goal_neg) == 0;
        };
        if (is_goal(init_mask)) best = 0;
        for (size_t head = 0; head < queue.size() && best < 0; ++head) {
            unsigned s = queue[head];
            for (const auto& mask : masks) {
                if ((s & mask.pre_pos) != mask.pre_pos) continue;
                if ((s & mask.pre_neg) != 0) continue;
                unsigned t = (s & ~mask.del) | mask.add;
                if (dist[t] >= 0) continue;
                dist[t] = dist[s] + 1;
                if (is_goal(t)) {
                    best = dist[t];
                    break;
                }
                queue.push_back(t);
            }
        }

        if (best >= 0) {
            ++solvable;
            auto plan = planner::strips_plan(problem, d);
            CHECK(static_cast<int>(plan.size()) == best);
            CHECK(planner::satisfies(
                planner::apply_plan(problem.init, plan, d), problem.goal));
            CHECK(planner::strips_plan(problem, d) == plan);
        } else {
            ++unsolvable;
            CHECK_THROWS_AS(planner::strips_plan(problem, d), UnsolvableError);
        }
    }
    CHECK(solvable > 20);
    CHECK(unsolvable > 5);
}

TEST_CASE("household chains thread state from task to task") {
    const auto& d = HouseholdData::get();
    std::vector<labelers::TaskInstance> tasks = {
        task("going", corpus::dep_label::sequential,
             {{"Location", {"the office"}}}, 0),
        task("taking", corpus::dep_label::sequential,
             {{"Object", {"the pen"}}}, 5),
        task("bringing", corpus::dep_label::sequential,
             {{"Object", {"the pen"}}, {"Goal", {"me"}}}, 9),
    };
    cfg::ControlFlowGraph graph = cfg::build_graph(tasks);
    planner::ConditionalPlan plan =
        planner::plan_graph(graph, d.templates, d.domain, d.world);

    REQUIRE(plan.root != nullptr);
    const planner::PlanNode* going = plan.root.get();
    CHECK(going->status == "planned");
    REQUIRE(going->problem->plan.has_value());
    CHECK(*going->problem->plan ==
          std::vector<Action>{{"move", {"kitchen", "office"}}});

    const planner::PlanNode* taking = going->next.get();
    REQUIRE(taking != nullptr);
    CHECK(*taking->problem->plan ==
          std::vector<Action>{{"pick", {"pen", "office"}}});

    const planner::PlanNode* bringing = taking->next.get();
    REQUIRE(bringing != nullptr);
    CHECK(*bringing->problem->plan ==
          std::vector<Action>{{"move", {"office", "couch"}},
                              {"deliver", {"pen", "speaker", "couch"}}});
    CHECK(bringing->next == nullptr);

    check_threading(graph.root.get(), plan.root.get(), d);
    CHECK(plan.find(2) == bringing);
    CHECK(plan.find(99) == nullptr);
}

TEST_CASE("conditional branches start from their outcome states") {
    const auto& d = HouseholdData::get();
    std::vector<labelers::TaskInstance> tasks = {
        task("check_state", corpus::dep_label::conditional,
             {{"Object", {"the coffee"}}, {"State", {"hot"}}}, 4),
        task("bringing", corpus::dep_label::dependent_positive,
             {{"Object", {"the coffee"}}, {"Goal", {"me"}}}, 6),
        task("switching_on", corpus::dep_label::dependent_negative,
             {{"Device", {"the kettle"}}}, 12),
    };
    cfg::ControlFlowGraph graph = cfg::build_graph(tasks);
    planner::ConditionalPlan plan =
        planner::plan_graph(graph, d.templates, d.domain, d.world);

    const planner::PlanNode* cond = plan.root.get();
    REQUIRE(cond != nullptr);
    CHECK(*cond->problem->plan ==
          std::vector<Action>{{"check", {"hot", "coffee", "kitchen"}}});

    const planner::PlanNode* pos = cond->positive.get();
    REQUIRE(pos != nullptr);
    CHECK(pos->branch == "positive");
    CHECK(pos->parent == 0);
    CHECK(pos->problem->init.count(fl("hot", {"coffee"})) == 1);
    CHECK(pos->problem->init.count(fl("known", {"hot", "coffee"})) == 1);
    CHECK(*pos->problem->plan ==
          std::vector<Action>{{"pick", {"coffee", "kitchen"}},
                              {"move", {"kitchen", "couch"}},
                              {"deliver", {"coffee", "speaker", "couch"}}});

    const planner::PlanNode* neg = cond->negative.get();
    REQUIRE(neg != nullptr);
    CHECK(neg->branch == "negative");
    CHECK(neg->problem->init.count(fl("hot", {"coffee"})) == 0);
    CHECK(*neg->problem->plan ==
          std::vector<Action>{{"switch-on", {"kettle", "kitchen"}}});

    // The asserted condition never leaks into any negative-branch init.
    std::vector<State> neg_inits;
    collect_inits(neg, &neg_inits);
    for (const auto& init : neg_inits)
        CHECK(init.count(fl("hot", {"coffee"})) == 0);

    check_threading(graph.root.get(), plan.root.get(), d);
}

TEST_CASE("action conditionals branch on their own goal fluents") {
    const auto& d = HouseholdData::get();

    // Searching as the condition: found on the yes-branch, retracted on no.
    std::vector<labelers::TaskInstance> tasks = {
        task("searching", corpus::dep_label::conditional,
             {{"Object", {"the keys"}}}, 1),
        task("taking", corpus::dep_label::dependent_positive,
             {{"Object", {"the keys"}}}, 5),
        task("going", corpus::dep_label::dependent_negative,
             {{"Location", {"the kitchen"}}}, 9),
    };
    cfg::ControlFlowGraph graph = cfg::build_graph(tasks);
    planner::ConditionalPlan plan =
        planner::plan_graph(graph, d.templates, d.domain, d.world);
    const planner::PlanNode* cond = plan.root.get();
    REQUIRE(cond != nullptr);
    CHECK(*cond->problem->plan ==
          std::vector<Action>{{"move", {"kitchen", "desk"}},
                              {"search", {"keys", "desk"}}});
    CHECK(cond->positive->problem->init.count(fl("found", {"keys"})) == 1);
    CHECK(cond->negative->problem->init.count(fl("found", {"keys"})) == 0);
    check_threading(graph.root.get(), plan.root.get(), d);

    // Switching on as the condition (device already on: empty plan).
    std::vector<labelers::TaskInstance> tasks2 = {
        task("switching_on", corpus::dep_label::conditional,
             {{"Device", {"the heater"}}}, 1),
        task("going", corpus::dep_label::dependent_positive,
             {{"Location", {"the balcony"}}}, 5),
        task("switching_off", corpus::dep_label::dependent_negative,
             {{"Device", {"the light"}}}, 9),
    };
    cfg::ControlFlowGraph graph2 = cfg::build_graph(tasks2);
    planner::ConditionalPlan plan2 =
        planner::plan_graph(graph2, d.templates, d.domain, d.world);
    const planner::PlanNode* cond2 = plan2.root.get();
    REQUIRE(cond2 != nullptr);
    CHECK(cond2->problem->plan->empty());
    CHECK(cond2->positive->problem->init.count(fl("on", {"heater"})) == 1);
    CHECK(cond2->negative->problem->init.count(fl("on", {"heater"})) == 0);
}

TEST_CASE("clarifications and failures leave descendants unplanned") {
    const auto& d = HouseholdData::get();

    // Missing Goal: the node requests clarification, its successor waits.
    std::vector<labelers::TaskInstance> tasks = {
        task("bringing", corpus::dep_label::sequential,
             {{"Object", {"the coffee"}}}, 0),
        task("going", corpus::dep_label::sequential,
             {{"Location", {"the desk"}}}, 4),
    };
    cfg::ControlFlowGraph graph = cfg::build_graph(tasks);
    planner::ConditionalPlan plan =
        planner::plan_graph(graph, d.templates, d.domain, d.world);
    REQUIRE(plan.root != nullptr);
    CHECK(plan.root->status == "clarification");
    REQUIRE(plan.root->clarification.has_value());
    CHECK(plan.root->clarification->missing_args ==
          std::vector<std::string>{"Goal"});
    CHECK_FALSE(plan.root->problem.has_value());
    REQUIRE(plan.root->next != nullptr);
    CHECK(plan.root->next->status == "unplanned");

    // A conditional that cannot ground leaves both branches unplanned.
    std::vector<labelers::TaskInstance> tasks2 = {
        task("check_state", corpus::dep_label::conditional,
             {{"Object", {"the coffee"}}}, 0),
        task("going", corpus::dep_label::dependent_positive,
             {{"Location", {"the desk"}}}, 4),
        task("going", corpus::dep_label::dependent_negative,
             {{"Location", {"the garden"}}}, 8),
    };
    planner::ConditionalPlan plan2 = planner::plan_graph(
        cfg::build_graph(tasks2), d.templates, d.domain, d.world);
    CHECK(plan2.root->status == "clarification");
    CHECK(plan2.root->positive->status == "unplanned");
    CHECK(plan2.root->negative->status == "unplanned");

    // An impossible goal is recorded and the chain after it stops.
    std::vector<labelers::TaskInstance> tasks3 = {
        task("bringing", corpus::dep_label::sequential,
             {{"Object", {"the unicorn"}}, {"Goal", {"me"}}}, 0),
        task("going", corpus::dep_label::sequential,
             {{"Location", {"the desk"}}}, 4),
    };
    planner::ConditionalPlan plan3 = planner::plan_graph(
        cfg::build_graph(tasks3), d.templates, d.domain, d.world);
    CHECK(plan3.root->status == "unsolvable");
    CHECK(plan3.root->failure.find("unreachable") != std::string::npos);
    REQUIRE(plan3.root->problem.has_value());
    CHECK_FALSE(plan3.root->problem->plan.has_value());
    CHECK(plan3.root->next->status == "unplanned");

    // A world using unknown predicates is rejected outright.
    State bad_world = {fl("levitating", {"robot"})};
    CHECK_THROWS_AS(planner::plan_graph(cfg::build_graph(tasks), d.templates,
                                        d.domain, bad_world),
                    ValidationError);
}

TEST_CASE("plan scripts record every node in pre-order") {
    const auto& d = HouseholdData::get();
    std::vector<labelers::TaskInstance> tasks = {
        task("check_state", corpus::dep_label::conditional,
             {{"Object", {"the coffee"}}, {"State", {"hot"}}}, 4),
        task("bringing", corpus::dep_label::dependent_positive,
             {{"Object", {"the coffee"}}, {"Goal", {"me"}}}, 6),
        task("switching_on", corpus::dep_label::dependent_negative,
             {{"Device", {"the kettle"}}}, 12),
        task("bringing", corpus::dep_label::sequential, {}, 15),
    };
    cfg::ControlFlowGraph graph = cfg::build_graph(tasks);
    planner::ConditionalPlan plan =
        planner::plan_graph(graph, d.templates, d.domain, d.world);
    std::string script = planner::plan_script(plan);

    std::vector<nlohmann::json> lines;
    std::istringstream in(script);
    std::string line;
    while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
    REQUIRE(lines.size() == 4);

    CHECK(lines[0]["node_id"] == 0);
    CHECK(lines[0]["task_type"] == "check_state");
    CHECK(lines[0]["branch"] == "main");
    CHECK(lines[0]["parent"] == -1);
    CHECK(lines[0]["status"] == "planned");
    CHECK(lines[0]["actions"] ==
          nlohmann::json::array({"(check hot coffee kitchen)"}));

    CHECK(lines[1]["node_id"] == 1);
    CHECK(lines[1]["branch"] == "positive");
    CHECK(lines[1]["parent"] == 0);
    CHECK(lines[1]["actions"].size() == 3);

    CHECK(lines[2]["node_id"] == 2);
    CHECK(lines[2]["branch"] == "negative");

    CHECK(lines[3]["node_id"] == 3);
    CHECK(lines[3]["branch"] == "main");
    CHECK(lines[3]["status"] == "clarification");
    CHECK(lines[3]["missing_args"] ==
          nlohmann::json::array({"Object", "Goal"}));
    CHECK(lines[3]["actions"].empty());

    // Pre-order of the script matches the graph walk, and replanning is
    // byte-identical.
    auto order = cfg::preorder(graph);
    REQUIRE(order.size() == lines.size());
    for (size_t i = 0; i < order.size(); ++i)
        CHECK(order[i]->node_id == lines[i]["node_id"].get<int>());
    planner::ConditionalPlan again =
        planner::plan_graph(graph, d.templates, d.domain, d.world);
    CHECK(planner::plan_script(again) == script);
}

TEST_CASE("emitted pddl re-parses to the identical problem") {
    const auto& d = HouseholdData::get();
    cfg::CfgNode node;
    node.node_id = 1;
    node.task = task("bringing", corpus::dep_label::sequential,
                     {{"Object", {"the coffee"}}, {"Goal", {"me"}}});
    auto grounded = planner::ground(
        node, planner::template_for(d.templates, "bringing"), d.world,
        d.domain);
    GroundedProblem problem = std::get<GroundedProblem>(grounded);

    auto [domain_text, problem_text] = planner::emit_pddl(problem, d.domain);
    planner::PddlProblem reparsed =
        planner::parse_problem_pddl(problem_text, "emitted");
    CHECK(reparsed.name == "node-1");
    CHECK(reparsed.domain == "household");
    CHECK(reparsed.init == problem.init);
    CHECK(reparsed.goal == problem.goal);
    CHECK(std::is_sorted(reparsed.objects.begin(), reparsed.objects.end()));

    Domain redomain = planner::parse_domain_pddl(domain_text, "emitted");
    CHECK(redomain.name == d.domain.name);
    CHECK(redomain.predicates == d.domain.predicates);
    CHECK(redomain.operators.size() == d.domain.operators.size());
    auto again = planner::emit_pddl(problem, redomain);
    CHECK(again.first == domain_text);
    CHECK(again.second == problem_text);

    CHECK_THROWS_AS(
        planner::parse_problem_pddl("(define (problem p) (:domain d))", "t"),
        ValidationError);
    CHECK_THROWS_AS(
        planner::parse_problem_pddl(
            "(define (problem p) (:init (not (on tv))) (:goal (on tv)))", "t"),
        ValidationError);
    CHECK_THROWS_AS(planner::parse_problem_pddl("(define (problem p)"
                                                " (:goal (on tv))) junk",
                                                "t"),
                    ValidationError);
}

TEST_CASE("emitted pddl matches the golden files") {
    const auto& d = HouseholdData::get();
    std::vector<labelers::TaskInstance> tasks = {
        task("check_state", corpus::dep_label::conditional,
             {{"Object", {"the coffee"}}, {"State", {"hot"}}}, 4),
        task("bringing", corpus::dep_label::dependent_positive,
             {{"Object", {"the coffee"}}, {"Goal", {"me"}}}, 6),
    };
    cfg::ControlFlowGraph graph = cfg::build_graph(tasks);
    planner::ConditionalPlan plan =
        planner::plan_graph(graph, d.templates, d.domain, d.world);
    REQUIRE(plan.root != nullptr);
    REQUIRE(plan.root->positive != nullptr);
    REQUIRE(plan.root->positive->problem.has_value());

    auto [domain_text, problem_text] =
        planner::emit_pddl(*plan.root->positive->problem, d.domain);
    CHECK(domain_text ==
          slurp(std::string(NLPLAN_GOLDEN_DIR) + "/household_domain.pddl"));
    CHECK(problem_text ==
          slurp(std::string(NLPLAN_GOLDEN_DIR) + "/bring_coffee_problem.pddl"));
    CHECK(planner::plan_script(plan) ==
          slurp(std::string(NLPLAN_GOLDEN_DIR) + "/bring_coffee_script.jsonl"));
}
