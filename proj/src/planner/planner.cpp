#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nlplan/common/error.hpp"
#include "nlplan/corpus/types.hpp"
#include "nlplan/planner/planner.hpp"

namespace nlplan::planner {

namespace {

using nlohmann::json;

const std::set<std::string> kFirstPerson = {"i",  "me", "my",  "mine",
                                            "we", "us", "our", "ours"};
const std::set<std::string> kSecondPerson = {"you", "your", "yours"};
const std::set<std::string> kThirdPerson = {
    "it",   "its",  "they",  "them",  "their", "theirs", "this", "that",
    "these", "those", "him", "his",   "her",   "hers",   "he",   "she"};

std::string lower(std::string s) {
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string strip_article(const std::string& s) {
    for (const char* art : {"the ", "a ", "an "})
        if (s.rfind(art, 0) == 0) return s.substr(std::string(art).size());
    return s;
}

// Substitutes $Name placeholders; returns the names it could not bind.
std::string substitute(const std::string& pattern,
                       const std::map<std::string, std::string>& bindings,
                       std::vector<std::string>* unbound) {
    std::string out;
    size_t i = 0;
    while (i < pattern.size()) {
        if (pattern[i] != '$') {
            out += pattern[i++];
            continue;
        }
        size_t j = i + 1;
        while (j < pattern.size() &&
               (std::isalnum(static_cast<unsigned char>(pattern[j])) ||
                pattern[j] == '_'))
            ++j;
        std::string name = pattern.substr(i + 1, j - i - 1);
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            if (unbound) unbound->push_back(name);
            out += pattern.substr(i, j - i);
        } else {
            out += it->second;
        }
        i = j;
    }
    return out;
}

std::vector<std::string> placeholders_in(const std::string& pattern) {
    std::vector<std::string> names;
    substitute(pattern, {}, &names);
    return names;
}

void check_template_fluent(const Fluent& f, const Domain& domain,
                           const std::string& context) {
    if (!domain.declares(f.predicate, static_cast<int>(f.args.size())))
        throw ConfigError(context + ": fluent " + f.to_string() +
                          " uses a predicate the domain does not declare");
}

// A fully instantiated operator, preconditions split by whether the
// predicate can ever change (static facts are checked once at grounding).
struct GroundAction {
    Action action;
    std::vector<Fluent> dynamic_pre;  // checked against each search state
    std::vector<Fluent> adds;
    std::vector<Fluent> dels;
};

Fluent bind_fluent(const Fluent& pattern,
                   const std::map<std::string, std::string>& bindings) {
    Fluent out;
    out.predicate = pattern.predicate;
    out.negated = pattern.negated;
    out.args.reserve(pattern.args.size());
    for (const auto& a : pattern.args) {
        auto it = bindings.find(a);
        out.args.push_back(it == bindings.end() ? a : it->second);
    }
    return out;
}

bool holds(const State& state, const Fluent& f) {
    Fluent positive = f;
    positive.negated = false;
    bool present = state.count(positive) > 0;
    return f.negated ? !present : present;
}

// Enumerates ground instances of one operator over the constant pool,
// pruning as soon as a fully bound static precondition fails against init.
void enumerate_operator(const Operator& op,
                        const std::vector<std::string>& constants,
                        const std::set<std::string>& static_preds,
                        const State& init,
                        std::vector<GroundAction>* out) {
    std::map<std::string, std::string> bindings;
    std::vector<std::string> stack;

    auto viable = [&](size_t depth) {
        for (const auto& pre : op.preconditions) {
            if (!static_preds.count(pre.predicate)) continue;
            bool bound = true;
            for (const auto& a : pre.args) {
                if (a.empty() || a[0] != '?') continue;
                auto it = bindings.find(a);
                if (it == bindings.end()) {
                    bound = false;
                    break;
                }
                // Only prune on preconditions closed by the newest binding;
                // earlier ones were checked at a shallower depth.
            }
            (void)depth;
            if (bound && !holds(init, bind_fluent(pre, bindings))) return false;
        }
        return true;
    };

    std::function<void(size_t)> recurse = [&](size_t depth) {
        if (depth == op.params.size()) {
            // Final gate: `viable` only sees preconditions as bindings close
            // over them, which misses ones with no variables at all (and any
            // operator without parameters), so re-verify the lot.
            for (const auto& pre : op.preconditions)
                if (static_preds.count(pre.predicate) &&
                    !holds(init, bind_fluent(pre, bindings)))
                    return;
            GroundAction ga;
            ga.action.name = op.name;
            for (const auto& p : op.params) ga.action.args.push_back(bindings.at(p));
            for (const auto& pre : op.preconditions)
                if (!static_preds.count(pre.predicate))
                    ga.dynamic_pre.push_back(bind_fluent(pre, bindings));
            for (const auto& eff : op.effects) {
                Fluent f = bind_fluent(eff, bindings);
                bool negated = f.negated;
                f.negated = false;
                (negated ? ga.dels : ga.adds).push_back(std::move(f));
            }
            out->push_back(std::move(ga));
            return;
        }
        for (const auto& c : constants) {
            bindings[op.params[depth]] = c;
            if (viable(depth)) recurse(depth + 1);
        }
        bindings.erase(op.params[depth]);
    };
    recurse(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates and worlds.

void TaskTemplate::validate() const {
    auto known = [this](const std::string& name, const std::string& extra) {
        if (name == extra) return true;
        for (const auto& r : required_args)
            if (r == name) return true;
        for (const auto& o : optional_args)
            if (o == name) return true;
        return false;
    };
    if (task_type.empty())
        throw ConfigError("task template with empty task_type");
    std::string ctx = "template for " + task_type;
    if (goal.empty()) throw ConfigError(ctx + ": goal must be nonempty");
    for (const auto& pattern : goal)
        for (const auto& name : placeholders_in(pattern))
            if (!known(name, ""))
                throw ConfigError(ctx + ": goal placeholder $" + name +
                                  " is not a declared argument");
    for (const auto& pattern : assumed_init)
        for (const auto& name : placeholders_in(pattern))
            if (!known(name, ""))
                throw ConfigError(ctx + ": assumed_init placeholder $" + name +
                                  " is not a declared argument");
    for (const auto& [arg, patterns] : when_present) {
        bool optional = false;
        for (const auto& o : optional_args) optional |= (o == arg);
        if (!optional)
            throw ConfigError(ctx + ": when_present key '" + arg +
                              "' is not an optional argument");
        for (const auto& pattern : patterns)
            for (const auto& name : placeholders_in(pattern))
                if (!known(name, arg))
                    throw ConfigError(ctx + ": when_present placeholder $" +
                                      name + " is not a declared argument");
    }
}

std::vector<TaskTemplate> parse_templates(const std::string& text,
                                          const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!root.is_object() || !root.contains("templates") ||
        !root["templates"].is_array())
        throw ConfigError(origin + ": expected {\"templates\": [...]}");

    auto string_list = [&origin](const json& j, const std::string& what) {
        if (!j.is_array())
            throw ConfigError(origin + ": " + what + " must be an array");
        std::vector<std::string> out;
        for (const auto& item : j) {
            if (!item.is_string())
                throw ConfigError(origin + ": " + what +
                                  " must contain only strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    };

    std::vector<TaskTemplate> templates;
    std::set<std::string> seen;
    for (const auto& entry : root["templates"]) {
        if (!entry.is_object())
            throw ConfigError(origin + ": each template must be an object");
        TaskTemplate t;
        if (!entry.contains("task_type") || !entry["task_type"].is_string())
            throw ConfigError(origin + ": template missing task_type");
        t.task_type = entry["task_type"].get<std::string>();
        if (!entry.contains("required_args"))
            throw ConfigError(origin + ": template for " + t.task_type +
                              " missing required_args");
        t.required_args = string_list(entry["required_args"], "required_args");
        if (entry.contains("optional_args"))
            t.optional_args = string_list(entry["optional_args"], "optional_args");
        if (!entry.contains("goal"))
            throw ConfigError(origin + ": template for " + t.task_type +
                              " missing goal");
        t.goal = string_list(entry["goal"], "goal");
        if (entry.contains("assumed_init"))
            t.assumed_init = string_list(entry["assumed_init"], "assumed_init");
        if (entry.contains("when_present")) {
            const json& wp = entry["when_present"];
            if (!wp.is_object())
                throw ConfigError(origin + ": when_present must be an object");
            for (auto it = wp.begin(); it != wp.end(); ++it)
                t.when_present[it.key()] =
                    string_list(it.value(), "when_present." + it.key());
        }
        t.validate();
        if (!seen.insert(t.task_type).second)
            throw ConfigError(origin + ": duplicate template for " +
                              t.task_type);
        templates.push_back(std::move(t));
    }
    if (templates.empty())
        throw ConfigError(origin + ": no templates defined");
    return templates;
}

std::vector<TaskTemplate> read_templates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open template file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_templates(buf.str(), path);
}

State parse_world(const std::string& text, const std::string& origin) {
    State world;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string where = origin + ":" + std::to_string(lineno);
        Fluent f = parse_fluent(line.substr(start, end - start + 1), where);
        if (f.negated)
            throw ValidationError(where +
                                  ": world states are closed-world; negated "
                                  "fluents are not allowed");
        world.insert(std::move(f));
    }
    return world;
}

State read_world(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open world file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_world(buf.str(), path);
}

void validate_state(const State& state, const Domain& domain,
                    const std::string& origin) {
    for (const auto& f : state) {
        if (f.negated)
            throw ValidationError(origin + ": negated fluent " + f.to_string() +
                                  " in a state");
        if (!domain.declares(f.predicate, static_cast<int>(f.args.size())))
            throw ValidationError(origin + ": fluent " + f.to_string() +
                                  " uses an undeclared predicate (or wrong "
                                  "arity)");
    }
}

// ---------------------------------------------------------------------------
// Grounding.

std::string constant_of(const std::string& value) {
    std::string v = strip_article(lower(value));
    if (kFirstPerson.count(v)) return "speaker";
    if (kSecondPerson.count(v)) return "robot";
    std::string out;
    for (char c : v) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
            c == '-')
            out += c;
        else
            out += '-';
    }
    return out.empty() ? "-" : out;
}

const TaskTemplate& template_for(const std::vector<TaskTemplate>& templates,
                                 const std::string& task_type) {
    for (const auto& t : templates)
        if (t.task_type == task_type) return t;
    throw ConfigError("no task template for task type '" + task_type + "'");
}

std::variant<GroundedProblem, ClarificationRequest> ground(
    const cfg::CfgNode& node, const TaskTemplate& tmpl, const State& world,
    const Domain& domain) {
    if (node.task.task_type != tmpl.task_type)
        throw ConfigError("template for " + tmpl.task_type +
                          " applied to a " + node.task.task_type + " task");
    std::string ctx = "template for " + tmpl.task_type;

    // A value still reading as a third-person pronoun is an unresolved
    // reference, no more usable than a missing argument.
    auto usable_value = [&](const std::string& arg_type,
                            std::string* out) -> bool {
        auto it = node.task.arguments.find(arg_type);
        if (it == node.task.arguments.end() || it->second.empty()) return false;
        const std::string& raw = it->second.front();
        if (kThirdPerson.count(strip_article(lower(raw)))) return false;
        *out = constant_of(raw);
        return true;
    };

    std::map<std::string, std::string> bindings;
    std::vector<std::string> missing;
    for (const auto& arg : tmpl.required_args) {
        std::string constant;
        if (usable_value(arg, &constant))
            bindings[arg] = constant;
        else
            missing.push_back(arg);
    }
    if (!missing.empty())
        return ClarificationRequest{node.node_id, tmpl.task_type,
                                    std::move(missing)};

    std::vector<const std::vector<std::string>*> assumed_blocks;
    assumed_blocks.push_back(&tmpl.assumed_init);
    for (const auto& [arg, patterns] : tmpl.when_present) {
        std::string constant;
        if (usable_value(arg, &constant)) {
            bindings[arg] = constant;
            assumed_blocks.push_back(&patterns);
        }
    }

    GroundedProblem problem;
    problem.node_id = node.node_id;
    problem.init = world;
    for (const auto* block : assumed_blocks) {
        for (const auto& pattern : *block) {
            Fluent f = parse_fluent(substitute(pattern, bindings, nullptr), ctx);
            if (f.negated)
                throw ConfigError(ctx + ": assumed fact " + f.to_string() +
                                  " cannot be negated");
            check_template_fluent(f, domain, ctx);
            problem.init.insert(std::move(f));
        }
    }
    for (const auto& pattern : tmpl.goal) {
        Fluent f = parse_fluent(substitute(pattern, bindings, nullptr), ctx);
        check_template_fluent(f, domain, ctx);
        problem.goal.push_back(std::move(f));
    }
    return problem;
}

// ---------------------------------------------------------------------------
// Search and replay.

bool satisfies(const State& state, const std::vector<Fluent>& goal) {
    for (const auto& f : goal)
        if (!holds(state, f)) return false;
    return true;
}

std::vector<Action> strips_plan(const GroundedProblem& problem,
                                const Domain& domain, long long budget) {
    if (budget <= 0) throw ConfigError("search budget must be positive");
    for (const auto& f : problem.goal)
        if (!domain.declares(f.predicate, static_cast<int>(f.args.size())))
            throw ValidationError("goal fluent " + f.to_string() +
                                  " uses an undeclared predicate");
    validate_state(problem.init, domain, "problem init");
    if (satisfies(problem.init, problem.goal)) return {};

    std::set<std::string> constant_set;
    auto collect = [&constant_set](const Fluent& f) {
        for (const auto& a : f.args) constant_set.insert(a);
    };
    for (const auto& f : problem.init) collect(f);
    for (const auto& f : problem.goal) collect(f);
    std::vector<std::string> constants(constant_set.begin(),
                                       constant_set.end());

    // Predicates never touched by an effect cannot change; their
    // preconditions are resolved once, during grounding.
    std::set<std::string> static_preds;
    for (const auto& [name, arity] : domain.predicates) {
        (void)arity;
        static_preds.insert(name);
    }
    for (const auto& op : domain.operators)
        for (const auto& eff : op.effects) static_preds.erase(eff.predicate);

    std::vector<GroundAction> actions;
    for (const auto& op : domain.operators)
        enumerate_operator(op, constants, static_preds, problem.init, &actions);

    // Intern every ground fluent the search can touch. States become bit
    // vectors and queue entries shrink to their difference from the initial
    // state, keeping memory flat even when a budget-bounded search has to
    // exhaust a large space.
    std::map<Fluent, int> ids;
    auto intern = [&ids](Fluent f) {
        f.negated = false;
        auto [it, inserted] = ids.emplace(std::move(f),
                                          static_cast<int>(ids.size()));
        (void)inserted;
        return it->second;
    };
    struct IntAction {
        std::vector<int> pre_pos, pre_neg, adds, dels;
    };
    std::vector<IntAction> iactions(actions.size());
    for (size_t ai = 0; ai < actions.size(); ++ai) {
        for (const auto& pre : actions[ai].dynamic_pre) {
            Fluent f = pre;
            (pre.negated ? iactions[ai].pre_neg : iactions[ai].pre_pos)
                .push_back(intern(std::move(f)));
        }
        for (const auto& f : actions[ai].adds)
            iactions[ai].adds.push_back(intern(f));
        for (const auto& f : actions[ai].dels)
            iactions[ai].dels.push_back(intern(f));
    }
    std::vector<int> init_ids;
    for (const auto& f : problem.init) init_ids.push_back(intern(f));
    std::vector<int> goal_pos, goal_neg;
    for (const auto& g : problem.goal)
        (g.negated ? goal_neg : goal_pos).push_back(intern(g));
    const size_t universe = ids.size();
    std::vector<std::string> fluent_text(universe);
    for (const auto& [f, id] : ids) fluent_text[static_cast<size_t>(id)] =
        f.to_string();

    // Delete-relaxation reachability: a positive goal fluent no chain of
    // adds can ever produce is hopeless, however large the real space is.
    // Symmetrically, an initially true fact nothing deletes cannot be made
    // false. Both checks over-approximate, so failing them is conclusive.
    {
        std::vector<char> reach(universe, 0);
        for (int id : init_ids) reach[static_cast<size_t>(id)] = 1;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& ia : iactions) {
                bool open = true;
                for (int id : ia.pre_pos)
                    if (!reach[static_cast<size_t>(id)]) {
                        open = false;
                        break;
                    }
                if (!open) continue;
                for (int id : ia.adds)
                    if (!reach[static_cast<size_t>(id)]) {
                        reach[static_cast<size_t>(id)] = 1;
                        changed = true;
                    }
            }
        }
        auto hopeless = [&](const std::string& text) {
            throw UnsolvableError("goal unreachable for node " +
                                  std::to_string(problem.node_id) + ": " +
                                  text +
                                  " can never hold (explored 0 states, "
                                  "frontier 0)");
        };
        for (int id : goal_pos)
            if (!reach[static_cast<size_t>(id)])
                hopeless(fluent_text[static_cast<size_t>(id)]);
        std::set<int> deletable;
        for (const auto& ia : iactions)
            for (int id : ia.dels) deletable.insert(id);
        std::set<int> initially(init_ids.begin(), init_ids.end());
        for (int id : goal_neg)
            if (initially.count(id) && !deletable.count(id))
                hopeless("(not " + fluent_text[static_cast<size_t>(id)] + ")");
    }

    const size_t words = (universe + 63) / 64;
    std::vector<std::uint64_t> init_bits(words, 0);
    for (int id : init_ids)
        init_bits[static_cast<size_t>(id) / 64] |=
            std::uint64_t(1) << (static_cast<size_t>(id) % 64);

    // Successor generation: each action is filed under its first positive
    // dynamic precondition, so a state only scans actions whose anchor it
    // actually contains (plus the rare action with no such precondition).
    std::vector<std::vector<int>> by_anchor(universe);
    std::vector<int> unanchored;
    for (size_t ai = 0; ai < iactions.size(); ++ai) {
        if (iactions[ai].pre_pos.empty())
            unanchored.push_back(static_cast<int>(ai));
        else
            by_anchor[static_cast<size_t>(iactions[ai].pre_pos.front())]
                .push_back(static_cast<int>(ai));
    }

    auto bit = [](const std::vector<std::uint64_t>& bits, int id) {
        return (bits[static_cast<size_t>(id) / 64] >>
                (static_cast<size_t>(id) % 64)) &
               1;
    };

    // Queue entries hold the state as its sorted add/delete difference
    // from init, plus the parent link for plan reconstruction.
    struct Record {
        std::vector<int> added, removed;
        long long parent;
        int action;
    };
    std::deque<Record> nodes;
    nodes.push_back({{}, {}, -1, -1});
    std::unordered_set<std::string> visited;
    visited.insert(std::string());

    auto delta_key = [](const std::vector<int>& added,
                        const std::vector<int>& removed) {
        std::string key;
        key.reserve((added.size() + removed.size()) * 4 + 1);
        auto put = [&key](int id) {
            for (int shift = 0; shift < 32; shift += 8)
                key += static_cast<char>((static_cast<unsigned>(id) >> shift) &
                                         0xff);
        };
        for (int id : added) put(id);
        key += '|';
        for (int id : removed) put(id);
        return key;
    };

    std::vector<std::uint64_t> current(words), successor(words);
    long long expanded = 0;
    for (long long head = 0; head < static_cast<long long>(nodes.size());
         ++head) {
        if (expanded >= budget) {
            long long frontier = static_cast<long long>(nodes.size()) - head;
            throw UnsolvableError(
                "no plan within budget for node " +
                std::to_string(problem.node_id) + " (expanded " +
                std::to_string(expanded) + " states, frontier " +
                std::to_string(frontier) + ")");
        }
        ++expanded;

        current = init_bits;
        for (int id : nodes[head].removed)
            current[static_cast<size_t>(id) / 64] &=
                ~(std::uint64_t(1) << (static_cast<size_t>(id) % 64));
        for (int id : nodes[head].added)
            current[static_cast<size_t>(id) / 64] |=
                std::uint64_t(1) << (static_cast<size_t>(id) % 64);

        std::vector<Action> plan;
        auto try_action = [&](int ai) -> bool {
            const IntAction& ia = iactions[static_cast<size_t>(ai)];
            for (int id : ia.pre_pos)
                if (!bit(current, id)) return false;
            for (int id : ia.pre_neg)
                if (bit(current, id)) return false;
            successor = current;
            for (int id : ia.dels)
                successor[static_cast<size_t>(id) / 64] &=
                    ~(std::uint64_t(1) << (static_cast<size_t>(id) % 64));
            for (int id : ia.adds)
                successor[static_cast<size_t>(id) / 64] |=
                    std::uint64_t(1) << (static_cast<size_t>(id) % 64);

            std::vector<int> added, removed;
            for (size_t w = 0; w < words; ++w) {
                std::uint64_t diff = successor[w] ^ init_bits[w];
                while (diff) {
                    int b = std::countr_zero(diff);
                    diff &= diff - 1;
                    int id = static_cast<int>(w * 64 + static_cast<size_t>(b));
                    if ((successor[w] >> b) & 1)
                        added.push_back(id);
                    else
                        removed.push_back(id);
                }
            }
            if (!visited.insert(delta_key(added, removed)).second)
                return false;

            bool done = true;
            for (int id : goal_pos)
                if (!bit(successor, id)) {
                    done = false;
                    break;
                }
            if (done)
                for (int id : goal_neg)
                    if (bit(successor, id)) {
                        done = false;
                        break;
                    }
            if (done) {
                plan.push_back(actions[static_cast<size_t>(ai)].action);
                for (long long at = head; nodes[at].parent >= 0;
                     at = nodes[at].parent)
                    plan.push_back(
                        actions[static_cast<size_t>(nodes[at].action)].action);
                std::reverse(plan.begin(), plan.end());
                return true;
            }
            if (static_cast<long long>(nodes.size()) >= budget) {
                long long frontier =
                    static_cast<long long>(nodes.size()) - head;
                throw UnsolvableError(
                    "no plan within budget for node " +
                    std::to_string(problem.node_id) + " (expanded " +
                    std::to_string(expanded) + " states, frontier " +
                    std::to_string(frontier) + ")");
            }
            nodes.push_back({std::move(added), std::move(removed), head, ai});
            return false;
        };

        for (int ai : unanchored)
            if (try_action(ai)) return plan;
        for (size_t w = 0; w < words; ++w) {
            std::uint64_t word = current[w];
            while (word) {
                int b = std::countr_zero(word);
                word &= word - 1;
                size_t id = w * 64 + static_cast<size_t>(b);
                for (int ai : by_anchor[id])
                    if (try_action(ai)) return plan;
            }
        }
    }
    throw UnsolvableError("goal unreachable for node " +
                          std::to_string(problem.node_id) + " (explored " +
                          std::to_string(expanded) + " states, frontier 0)");
}

State apply_plan(const State& init, const std::vector<Action>& plan,
                 const Domain& domain) {
    State state = init;
    for (size_t step = 0; step < plan.size(); ++step) {
        const Action& action = plan[step];
        const Operator* op = domain.find_operator(action.name);
        std::string where =
            "replay step " + std::to_string(step) + " " + action.to_string();
        if (!op) throw ValidationError(where + ": unknown operator");
        if (op->params.size() != action.args.size())
            throw ValidationError(where + ": expected " +
                                  std::to_string(op->params.size()) +
                                  " arguments");
        std::map<std::string, std::string> bindings;
        for (size_t i = 0; i < op->params.size(); ++i)
            bindings[op->params[i]] = action.args[i];
        for (const auto& pre : op->preconditions) {
            Fluent f = bind_fluent(pre, bindings);
            if (!holds(state, f))
                throw ValidationError(where + ": precondition " +
                                      f.to_string() + " does not hold");
        }
        std::vector<Fluent> adds;
        for (const auto& eff : op->effects) {
            Fluent f = bind_fluent(eff, bindings);
            if (f.negated) {
                f.negated = false;
                state.erase(f);
            } else {
                adds.push_back(std::move(f));
            }
        }
        for (auto& f : adds) state.insert(std::move(f));
    }
    return state;
}

// ---------------------------------------------------------------------------
// Whole-graph planning.

namespace {

std::unique_ptr<PlanNode> make_record(const cfg::CfgNode& node,
                                      const std::string& branch, int parent) {
    auto rec = std::make_unique<PlanNode>();
    rec->node_id = node.node_id;
    rec->task_type = node.task.task_type;
    rec->branch = branch;
    rec->parent = parent;
    return rec;
}

std::unique_ptr<PlanNode> mark_unplanned(const cfg::CfgNode* node,
                                         const std::string& branch,
                                         int parent) {
    if (!node) return nullptr;
    auto rec = make_record(*node, branch, parent);
    rec->status = "unplanned";
    rec->positive = mark_unplanned(node->positive.get(), "positive",
                                   node->node_id);
    rec->negative = mark_unplanned(node->negative.get(), "negative",
                                   node->node_id);
    rec->next = mark_unplanned(node->next.get(), branch, parent);
    return rec;
}

struct GraphPlanner {
    const std::vector<TaskTemplate>& templates;
    const Domain& domain;
    long long budget;

    // The two outcome states of a conditional, derived from the post-plan
    // state. check_state asserts or retracts the checked state predicate;
    // other conditionals keep or undo their own goal fluents.
    std::pair<State, State> outcomes(const cfg::CfgNode& node,
                                     const GroundedProblem& problem,
                                     const State& post) const {
        State pos = post, neg = post;
        auto state_arg = node.task.arguments.find("State");
        auto object_arg = node.task.arguments.find("Object");
        if (node.task.task_type == "check_state" &&
            state_arg != node.task.arguments.end() &&
            !state_arg->second.empty() &&
            object_arg != node.task.arguments.end() &&
            !object_arg->second.empty()) {
            std::string state_name = constant_of(state_arg->second.front());
            std::string object = constant_of(object_arg->second.front());
            if (!domain.declares(state_name, 1))
                throw ConfigError("domain has no unary predicate for state '" +
                                  state_name + "'");
            Fluent f{state_name, {object}, false};
            pos.insert(f);
            neg.erase(f);
        } else {
            for (const auto& g : problem.goal) {
                Fluent f = g;
                f.negated = false;
                if (g.negated) {
                    neg.insert(f);  // the goal was (not f): failure keeps f
                } else {
                    neg.erase(f);
                }
            }
        }
        return {std::move(pos), std::move(neg)};
    }

    std::unique_ptr<PlanNode> walk(const cfg::CfgNode* node, const State& world,
                                   const std::string& branch, int parent) {
        if (!node) return nullptr;
        auto rec = make_record(*node, branch, parent);

        auto grounded = ground(*node, template_for(templates,
                                                   node->task.task_type),
                               world, domain);
        if (std::holds_alternative<ClarificationRequest>(grounded)) {
            rec->status = "clarification";
            rec->clarification = std::get<ClarificationRequest>(grounded);
            rec->positive = mark_unplanned(node->positive.get(), "positive",
                                           node->node_id);
            rec->negative = mark_unplanned(node->negative.get(), "negative",
                                           node->node_id);
            rec->next = mark_unplanned(node->next.get(), branch, parent);
            return rec;
        }

        GroundedProblem problem = std::get<GroundedProblem>(std::move(grounded));
        std::vector<Action> actions;
        try {
            actions = strips_plan(problem, domain, budget);
        } catch (const UnsolvableError& e) {
            rec->failure = e.what();
            rec->status = "unsolvable";
            rec->problem = std::move(problem);
            rec->positive = mark_unplanned(node->positive.get(), "positive",
                                           node->node_id);
            rec->negative = mark_unplanned(node->negative.get(), "negative",
                                           node->node_id);
            rec->next = mark_unplanned(node->next.get(), branch, parent);
            return rec;
        }
        State post = apply_plan(problem.init, actions, domain);
        problem.plan = actions;
        rec->problem = std::move(problem);

        if (node->positive || node->negative) {
            auto [pos_state, neg_state] =
                outcomes(*node, *rec->problem, post);
            rec->positive = walk(node->positive.get(), pos_state, "positive",
                                 node->node_id);
            rec->negative = walk(node->negative.get(), neg_state, "negative",
                                 node->node_id);
        }
        rec->next = walk(node->next.get(), post, branch, parent);
        return rec;
    }
};

void script_walk(const PlanNode* node, std::ostringstream* out) {
    if (!node) return;
    json j;
    j["node_id"] = node->node_id;
    j["task_type"] = node->task_type;
    j["branch"] = node->branch;
    j["parent"] = node->parent;
    j["status"] = node->status;
    json actions = json::array();
    if (node->problem && node->problem->plan)
        for (const auto& a : *node->problem->plan)
            actions.push_back(a.to_string());
    j["actions"] = std::move(actions);
    if (node->clarification) {
        json missing = json::array();
        for (const auto& m : node->clarification->missing_args)
            missing.push_back(m);
        j["missing_args"] = std::move(missing);
    }
    if (!node->failure.empty()) j["failure"] = node->failure;
    *out << j.dump() << "\n";
    script_walk(node->positive.get(), out);
    script_walk(node->negative.get(), out);
    script_walk(node->next.get(), out);
}

const PlanNode* find_walk(const PlanNode* node, int node_id) {
    if (!node) return nullptr;
    if (node->node_id == node_id) return node;
    for (const PlanNode* child :
         {node->positive.get(), node->negative.get(), node->next.get()})
        if (const PlanNode* hit = find_walk(child, node_id)) return hit;
    return nullptr;
}

}  // namespace

const PlanNode* ConditionalPlan::find(int node_id) const {
    return find_walk(root.get(), node_id);
}

ConditionalPlan plan_graph(const cfg::ControlFlowGraph& graph,
                           const std::vector<TaskTemplate>& templates,
                           const Domain& domain, const State& world,
                           long long budget) {
    validate_state(world, domain, "world");
    GraphPlanner planner{templates, domain, budget};
    ConditionalPlan plan;
    plan.root = planner.walk(graph.root.get(), world, "main", -1);
    return plan;
}

std::string plan_script(const ConditionalPlan& plan) {
    std::ostringstream out;
    script_walk(plan.root.get(), &out);
    return out.str();
}

}  // namespace nlplan::planner
