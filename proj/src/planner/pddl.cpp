#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "nlplan/common/error.hpp"
#include "nlplan/planner/planner.hpp"

namespace nlplan::planner {

namespace {

// A parsed s-expression: either an atom or a list.
struct Sexp {
    std::string atom;
    std::vector<Sexp> items;
    bool is_atom = false;
};

struct Tokenizer {
    const std::string& text;
    const std::string& origin;
    size_t pos = 0;

    void skip_space() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') {  // comment to end of line
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    bool done() {
        skip_space();
        return pos >= text.size();
    }

    Sexp next() {
        skip_space();
        if (pos >= text.size())
            throw ValidationError(origin + ": unexpected end of input");
        if (text[pos] == '(') {
            ++pos;
            Sexp list;
            for (;;) {
                skip_space();
                if (pos >= text.size())
                    throw ValidationError(origin + ": unclosed '('");
                if (text[pos] == ')') {
                    ++pos;
                    return list;
                }
                list.items.push_back(next());
            }
        }
        if (text[pos] == ')')
            throw ValidationError(origin + ": unbalanced ')'");
        Sexp atom;
        atom.is_atom = true;
        size_t start = pos;
        while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
               text[pos] != ';' &&
               !std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        atom.atom = text.substr(start, pos - start);
        for (auto& c : atom.atom)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return atom;
    }
};

const Sexp& expect_list(const Sexp& s, const std::string& origin,
                        const std::string& what) {
    if (s.is_atom)
        throw ValidationError(origin + ": expected a list for " + what +
                              ", got atom '" + s.atom + "'");
    return s;
}

const std::string& expect_atom(const Sexp& s, const std::string& origin,
                               const std::string& what) {
    if (!s.is_atom)
        throw ValidationError(origin + ": expected an atom for " + what);
    return s.atom;
}

Fluent fluent_from_sexp(const Sexp& s, const std::string& origin,
                        bool allow_not) {
    expect_list(s, origin, "a fluent");
    if (s.items.empty())
        throw ValidationError(origin + ": empty fluent '()'");
    const std::string& head = expect_atom(s.items[0], origin, "a predicate");
    if (head == "not") {
        if (!allow_not)
            throw ValidationError(origin + ": (not ...) is not allowed here");
        if (s.items.size() != 2)
            throw ValidationError(origin + ": (not ...) takes one fluent");
        Fluent f = fluent_from_sexp(s.items[1], origin, false);
        f.negated = true;
        return f;
    }
    Fluent f;
    f.predicate = head;
    for (size_t i = 1; i < s.items.size(); ++i)
        f.args.push_back(expect_atom(s.items[i], origin, "a fluent argument"));
    return f;
}

// Flattens (and f g ...), a bare fluent, or (not f) into a fluent list.
std::vector<Fluent> condition_from_sexp(const Sexp& s,
                                        const std::string& origin,
                                        bool allow_not) {
    expect_list(s, origin, "a condition");
    if (s.items.empty()) return {};  // (and) / () — empty condition
    if (s.items[0].is_atom && s.items[0].atom == "and") {
        std::vector<Fluent> out;
        for (size_t i = 1; i < s.items.size(); ++i)
            out.push_back(fluent_from_sexp(s.items[i], origin, allow_not));
        return out;
    }
    return {fluent_from_sexp(s, origin, allow_not)};
}

void check_declared(const Fluent& f, const Domain& domain,
                    const std::string& origin) {
    if (!domain.declares(f.predicate, static_cast<int>(f.args.size())))
        throw ValidationError(origin + ": fluent " + f.to_string() +
                              " uses an undeclared predicate (or wrong arity)");
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ' ';
        out += p;
    }
    return out;
}

}  // namespace

std::string Fluent::to_string() const {
    std::string inner = "(" + predicate;
    for (const auto& a : args) inner += " " + a;
    inner += ")";
    return negated ? "(not " + inner + ")" : inner;
}

std::string Action::to_string() const {
    std::string out = "(" + name;
    for (const auto& a : args) out += " " + a;
    return out + ")";
}

bool Domain::declares(const std::string& predicate, int arity) const {
    for (const auto& [name, n] : predicates)
        if (name == predicate && n == arity) return true;
    return false;
}

const Operator* Domain::find_operator(const std::string& name) const {
    for (const auto& op : operators)
        if (op.name == name) return &op;
    return nullptr;
}

Fluent parse_fluent(const std::string& text, const std::string& origin) {
    Tokenizer tok{text, origin};
    Sexp s = tok.next();
    if (!tok.done())
        throw ValidationError(origin + ": trailing text after fluent");
    return fluent_from_sexp(s, origin, true);
}

Domain parse_domain_pddl(const std::string& text, const std::string& origin) {
    Tokenizer tok{text, origin};
    Sexp top = tok.next();
    if (!tok.done())
        throw ValidationError(origin + ": trailing text after (define ...)");
    expect_list(top, origin, "the domain");
    if (top.items.empty() || !top.items[0].is_atom ||
        top.items[0].atom != "define")
        throw ValidationError(origin + ": expected (define (domain ...) ...)");

    Domain domain;
    bool named = false;
    for (size_t i = 1; i < top.items.size(); ++i) {
        const Sexp& section = expect_list(top.items[i], origin, "a section");
        if (section.items.empty())
            throw ValidationError(origin + ": empty section");
        const std::string& head = expect_atom(section.items[0], origin,
                                              "a section head");
        if (head == "domain") {
            if (section.items.size() != 2)
                throw ValidationError(origin + ": malformed (domain name)");
            domain.name = expect_atom(section.items[1], origin, "domain name");
            named = true;
        } else if (head == ":requirements") {
            for (size_t j = 1; j < section.items.size(); ++j) {
                const std::string& req =
                    expect_atom(section.items[j], origin, "a requirement");
                if (req != ":strips")
                    throw ValidationError(origin + ": unsupported requirement " +
                                          req);
            }
        } else if (head == ":predicates") {
            for (size_t j = 1; j < section.items.size(); ++j) {
                const Sexp& p =
                    expect_list(section.items[j], origin, "a predicate");
                if (p.items.empty())
                    throw ValidationError(origin + ": empty predicate");
                const std::string& name =
                    expect_atom(p.items[0], origin, "a predicate name");
                for (size_t k = 1; k < p.items.size(); ++k) {
                    const std::string& v =
                        expect_atom(p.items[k], origin, "a parameter");
                    if (v.empty() || v[0] != '?')
                        throw ValidationError(origin + ": predicate " + name +
                                              " parameter '" + v +
                                              "' must start with '?'");
                }
                domain.predicates.emplace_back(
                    name, static_cast<int>(p.items.size()) - 1);
            }
        } else if (head == ":action") {
            if (section.items.size() < 2)
                throw ValidationError(origin + ": :action without a name");
            Operator op;
            op.name = expect_atom(section.items[1], origin, "an action name");
            for (size_t j = 2; j + 1 < section.items.size(); j += 2) {
                const std::string& key =
                    expect_atom(section.items[j], origin, "an action keyword");
                const Sexp& value = section.items[j + 1];
                if (key == ":parameters") {
                    expect_list(value, origin, ":parameters");
                    for (const auto& v : value.items) {
                        const std::string& p =
                            expect_atom(v, origin, "a parameter");
                        if (p.empty() || p[0] != '?')
                            throw ValidationError(origin + ": parameter '" + p +
                                                  "' must start with '?'");
                        op.params.push_back(p);
                    }
                } else if (key == ":precondition") {
                    op.preconditions = condition_from_sexp(value, origin, true);
                } else if (key == ":effect") {
                    op.effects = condition_from_sexp(value, origin, true);
                } else {
                    throw ValidationError(origin + ": unsupported action key " +
                                          key);
                }
            }
            if ((section.items.size() - 2) % 2 != 0)
                throw ValidationError(origin + ": dangling keyword in action " +
                                      op.name);
            if (op.effects.empty())
                throw ValidationError(origin + ": action " + op.name +
                                      " has no effect");
            domain.operators.push_back(std::move(op));
        } else {
            throw ValidationError(origin + ": unsupported section " + head);
        }
    }
    if (!named) throw ValidationError(origin + ": missing (domain name)");

    // Operator fluents must stick to declared predicates and bound variables.
    for (const auto& op : domain.operators) {
        auto check_scope = [&](const Fluent& f) {
            check_declared(f, domain, origin);
            for (const auto& a : f.args) {
                if (!a.empty() && a[0] == '?') {
                    bool bound = false;
                    for (const auto& p : op.params) bound |= (p == a);
                    if (!bound)
                        throw ValidationError(origin + ": action " + op.name +
                                              " uses unbound variable " + a);
                }
            }
        };
        for (const auto& f : op.preconditions) check_scope(f);
        for (const auto& f : op.effects) check_scope(f);
    }
    return domain;
}

PddlProblem parse_problem_pddl(const std::string& text,
                               const std::string& origin) {
    Tokenizer tok{text, origin};
    Sexp top = tok.next();
    if (!tok.done())
        throw ValidationError(origin + ": trailing text after (define ...)");
    expect_list(top, origin, "the problem");
    if (top.items.empty() || !top.items[0].is_atom ||
        top.items[0].atom != "define")
        throw ValidationError(origin + ": expected (define (problem ...) ...)");

    PddlProblem problem;
    bool named = false, has_goal = false;
    for (size_t i = 1; i < top.items.size(); ++i) {
        const Sexp& section = expect_list(top.items[i], origin, "a section");
        if (section.items.empty())
            throw ValidationError(origin + ": empty section");
        const std::string& head =
            expect_atom(section.items[0], origin, "a section head");
        if (head == "problem") {
            if (section.items.size() != 2)
                throw ValidationError(origin + ": malformed (problem name)");
            problem.name = expect_atom(section.items[1], origin, "problem name");
            named = true;
        } else if (head == ":domain") {
            if (section.items.size() != 2)
                throw ValidationError(origin + ": malformed (:domain name)");
            problem.domain = expect_atom(section.items[1], origin, "domain ref");
        } else if (head == ":objects") {
            for (size_t j = 1; j < section.items.size(); ++j)
                problem.objects.push_back(
                    expect_atom(section.items[j], origin, "an object"));
        } else if (head == ":init") {
            for (size_t j = 1; j < section.items.size(); ++j)
                problem.init.insert(
                    fluent_from_sexp(section.items[j], origin, false));
        } else if (head == ":goal") {
            if (section.items.size() != 2)
                throw ValidationError(origin + ": :goal takes one condition");
            problem.goal = condition_from_sexp(section.items[1], origin, true);
            has_goal = true;
        } else {
            throw ValidationError(origin + ": unsupported section " + head);
        }
    }
    if (!named) throw ValidationError(origin + ": missing (problem name)");
    if (!has_goal || problem.goal.empty())
        throw ValidationError(origin + ": missing or empty :goal");
    return problem;
}

Domain read_domain_pddl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open domain file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_domain_pddl(buf.str(), path);
}

std::pair<std::string, std::string> emit_pddl(const GroundedProblem& problem,
                                              const Domain& domain) {
    std::ostringstream d;
    d << "(define (domain " << domain.name << ")\n";
    d << "  (:requirements :strips)\n";
    d << "  (:predicates";
    for (const auto& [name, arity] : domain.predicates) {
        d << "\n    (" << name;
        for (int i = 0; i < arity; ++i) d << " ?x" << i;
        d << ")";
    }
    d << ")\n";
    for (const auto& op : domain.operators) {
        d << "  (:action " << op.name << "\n";
        d << "    :parameters (" << join(op.params) << ")\n";
        d << "    :precondition (and";
        for (const auto& f : op.preconditions) d << " " << f.to_string();
        d << ")\n";
        d << "    :effect (and";
        for (const auto& f : op.effects) d << " " << f.to_string();
        d << "))\n";
    }
    d << ")\n";

    // Objects: every constant in init or goal, sorted for stable output.
    std::set<std::string> objects;
    auto collect = [&objects](const Fluent& f) {
        for (const auto& a : f.args) objects.insert(a);
    };
    for (const auto& f : problem.init) collect(f);
    for (const auto& f : problem.goal) collect(f);

    std::ostringstream p;
    p << "(define (problem node-" << problem.node_id << ")\n";
    p << "  (:domain " << domain.name << ")\n";
    p << "  (:objects";
    for (const auto& o : objects) p << " " << o;
    p << ")\n";
    p << "  (:init";
    for (const auto& f : problem.init) p << "\n    " << f.to_string();
    p << ")\n";
    p << "  (:goal (and";
    for (const auto& f : problem.goal) p << " " << f.to_string();
    p << ")))\n";
    return {d.str(), p.str()};
}

}  // namespace nlplan::planner
