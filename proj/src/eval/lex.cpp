#include <json.hpp>

#include <algorithm>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/eval/eval.hpp"

namespace nlplan::eval {

namespace {

using corpus::AnnotatedInstruction;
using corpus::Token;
using nlohmann::json;

/// True when the marker entry (possibly multi-word) matches the token at
/// `index` followed by its continuation tokens within the same sentence.
bool marker_matches(const AnnotatedInstruction& instr, int index, const std::string& entry) {
    const std::vector<std::string> words = split(entry, ' ');
    const Token& first = instr.token_at(index);
    for (std::size_t k = 0; k < words.size(); ++k) {
        const int pos = index + static_cast<int>(k);
        if (pos > instr.token_count()) return false;
        const Token& tok = instr.token_at(pos);
        if (tok.sentence_id != first.sentence_id) return false;
        if (to_lower(tok.surface) != words[k]) return false;
    }
    return true;
}

bool any_marker_matches(const AnnotatedInstruction& instr, int index,
                        const std::vector<std::string>& entries) {
    return std::any_of(entries.begin(), entries.end(), [&](const std::string& entry) {
        return marker_matches(instr, index, entry);
    });
}

std::vector<int> children_of(const AnnotatedInstruction& instr, int head,
                             const std::string& dep_rel) {
    std::vector<int> out;
    for (const Token& tok : instr.tokens)
        if (tok.head == head && tok.dep_rel == dep_rel) out.push_back(tok.index);
    return out;
}

/// The trigger token and, for copular/auxiliary triggers, the predicate it
/// leans on: markers of a clause attach to the clause head, which for a
/// trigger like "is" in "if the coffee is hot" is the head of the trigger.
std::vector<int> clause_tokens(const AnnotatedInstruction& instr, int trigger) {
    std::vector<int> out = {trigger};
    const Token& tok = instr.token_at(trigger);
    if (tok.head != 0) out.push_back(tok.head);
    return out;
}

bool has_conditional_mark(const AnnotatedInstruction& instr, int trigger,
                          const MarkerTable& markers) {
    for (int token : clause_tokens(instr, trigger))
        for (int mark : children_of(instr, token, "mark"))
            if (any_marker_matches(instr, mark, markers.conditional_markers) ||
                any_marker_matches(instr, mark, markers.negative_conditional_markers))
                return true;
    return false;
}

/// A condition counts as negated when its clause carries a negation adverb
/// ("can not find") or an inherently negative subordinator ("unless").
bool condition_negated(const AnnotatedInstruction& instr, int trigger,
                       const MarkerTable& markers) {
    for (int token : clause_tokens(instr, trigger)) {
        for (int adv : children_of(instr, token, "advmod"))
            if (any_marker_matches(instr, adv, markers.negation_markers)) return true;
        for (int mark : children_of(instr, token, "mark"))
            if (any_marker_matches(instr, mark, markers.negative_conditional_markers))
                return true;
    }
    return false;
}

bool has_negative_adverb(const AnnotatedInstruction& instr, int trigger,
                         const MarkerTable& markers) {
    for (int adv : children_of(instr, trigger, "advmod"))
        if (any_marker_matches(instr, adv, markers.negative_branch_adverbs)) return true;
    return false;
}

std::vector<std::string> string_list(const json& value, const std::string& key,
                                     const std::string& origin) {
    if (!value.contains(key) || !value.at(key).is_array())
        throw ConfigError(origin + ": expected a string array for \"" + key + "\"");
    std::vector<std::string> out;
    for (const auto& item : value.at(key)) {
        if (!item.is_string() || item.get<std::string>().empty())
            throw ConfigError(origin + ": \"" + key + "\" entries must be non-empty strings");
        out.push_back(to_lower(item.get<std::string>()));
    }
    return out;
}

}  // namespace

MarkerTable MarkerTable::defaults() {
    MarkerTable table;
    table.conditional_markers = {"if", "when", "in case"};
    table.negative_conditional_markers = {"unless"};
    table.negation_markers = {"not", "n't", "never", "cannot"};
    table.negative_branch_adverbs = {"otherwise", "else", "instead"};
    return table;
}

MarkerTable parse_markers(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": expected a JSON object");
    MarkerTable table;
    table.conditional_markers = string_list(doc, "conditional_markers", origin);
    table.negative_conditional_markers = string_list(doc, "negative_conditional_markers", origin);
    table.negation_markers = string_list(doc, "negation_markers", origin);
    table.negative_branch_adverbs = string_list(doc, "negative_branch_adverbs", origin);
    if (table.conditional_markers.empty())
        throw ConfigError(origin + ": conditional_markers must not be empty");
    return table;
}

MarkerTable read_markers(const std::string& path) {
    return parse_markers(read_file(path), path);
}

labelers::DependencyTagging lex_induct(const corpus::AnnotatedInstruction& instr,
                                       const labelers::TaskTagging& tagging,
                                       const MarkerTable& markers) {
    using corpus::dep_label::conditional;
    using corpus::dep_label::dependent_negative;
    using corpus::dep_label::dependent_positive;
    using corpus::dep_label::sequential;

    labelers::DependencyTagging out;
    out.labels.reserve(tagging.task_count());
    for (std::size_t k = 0; k < tagging.task_count(); ++k) {
        const int trigger = tagging.task_indices[k];
        if (has_conditional_mark(instr, trigger, markers)) {
            out.labels.push_back(conditional);
            continue;
        }
        // Scan earlier tasks of the same sentence for a condition this task
        // could depend on. Conditions in other sentences or later in the
        // instruction are invisible to the rules by design.
        const int sentence = instr.token_at(trigger).sentence_id;
        bool saw_condition = false;
        bool saw_negated_condition = false;
        for (std::size_t j = 0; j < k; ++j) {
            const int other = tagging.task_indices[j];
            if (instr.token_at(other).sentence_id != sentence) continue;
            if (out.labels[j] != conditional) continue;
            saw_condition = true;
            if (condition_negated(instr, other, markers)) saw_negated_condition = true;
        }
        if (has_negative_adverb(instr, trigger, markers) || saw_negated_condition)
            out.labels.push_back(dependent_negative);
        else if (saw_condition)
            out.labels.push_back(dependent_positive);
        else
            out.labels.push_back(sequential);
    }
    return out;
}

}  // namespace nlplan::eval
