#ifndef NLPLAN_CORPUS_TYPES_HPP
#define NLPLAN_CORPUS_TYPES_HPP

#include <optional>
#include <string>
#include <vector>

namespace nlplan::corpus {

/// One token of a linguistically annotated instruction. Indices are 1-based
/// and global across sentences; head is a global index too (0 = root of its
/// sentence), so head always points into the same sentence as the token.
struct Token {
    int index = 0;
    std::string surface;
    std::string pos;      // universal POS
    std::string dep_rel;  // dependency relation to head
    int head = 0;         // global index of syntactic head, 0 = root
    int sentence_id = 0;
};

/// The four task dependency labels.
namespace dep_label {
inline const std::string conditional = "conditional";
inline const std::string dependent_positive = "dependent_positive";
inline const std::string dependent_negative = "dependent_negative";
inline const std::string sequential = "sequential";
}  // namespace dep_label

bool is_dependency_label(const std::string& s);

struct AnnotatedInstruction {
    std::string id;
    std::vector<Token> tokens;

    // Gold annotations; absent unless loaded from a record file or generated.
    std::optional<std::vector<std::string>> gold_task_labels;       // per token
    std::optional<std::vector<std::string>> gold_argument_labels;   // per token, BIO
    std::optional<std::vector<std::string>> gold_dependency_labels; // per task token
    std::optional<std::vector<int>> gold_argument_owners;  // per argument span, task ordinal
    std::optional<std::string> gold_graph_json;  // serialized control flow graph

    int token_count() const { return static_cast<int>(tokens.size()); }
    const Token& token_at(int global_index) const { return tokens[global_index - 1]; }
};

struct LabelAlphabet {
    std::vector<std::string> labels;
    std::string outside_label = "O";

    bool contains(const std::string& label) const;
    int index_of(const std::string& label) const;  // -1 if absent
    std::size_t size() const { return labels.size(); }

    /// Throws ValidationError unless labels are unique and contain outside_label.
    void validate() const;
};

/// The 8 default task types plus O.
LabelAlphabet default_task_alphabet();
/// BIO alphabet over the default 21 argument types plus O.
LabelAlphabet default_argument_alphabet();
/// The four task dependency labels (no O; every task gets a label).
LabelAlphabet dependency_alphabet();

/// The 21 default argument types (without BIO prefixes).
const std::vector<std::string>& default_argument_types();
/// The 8 default task types.
const std::vector<std::string>& default_task_types();

}  // namespace nlplan::corpus

#endif
