#ifndef NLPLAN_LABELERS_LABELERS_HPP
#define NLPLAN_LABELERS_LABELERS_HPP

#include <map>
#include <string>
#include <vector>

#include "nlplan/corpus/types.hpp"
#include "nlplan/crf/crf.hpp"

namespace nlplan::labelers {

/// Observation features as strings, one set per sequence position. Interned
/// into ids against a model's feature dictionary at train/decode time.
using StringFeatureSeq = std::vector<std::vector<std::string>>;

/// Association value given to task-trigger tokens (the null association).
inline const std::string kNullAssociation = "phi";

struct TaskTagging {
    std::vector<std::string> labels;       // per token; non-tasks = outside label
    std::vector<int> task_indices;         // global (1-based) indices of task tokens
    std::vector<std::string> task_types;   // distinct non-O labels, first-seen order

    std::size_t task_count() const { return task_indices.size(); }
    /// Task type of the k-th task (by position in task_indices).
    const std::string& type_of(std::size_t k) const {
        return labels[static_cast<std::size_t>(task_indices[k]) - 1];
    }
};

struct ArgumentSpan {
    std::string type;
    int start = 0;          // global token index, inclusive
    int end = 0;            // global token index, inclusive
    int owner_task = 0;     // ordinal into TaskTagging::task_indices
    std::string value;      // extracted text (leading adposition/determiner dropped);
                            // replaced by the antecedent's value after anaphora resolution
    bool unresolved_pronoun = false;
};

struct ArgumentTagging {
    std::vector<std::string> labels;  // per token, BIO
    std::vector<ArgumentSpan> spans;
};

struct DependencyTagging {
    std::vector<std::string> labels;  // one per task, aligned with task_indices
};

struct TaskInstance {
    std::string task_type;
    int trigger_index = 0;
    std::map<std::string, std::vector<std::string>> arguments;  // type -> values
    std::string dependency;
    bool unresolved_pronoun = false;
};

// ---------------------------------------------------------------------------
// Feature extraction (pure functions of the parse).

/// Window features for the task tagger: token identity, POS, dependency
/// relation, head POS and the immediate neighbors.
StringFeatureSeq task_features(const corpus::AnnotatedInstruction& instr);

/// Task-tagger features plus the task-association feature and its
/// conjunctions with the token identity and POS. `association` holds one
/// value per token (a task type, or kNullAssociation on trigger tokens).
StringFeatureSeq argument_features(const corpus::AnnotatedInstruction& instr,
                                   const std::vector<std::string>& association);

/// One feature set per task token: POS, dependency relation, mark-child
/// presence, adverbial-modifier child surface (absent when none), advcl-child
/// presence, size of the token's conj chain, and optionally the task type.
StringFeatureSeq extract_dependency_features(const corpus::AnnotatedInstruction& instr,
                                             const TaskTagging& tagging, bool use_task_type);

/// Training-time conversion: unseen features are added to the dictionary.
crf::FeatureSeq intern_features(const StringFeatureSeq& feats, crf::FeatureInterner& dict);
/// Decode-time conversion: unseen features map to -1 and are ignored.
crf::FeatureSeq lookup_features(const StringFeatureSeq& feats, const crf::FeatureInterner& dict);

// ---------------------------------------------------------------------------
// Association machinery.

/// Owning task ordinal for every token under the given per-gap split points:
/// tokens in the gap after task k up to the split belong to task k, the rest
/// to task k+1; tokens before the first task belong to the first, after the
/// last to the last. Trigger tokens get -1 (null association).
std::vector<int> association_owners(const TaskTagging& tagging, int token_count,
                                    const std::vector<int>& split_points);

/// The per-token association feature values induced by the split points:
/// the owning task's type, or kNullAssociation on trigger tokens.
std::vector<std::string> build_association_features(const TaskTagging& tagging,
                                                    const corpus::AnnotatedInstruction& instr,
                                                    const std::vector<int>& split_points);

/// Gap lengths between consecutive tasks; the naive association assigns every
/// gap its full length (each token keeps the preceding task's association).
std::vector<int> gap_lengths(const TaskTagging& tagging, int token_count);
std::vector<int> naive_splits(const TaskTagging& tagging, int token_count);

// ---------------------------------------------------------------------------
// Taggers.

/// Decodes per-token task labels. When `expected` is given, the model's
/// alphabet must match it exactly.
TaskTagging tag_tasks(const crf::CrfModel& model, const corpus::AnnotatedInstruction& instr,
                      const corpus::LabelAlphabet* expected = nullptr);

/// Argument decoding with per-gap split search: starting from the naive
/// association, each gap's split is revised (left to right, repeated to a
/// fixed point) to the value whose Viterbi decode has the highest exact
/// sequence log-probability. Output labels are BIO-repaired; spans carry the
/// owning task of their first token.
ArgumentTagging tag_arguments(const crf::CrfModel& model,
                              const corpus::AnnotatedInstruction& instr,
                              const TaskTagging& tagging);

/// The split points chosen by tag_arguments (exposed for dominance checks).
std::vector<int> choose_splits(const crf::CrfModel& model,
                               const corpus::AnnotatedInstruction& instr,
                               const TaskTagging& tagging);

/// Replaces third-person pronominal spans by the nearest preceding
/// non-pronominal span value of the same argument type, else the nearest
/// preceding Object span, else flags the span unresolved. Idempotent.
ArgumentTagging resolve_anaphora(const corpus::AnnotatedInstruction& instr,
                                 const ArgumentTagging& args);

/// Viterbi decode of one dependency label per task from extracted features.
DependencyTagging tag_dependencies(const crf::CrfModel& model, const StringFeatureSeq& features);

/// Groups spans by owning task and pairs each task with its dependency label.
std::vector<TaskInstance> assemble_tasks(const TaskTagging& tagging, const ArgumentTagging& args,
                                         const DependencyTagging& deps);

// ---------------------------------------------------------------------------
// Training entry points (gold annotations required on every instruction).

crf::CrfModel train_task_model(const std::vector<corpus::AnnotatedInstruction>& data,
                               const corpus::LabelAlphabet& alphabet,
                               const crf::TrainingConfig& config = {});

crf::CrfModel train_argument_model(const std::vector<corpus::AnnotatedInstruction>& data,
                                   const corpus::LabelAlphabet& alphabet,
                                   const corpus::LabelAlphabet& task_alphabet,
                                   const crf::TrainingConfig& config = {});

crf::CrfModel train_dependency_model(const std::vector<corpus::AnnotatedInstruction>& data,
                                     bool use_task_type, const crf::TrainingConfig& config = {});

/// Recovers the gold per-gap split points from gold argument spans and their
/// recorded owners (the smallest split covering every left-owned token);
/// falls back to the naive splits when owners are absent.
std::vector<int> gold_splits(const corpus::AnnotatedInstruction& instr,
                             const TaskTagging& gold_tagging);

/// Builds a TaskTagging from gold task labels (training/oracle paths).
TaskTagging tagging_from_labels(const corpus::AnnotatedInstruction& instr,
                                const std::vector<std::string>& labels);

/// Spans (with owners when available) parsed from gold BIO labels.
ArgumentTagging arguments_from_labels(const corpus::AnnotatedInstruction& instr,
                                      const TaskTagging& tagging,
                                      const std::vector<std::string>& bio_labels);

/// BIO repair: an inside label without a matching begin/inside predecessor
/// becomes a begin label.
std::vector<std::string> repair_bio(const std::vector<std::string>& labels);

}  // namespace nlplan::labelers

#endif
