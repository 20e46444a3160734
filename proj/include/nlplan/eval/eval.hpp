#ifndef NLPLAN_EVAL_EVAL_HPP
#define NLPLAN_EVAL_EVAL_HPP

#include <string>
#include <vector>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/corpus/types.hpp"
#include "nlplan/crf/crf.hpp"
#include "nlplan/labelers/labelers.hpp"

namespace nlplan::eval {

// ---------------------------------------------------------------------------
// Sequence-labeling metrics.

/// Precision/recall/F1 for one label. F1 is the harmonic mean when
/// precision + recall > 0 and 0 otherwise; support counts gold occurrences.
struct PRF {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

struct PrfReport {
    std::vector<PRF> per_label;  // sorted by label name
    PRF weighted;                // support-weighted average of the above
};

/// Per-label scores over aligned label sequences, plus the support-weighted
/// average. Labels that only occur in predictions are reported with support 0
/// (and weigh nothing in the average). Throws ValidationError when the two
/// inputs disagree in sequence count or in any sequence length.
PrfReport prf_report(const std::vector<std::vector<std::string>>& gold,
                     const std::vector<std::vector<std::string>>& pred);

/// Fixed-width text table of a PrfReport (per-label rows, then the average).
std::string prf_table(const PrfReport& report);

// ---------------------------------------------------------------------------
// Graph edit metric.

struct OerOptions {
    /// When set, two nodes with the same task type but different normalized
    /// argument values count as a substitution; when cleared, nodes compare
    /// by task type alone.
    bool compare_arguments = true;
};

/// Ordering error rate between a reference graph and a hypothesis graph:
/// the minimum number of node substitutions (S), deletions (D) and
/// insertions (I) that transform the hypothesis into the reference, divided
/// by the reference node count N.
struct OerResult {
    int substitutions = 0;
    int deletions = 0;
    int insertions = 0;
    int n_ref = 0;
    double oer = 0.0;

    bool exact() const { return substitutions + deletions + insertions == 0; }
};

/// Flattens a graph to a token sequence: nodes in pre-order, each non-empty
/// positive/negative branch wrapped in sentinel tokens, the next chain
/// inline. A node's token is its task type plus (by default) its normalized
/// argument values, so two graphs linearize identically exactly when
/// graphs_equal accepts them. Exposed for the metric's oracle tests.
std::vector<std::string> linearize(const cfg::ControlFlowGraph& graph,
                                   const OerOptions& options = {});

/// Edit distance between the two linearizations with unit costs, reported as
/// S/D/I counts of the edits that turn `hypothesis` into `reference`. The
/// rate is uncapped and can exceed 1 when the hypothesis is much larger than
/// the reference. Throws ValidationError when the reference is empty.
OerResult oer(const cfg::ControlFlowGraph& reference, const cfg::ControlFlowGraph& hypothesis,
              const OerOptions& options = {});

// ---------------------------------------------------------------------------
// Rule-based dependency baseline.

/// Lexical markers consulted by lex_induct. Multi-word entries match a
/// from-the-marker contiguous token sequence. The shipped table is
/// data/markers.json; extend it to cover more trigger vocabulary.
struct MarkerTable {
    /// Subordinators that introduce a condition clause ("if", "when", ...).
    std::vector<std::string> conditional_markers;
    /// Subordinators that introduce an inherently negative condition.
    std::vector<std::string> negative_conditional_markers;
    /// Adverbs/particles that negate the clause they modify.
    std::vector<std::string> negation_markers;
    /// Adverbs that mark a task as the fallback branch ("otherwise", ...).
    std::vector<std::string> negative_branch_adverbs;

    static MarkerTable defaults();
};

MarkerTable parse_markers(const std::string& text, const std::string& origin);
MarkerTable read_markers(const std::string& path);

/// Rule-based dependency labeling from lexical markers and clause structure:
/// a task inside a clause introduced by a conditional marker is labeled
/// conditional; a later task in the same sentence is dependent_negative when
/// it carries a negative-branch adverb or the condition is negated, and
/// dependent_positive otherwise; everything else is sequential. The rules
/// never look past overt markers, so implicit conditions (no task token in
/// the marked clause) and dependents that precede their condition are
/// labeled sequential.
labelers::DependencyTagging lex_induct(const corpus::AnnotatedInstruction& instr,
                                       const labelers::TaskTagging& tagging,
                                       const MarkerTable& markers = MarkerTable::defaults());

// ---------------------------------------------------------------------------
// End-to-end evaluation.

/// Dependency labeling back-ends compared by the end-to-end run. Task and
/// argument predictions always come from the CRF models; only the dependency
/// step differs.
enum class DependencySystem {
    lex_induct,      // rule baseline above
    crf_no_task_type,  // CRF without the task-type feature
    crf_full,          // CRF with every feature
};

/// CLI-facing name: "lex", "tf-ablation" or "full".
std::string system_name(DependencySystem system);
/// Inverse of system_name; throws ConfigError on unknown names.
DependencySystem parse_system(const std::string& name);

/// Trained models for the pipeline stages.
struct SystemModels {
    crf::CrfModel task;
    crf::CrfModel argument;
    crf::CrfModel dependency_full;
    crf::CrfModel dependency_no_task_type;
};

struct EvalConfig {
    std::vector<DependencySystem> systems = {
        DependencySystem::lex_induct,
        DependencySystem::crf_no_task_type,
        DependencySystem::crf_full,
    };
    bool with_merge = true;     // evaluate rows that merge redundant conditionals
    bool without_merge = true;  // evaluate rows that skip merging
    MarkerTable markers = MarkerTable::defaults();
    OerOptions oer_options;
    /// Diagnostic mode: feed the gold task/argument/dependency labels through
    /// the pipeline instead of model predictions (models are not consulted;
    /// the dependency systems then only differ in their row name).
    bool oracle_labels = false;
};

/// One (dependency system, merge?) cell of the evaluation grid.
struct ConfigurationResult {
    DependencySystem system = DependencySystem::crf_full;
    bool merge = true;
    int evaluated = 0;
    int exact_matches = 0;
    double exact_match_rate = 0.0;  // exact_matches / evaluated, 0 when empty
    double mean_oer = 0.0;
};

struct EvalReport {
    std::vector<ConfigurationResult> rows;  // systems in config order, merge first
    int evaluated = 0;  // instructions scored (those carrying a gold graph)
    int skipped = 0;    // instructions without a gold graph
};

/// Runs the full pipeline (task tagging, argument tagging with anaphora
/// resolution, dependency labeling, graph building, optional merging) over
/// the corpus once per configured dependency system and merge setting, and
/// scores each predicted graph against the instruction's gold graph by exact
/// match and ordering error rate. Instructions without a gold graph are
/// skipped and counted.
EvalReport end_to_end_eval(const std::vector<corpus::AnnotatedInstruction>& corpus,
                           const SystemModels& models, const EvalConfig& config = {});

/// Fixed-width text table of the report (one row per configuration).
std::string report_table(const EvalReport& report);
/// The same report as a JSON record.
std::string report_json(const EvalReport& report);

}  // namespace nlplan::eval

#endif
