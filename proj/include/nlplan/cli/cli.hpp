#ifndef NLPLAN_CLI_CLI_HPP
#define NLPLAN_CLI_CLI_HPP

#include <map>
#include <string>
#include <vector>

#include "nlplan/corpus/synth.hpp"
#include "nlplan/corpus/types.hpp"
#include "nlplan/crf/crf.hpp"
#include "nlplan/eval/eval.hpp"

namespace nlplan::cli {

// ---------------------------------------------------------------------------
// Config files: a small key/value dialect with [section] headers, `key =
// value` lines, quoted or bare values and '#' comments.

/// Flat section-qualified view of a config file ("section.key" -> raw value;
/// keys before any section header stay unqualified).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(const std::string& text, const std::string& origin);
ConfigMap read_config(const std::string& path);

/// Typed lookups: the fallback when the key is absent, ConfigError when the
/// value does not parse as the requested type.
std::string config_string(const ConfigMap& map, const std::string& key,
                          const std::string& fallback);
bool config_bool(const ConfigMap& map, const std::string& key, bool fallback);
long long config_int(const ConfigMap& map, const std::string& key, long long fallback);
double config_real(const ConfigMap& map, const std::string& key, double fallback);

/// Settings for the end-to-end `pipeline` subcommand. Unknown keys in the
/// file are rejected so typos fail loudly.
struct PipelineConfig {
    std::string corpus_dir;      // [paths] corpus: training corpus directory
    std::string models_dir;      // [paths] models: model directory (required)
    std::string templates_path;  // [paths] templates: task template file
    std::string world_path;      // [paths] world: initial world state
    std::string domain_path;     // [paths] domain: PDDL operator domain
    std::string markers_path;    // [paths] markers: lexical marker table
    std::string out_dir;         // [paths] out: output directory

    unsigned long long seed = 7;   // [training] seed: synthetic-corpus seed
    int count = 400;               // [training] count: synthetic corpus size
    crf::TrainingConfig training;  // [training] regularization/tolerance/max_iterations

    bool use_task_type = true;    // [features] use_task_type
    bool merge_redundant = true;  // [features] merge_redundant

    bool emit_pddl = false;       // [planner] emit_pddl
    long long budget = 1000000;   // [planner] budget

    static PipelineConfig from_map(const ConfigMap& map, const std::string& origin);
    static PipelineConfig from_file(const std::string& path);
};

/// Synthetic-grammar profile in the same config dialect (keys mirror the
/// SynthProfile fields; unknown keys rejected).
corpus::SynthProfile profile_from_map(const ConfigMap& map, const std::string& origin);

// ---------------------------------------------------------------------------
// Directory conventions shared by the subcommands.

inline const std::string kCorpusConllu = "corpus.conllu";
inline const std::string kCorpusRecords = "corpus.records";
inline const std::string kTaskModel = "task.crf";
inline const std::string kArgumentModel = "argument.crf";
inline const std::string kDependencyFullModel = "dependency_full.crf";
inline const std::string kDependencyNoTfModel = "dependency_notf.crf";

/// Reads DIR/corpus.conllu and merges DIR/corpus.records into it; rejects
/// records that match no instruction.
std::vector<corpus::AnnotatedInstruction> load_corpus_dir(const std::string& dir);

/// Loads the four models of the conventional model directory layout.
eval::SystemModels load_models_dir(const std::string& dir);

// ---------------------------------------------------------------------------
// Entry point (also driven in-process by the tests).

/// Parses argv, dispatches the subcommand and maps failures to exit codes:
/// 0 success, 2 validation, 3 config, 4 unsolvable, 5 internal, 64 usage.
/// Logs go to standard error (NLPLAN_LOG=quiet|info|debug), data to files or
/// standard output.
int cli_main(int argc, const char* const* argv);

}  // namespace nlplan::cli

#endif
