#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/cli/cli.hpp"
#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/corpus/annotations.hpp"
#include "nlplan/corpus/conllu.hpp"
#include "nlplan/corpus/synth.hpp"
#include "nlplan/crf/crf.hpp"
#include "nlplan/eval/eval.hpp"
#include "nlplan/labelers/labelers.hpp"
#include "nlplan/planner/planner.hpp"

namespace nlplan::cli {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Logging. Data goes to files or standard output; these lines go to standard
// error and are muted with NLPLAN_LOG=quiet (NLPLAN_LOG=debug adds detail).

int log_level() {
    const char* env = std::getenv("NLPLAN_LOG");
    if (env == nullptr) return 1;
    const std::string value = env;
    if (value == "quiet") return 0;
    if (value == "debug") return 2;
    return 1;
}

void log_info(const std::string& message) {
    if (log_level() >= 1) std::cerr << "[nlplan] " << message << "\n";
}

void log_debug(const std::string& message) {
    if (log_level() >= 2) std::cerr << "[nlplan] " << message << "\n";
}

int exit_code_for(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::validation: return 2;
        case ErrorCategory::config: return 3;
        case ErrorCategory::unsolvable: return 4;
        case ErrorCategory::internal: return 5;
    }
    return 5;
}

// ---------------------------------------------------------------------------
// Shared helpers.

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create directory " + dir + ": " + ec.message());
}

/// Creates the parent directory of an output file when it has one.
void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
}

/// BIO alphabet over the argument types observed in the gold labels,
/// sorted so the alphabet does not depend on corpus order.
corpus::LabelAlphabet argument_alphabet_of(const std::vector<corpus::AnnotatedInstruction>& data) {
    std::set<std::string> types;
    for (const auto& instr : data) {
        if (!instr.gold_argument_labels) continue;
        for (const auto& label : *instr.gold_argument_labels) {
            const auto [tag, type] = corpus::split_bio(label);
            if (tag != "O") types.insert(type);
        }
    }
    corpus::LabelAlphabet alphabet;
    for (const auto& type : types) {
        alphabet.labels.push_back("B-" + type);
        alphabet.labels.push_back("I-" + type);
    }
    alphabet.labels.push_back(alphabet.outside_label);
    alphabet.validate();
    return alphabet;
}

/// One instruction pushed through the tagging stages. A taggless sentence
/// leaves the later layers empty.
struct TaggedInstruction {
    labelers::TaskTagging tagging;
    labelers::ArgumentTagging arguments;  // anaphora already resolved
    labelers::DependencyTagging dependencies;
};

TaggedInstruction run_taggers(const eval::SystemModels& models, bool use_task_type,
                              const corpus::AnnotatedInstruction& instr) {
    TaggedInstruction out;
    out.tagging = labelers::tag_tasks(models.task, instr);
    if (out.tagging.task_count() == 0) return out;
    out.arguments = labelers::tag_arguments(models.argument, instr, out.tagging);
    out.arguments = labelers::resolve_anaphora(instr, out.arguments);
    const auto features = labelers::extract_dependency_features(instr, out.tagging, use_task_type);
    const auto& model = use_task_type ? models.dependency_full : models.dependency_no_task_type;
    out.dependencies = labelers::tag_dependencies(model, features);
    return out;
}

/// Copies the instruction with the predicted layers stored as its labels
/// (annotation-record fields). Span values are not stored: they are
/// re-derived from the tokens, and pronouns re-resolved, when the record is
/// read back.
corpus::AnnotatedInstruction with_predictions(const corpus::AnnotatedInstruction& instr,
                                              const TaggedInstruction& tagged) {
    corpus::AnnotatedInstruction out = instr;
    out.gold_task_labels = tagged.tagging.labels;
    if (tagged.arguments.labels.empty())
        out.gold_argument_labels = std::vector<std::string>(instr.token_count(), "O");
    else
        out.gold_argument_labels = tagged.arguments.labels;
    out.gold_dependency_labels = tagged.dependencies.labels;
    std::vector<int> owners;
    owners.reserve(tagged.arguments.spans.size());
    for (const auto& span : tagged.arguments.spans) owners.push_back(span.owner_task);
    out.gold_argument_owners = owners;
    return out;
}

/// Rebuilds a control-flow graph from recorded label layers.
cfg::ControlFlowGraph graph_from_records(const corpus::AnnotatedInstruction& instr, bool merge) {
    if (!instr.gold_task_labels || !instr.gold_argument_labels || !instr.gold_dependency_labels)
        throw ValidationError("instruction " + instr.id +
                              ": task, argument and dependency labels are all required to build "
                              "a graph");
    const auto tagging = labelers::tagging_from_labels(instr, *instr.gold_task_labels);
    if (tagging.task_count() == 0)
        throw ValidationError("instruction " + instr.id + ": no tasks; cannot build a graph");
    auto arguments = labelers::arguments_from_labels(instr, tagging, *instr.gold_argument_labels);
    arguments = labelers::resolve_anaphora(instr, arguments);
    labelers::DependencyTagging dependencies;
    dependencies.labels = *instr.gold_dependency_labels;
    const auto tasks = labelers::assemble_tasks(tagging, arguments, dependencies);
    auto graph = cfg::build_graph(tasks);
    if (merge) graph = cfg::merge_redundant(graph);
    return graph;
}

void walk_plan(const planner::PlanNode* node,
               const std::function<void(const planner::PlanNode&)>& visit) {
    while (node != nullptr) {
        visit(*node);
        walk_plan(node->positive.get(), visit);
        walk_plan(node->negative.get(), visit);
        node = node->next.get();
    }
}

/// Writes plan.jsonl (and, on request, the PDDL files) into `out_dir`;
/// returns the number of unsolvable nodes. `prefix` namespaces the per-node
/// problem files when several instructions share the directory.
int write_plan_outputs(const planner::ConditionalPlan& plan, const planner::Domain& domain,
                       const std::string& out_dir, const std::string& prefix, bool emit_pddl) {
    const std::string stem = prefix.empty() ? std::string() : prefix + ".";
    write_file(out_dir + "/" + stem + "plan.jsonl", planner::plan_script(plan));
    int unsolvable = 0;
    bool wrote_domain = false;
    walk_plan(plan.root.get(), [&](const planner::PlanNode& node) {
        if (node.status == "unsolvable") ++unsolvable;
        if (!emit_pddl || !node.problem) return;
        const auto [domain_text, problem_text] = planner::emit_pddl(*node.problem, domain);
        if (!wrote_domain) {
            write_file(out_dir + "/domain.pddl", domain_text);
            wrote_domain = true;
        }
        write_file(out_dir + "/" + stem + "problem-node-" + std::to_string(node.node_id) + ".pddl",
                   problem_text);
    });
    return unsolvable;
}

// ---------------------------------------------------------------------------
// corpus validate / corpus synth

struct ValidateOptions {
    std::vector<std::string> paths;
};

void run_corpus_validate(const ValidateOptions& opt) {
    std::vector<corpus::AnnotatedInstruction> context;
    for (const auto& path : opt.paths) {
        if (fs::is_directory(path)) {
            auto instructions = load_corpus_dir(path);
            for (const auto& instr : instructions) corpus::validate_instruction(instr);
            std::cout << path << ": " << instructions.size()
                      << " instruction(s), annotations consistent\n";
            context.insert(context.end(), std::make_move_iterator(instructions.begin()),
                           std::make_move_iterator(instructions.end()));
        } else if (path.ends_with(".conllu")) {
            auto instructions = corpus::read_conllu(path);
            for (const auto& instr : instructions) corpus::validate_instruction(instr);
            std::cout << path << ": " << instructions.size() << " instruction(s)\n";
            context.insert(context.end(), std::make_move_iterator(instructions.begin()),
                           std::make_move_iterator(instructions.end()));
        } else {
            if (context.empty())
                throw ConfigError(path +
                                  ": a record file must follow the .conllu file or corpus "
                                  "directory it annotates");
            auto merged = corpus::read_annotations(path, context);
            if (!merged.unmatched_ids.empty())
                throw ValidationError(path + ": " + std::to_string(merged.unmatched_ids.size()) +
                                      " record(s) match no instruction (first: " +
                                      merged.unmatched_ids.front() + ")");
            std::cout << path << ": records merged cleanly\n";
            context = std::move(merged.instructions);
        }
    }
    log_info("validated " + std::to_string(context.size()) + " instruction(s)");
}

struct SynthOptions {
    unsigned long long seed = 7;
    int count = 100;
    std::string profile_path;
    std::string out_dir;
};

void run_corpus_synth(const SynthOptions& opt) {
    corpus::SynthProfile profile;
    if (!opt.profile_path.empty())
        profile = profile_from_map(read_config(opt.profile_path), opt.profile_path);
    const auto instructions = corpus::generate_synthetic(opt.seed, opt.count, profile);
    ensure_dir(opt.out_dir);
    write_file(opt.out_dir + "/" + kCorpusConllu, corpus::write_conllu(instructions));
    write_file(opt.out_dir + "/" + kCorpusRecords, corpus::write_annotations(instructions));
    log_info("wrote " + std::to_string(instructions.size()) + " instruction(s) to " + opt.out_dir);
}

// ---------------------------------------------------------------------------
// crf train / crf eval / crf decode

struct CrfTrainOptions {
    std::string corpus_dir;
    std::string target;
    std::string out_path;
    bool no_task_type = false;
    crf::TrainingConfig training;
};

void run_crf_train(const CrfTrainOptions& opt) {
    const auto data = load_corpus_dir(opt.corpus_dir);
    log_info("training " + opt.target + " model on " + std::to_string(data.size()) +
             " instruction(s)");
    crf::CrfModel model;
    if (opt.target == "task") {
        model = labelers::train_task_model(data, corpus::default_task_alphabet(), opt.training);
    } else if (opt.target == "argument") {
        model = labelers::train_argument_model(data, argument_alphabet_of(data),
                                               corpus::default_task_alphabet(), opt.training);
    } else {
        model = labelers::train_dependency_model(data, !opt.no_task_type, opt.training);
    }
    ensure_parent(opt.out_path);
    crf::save_model(model, opt.out_path);
    log_info("saved " + opt.out_path);
}

struct CrfEvalOptions {
    std::string corpus_dir;
    std::string model_path;
    std::string target;
    bool no_task_type = false;
};

/// Scores one tagging layer in isolation: the layers upstream of the target
/// come from the gold annotations, so errors measure this model alone.
void run_crf_eval(const CrfEvalOptions& opt) {
    const auto data = load_corpus_dir(opt.corpus_dir);
    const auto model = crf::load_model(opt.model_path);
    std::vector<std::vector<std::string>> gold;
    std::vector<std::vector<std::string>> pred;
    for (const auto& instr : data) {
        if (opt.target == "task") {
            if (!instr.gold_task_labels) continue;
            gold.push_back(*instr.gold_task_labels);
            pred.push_back(labelers::tag_tasks(model, instr).labels);
        } else if (opt.target == "argument") {
            if (!instr.gold_task_labels || !instr.gold_argument_labels) continue;
            const auto tagging = labelers::tagging_from_labels(instr, *instr.gold_task_labels);
            if (tagging.task_count() == 0) continue;
            gold.push_back(*instr.gold_argument_labels);
            pred.push_back(labelers::tag_arguments(model, instr, tagging).labels);
        } else {
            if (!instr.gold_task_labels || !instr.gold_dependency_labels) continue;
            const auto tagging = labelers::tagging_from_labels(instr, *instr.gold_task_labels);
            if (tagging.task_count() == 0) continue;
            const auto features =
                labelers::extract_dependency_features(instr, tagging, !opt.no_task_type);
            gold.push_back(*instr.gold_dependency_labels);
            pred.push_back(labelers::tag_dependencies(model, features).labels);
        }
    }
    if (gold.empty())
        throw ValidationError("no instruction carries the gold labels needed to evaluate the " +
                              opt.target + " layer");
    int exact = 0;
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i] == pred[i]) ++exact;
    std::cout << eval::prf_table(eval::prf_report(gold, pred));
    std::cout << "exact sequences: " << exact << "/" << gold.size() << "\n";
}

struct CrfDecodeOptions {
    std::string conllu_path;
    std::string records_path;
    std::string model_path;
    std::string task_model_path;
    std::string target;
    std::string out_path;
    bool no_task_type = false;
};

void run_crf_decode(const CrfDecodeOptions& opt) {
    auto instructions = corpus::read_conllu(opt.conllu_path);
    if (!opt.records_path.empty()) {
        auto merged = corpus::read_annotations(opt.records_path, instructions);
        if (!merged.unmatched_ids.empty())
            throw ValidationError(opt.records_path + ": " +
                                  std::to_string(merged.unmatched_ids.size()) +
                                  " record(s) match no instruction");
        instructions = std::move(merged.instructions);
    }
    const auto model = crf::load_model(opt.model_path);
    std::optional<crf::CrfModel> task_model;
    if (!opt.task_model_path.empty()) task_model = crf::load_model(opt.task_model_path);

    std::ostringstream out;
    for (const auto& instr : instructions) {
        std::vector<std::string> labels;
        if (opt.target == "task") {
            labels = labelers::tag_tasks(model, instr).labels;
        } else {
            labelers::TaskTagging tagging;
            if (task_model)
                tagging = labelers::tag_tasks(*task_model, instr);
            else if (instr.gold_task_labels)
                tagging = labelers::tagging_from_labels(instr, *instr.gold_task_labels);
            else
                throw ConfigError("decoding the " + opt.target +
                                  " layer needs --task-model or gold task labels via --records");
            if (opt.target == "argument") {
                if (tagging.task_count() == 0)
                    labels.assign(static_cast<std::size_t>(instr.token_count()), "O");
                else
                    labels = labelers::tag_arguments(model, instr, tagging).labels;
            } else if (tagging.task_count() > 0) {
                const auto features =
                    labelers::extract_dependency_features(instr, tagging, !opt.no_task_type);
                labels = labelers::tag_dependencies(model, features).labels;
            }
        }
        out << instr.id << "\t" << join(labels, " ") << "\n";
    }
    if (opt.out_path.empty()) {
        std::cout << out.str();
    } else {
        ensure_parent(opt.out_path);
        write_file(opt.out_path, out.str());
    }
}

// ---------------------------------------------------------------------------
// tag

struct TagOptions {
    std::string model_dir;
    std::string in_path;
    std::string out_path;
    bool no_task_type = false;
};

void run_tag(const TagOptions& opt) {
    const auto models = load_models_dir(opt.model_dir);
    const auto instructions = corpus::read_conllu(opt.in_path);
    std::vector<corpus::AnnotatedInstruction> tagged;
    tagged.reserve(instructions.size());
    for (const auto& instr : instructions) {
        const auto result = run_taggers(models, !opt.no_task_type, instr);
        if (result.tagging.task_count() == 0)
            log_info("instruction " + instr.id + ": no tasks tagged");
        tagged.push_back(with_predictions(instr, result));
    }
    ensure_parent(opt.out_path);
    write_file(opt.out_path, corpus::write_annotations(tagged));
    log_info("tagged " + std::to_string(tagged.size()) + " instruction(s) -> " + opt.out_path);
}

// ---------------------------------------------------------------------------
// graph build

struct GraphOptions {
    std::string conllu_path;
    std::string records_path;
    std::string out_path;
    std::string dot_path;
    bool merge = true;
};

void run_graph_build(const GraphOptions& opt) {
    const auto instructions = corpus::read_conllu(opt.conllu_path);
    auto merged = corpus::read_annotations(opt.records_path, instructions);
    if (!merged.unmatched_ids.empty())
        throw ValidationError(opt.records_path + ": " +
                              std::to_string(merged.unmatched_ids.size()) +
                              " record(s) match no instruction");
    std::ostringstream dot;
    for (auto& instr : merged.instructions) {
        const auto graph = graph_from_records(instr, opt.merge);
        dot << "// instruction: " << instr.id << "\n" << cfg::to_dot(graph) << "\n";
        instr.gold_graph_json = cfg::graph_to_json(graph);
    }
    if (!opt.out_path.empty()) {
        ensure_parent(opt.out_path);
        write_file(opt.out_path, corpus::write_annotations(merged.instructions));
    }
    if (opt.dot_path.empty()) {
        std::cout << dot.str();
    } else {
        ensure_parent(opt.dot_path);
        write_file(opt.dot_path, dot.str());
    }
    log_info("built " + std::to_string(merged.instructions.size()) + " graph(s)");
}

// ---------------------------------------------------------------------------
// plan

struct PlanOptions {
    std::string graph_path;
    std::string domain_path = "data/domain.pddl";
    std::string world_path;
    std::string templates_path;
    std::string out_dir;
    bool emit_pddl = false;
    long long budget = 1000000;
};

void run_plan(const PlanOptions& opt) {
    const auto graph = cfg::graph_from_json(read_file(opt.graph_path), opt.graph_path);
    const auto domain = planner::read_domain_pddl(opt.domain_path);
    const auto world = planner::read_world(opt.world_path);
    planner::validate_state(world, domain, opt.world_path);
    const auto templates = planner::read_templates(opt.templates_path);
    const auto plan = planner::plan_graph(graph, templates, domain, world, opt.budget);
    ensure_dir(opt.out_dir);
    const int unsolvable = write_plan_outputs(plan, domain, opt.out_dir, "", opt.emit_pddl);
    log_info("planned " + std::to_string(graph.node_count) + " node(s) -> " + opt.out_dir);
    if (unsolvable > 0)
        throw UnsolvableError(std::to_string(unsolvable) +
                              " node(s) have no plan under the given world (see " + opt.out_dir +
                              "/plan.jsonl)");
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string corpus_dir;
    std::string models_dir;
    std::string systems = "lex,tf-ablation,full";
    std::string merge = "both";
    std::string markers_path;
    std::string out_prefix;
    bool oracle = false;
};

void run_eval(const EvalOptions& opt) {
    const auto data = load_corpus_dir(opt.corpus_dir);
    eval::EvalConfig config;
    config.systems.clear();
    for (const auto& name : split(opt.systems, ','))
        config.systems.push_back(eval::parse_system(trim(name)));
    config.with_merge = opt.merge != "off";
    config.without_merge = opt.merge != "on";
    if (!opt.markers_path.empty()) config.markers = eval::read_markers(opt.markers_path);
    config.oracle_labels = opt.oracle;

    eval::SystemModels models;
    if (!config.oracle_labels) {
        if (opt.models_dir.empty())
            throw ConfigError("--models is required unless --oracle is set");
        models = load_models_dir(opt.models_dir);
    }
    const auto report = eval::end_to_end_eval(data, models, config);
    const std::string table = eval::report_table(report);
    std::cout << table;
    if (!opt.out_prefix.empty()) {
        ensure_parent(opt.out_prefix);
        write_file(opt.out_prefix + ".txt", table);
        write_file(opt.out_prefix + ".json", eval::report_json(report));
        log_info("wrote " + opt.out_prefix + ".txt and " + opt.out_prefix + ".json");
    }
}

// ---------------------------------------------------------------------------
// pipeline

/// Loads the four models when they all exist in the model directory;
/// otherwise trains them (from the configured corpus, falling back to a
/// synthetic one) and saves them there.
eval::SystemModels ensure_models(const PipelineConfig& config) {
    const auto path_of = [&](const std::string& name) { return config.models_dir + "/" + name; };
    const bool have_all = fs::exists(path_of(kTaskModel)) && fs::exists(path_of(kArgumentModel)) &&
                          fs::exists(path_of(kDependencyFullModel)) &&
                          fs::exists(path_of(kDependencyNoTfModel));
    if (have_all) {
        log_info("loading models from " + config.models_dir);
        return load_models_dir(config.models_dir);
    }
    std::vector<corpus::AnnotatedInstruction> data;
    if (!config.corpus_dir.empty()) {
        log_info("training models on " + config.corpus_dir);
        data = load_corpus_dir(config.corpus_dir);
    } else {
        log_info("training models on a synthetic corpus (seed " + std::to_string(config.seed) +
                 ", count " + std::to_string(config.count) + ")");
        data = corpus::generate_synthetic(config.seed, config.count);
    }
    eval::SystemModels models;
    models.task = labelers::train_task_model(data, corpus::default_task_alphabet(),
                                             config.training);
    models.argument = labelers::train_argument_model(data, argument_alphabet_of(data),
                                                     corpus::default_task_alphabet(),
                                                     config.training);
    models.dependency_full = labelers::train_dependency_model(data, true, config.training);
    models.dependency_no_task_type = labelers::train_dependency_model(data, false,
                                                                      config.training);
    ensure_dir(config.models_dir);
    crf::save_model(models.task, path_of(kTaskModel));
    crf::save_model(models.argument, path_of(kArgumentModel));
    crf::save_model(models.dependency_full, path_of(kDependencyFullModel));
    crf::save_model(models.dependency_no_task_type, path_of(kDependencyNoTfModel));
    log_info("saved models to " + config.models_dir);
    return models;
}

void run_pipeline(const PipelineConfig& config, const std::string& in_path) {
    const auto models = ensure_models(config);
    if (in_path.empty()) {
        log_info("no --in file; models are ready");
        return;
    }
    if (config.out_dir.empty())
        throw ConfigError("paths.out is required when processing instructions");
    const auto instructions = corpus::read_conllu(in_path);
    ensure_dir(config.out_dir);

    const bool planning = !config.domain_path.empty() && !config.world_path.empty() &&
                          !config.templates_path.empty();
    planner::Domain domain;
    planner::State world;
    std::vector<planner::TaskTemplate> templates;
    if (planning) {
        domain = planner::read_domain_pddl(config.domain_path);
        world = planner::read_world(config.world_path);
        planner::validate_state(world, domain, config.world_path);
        templates = planner::read_templates(config.templates_path);
    }

    for (const auto& instr : instructions) {
        const auto tagged = run_taggers(models, config.use_task_type, instr);
        if (tagged.tagging.task_count() == 0) {
            log_info("instruction " + instr.id + ": no tasks tagged; skipping");
            continue;
        }
        const auto tasks =
            labelers::assemble_tasks(tagged.tagging, tagged.arguments, tagged.dependencies);
        auto graph = cfg::build_graph(tasks);
        if (config.merge_redundant) graph = cfg::merge_redundant(graph);
        write_file(config.out_dir + "/" + instr.id + ".dot", cfg::to_dot(graph));
        write_file(config.out_dir + "/" + instr.id + ".graph.json", cfg::graph_to_json(graph));
        log_debug("instruction " + instr.id + ": " + std::to_string(graph.node_count) +
                  " graph node(s)");
        if (planning) {
            const auto plan = planner::plan_graph(graph, templates, domain, world, config.budget);
            const int unsolvable =
                write_plan_outputs(plan, domain, config.out_dir, instr.id, config.emit_pddl);
            if (unsolvable > 0)
                log_info("instruction " + instr.id + ": " + std::to_string(unsolvable) +
                         " node(s) unsolvable (recorded in the plan script)");
        }
    }
    log_info("processed " + std::to_string(instructions.size()) + " instruction(s) -> " +
             config.out_dir);
}

// ---------------------------------------------------------------------------
// Command-line wiring.

void add_training_flags(CLI::App* sub, crf::TrainingConfig* training) {
    sub->add_option("--regularization", training->regularization,
                    "L2 regularization strength");
    sub->add_option("--tolerance", training->tolerance, "optimizer convergence tolerance");
    sub->add_option("--max-iterations", training->max_iterations, "optimizer iteration cap");
}

void build_app(CLI::App& app) {
    app.require_subcommand(1);

    // corpus
    auto* corpus_cmd = app.add_subcommand("corpus", "Validate or generate instruction corpora");
    corpus_cmd->require_subcommand(1);

    auto validate_opt = std::make_shared<ValidateOptions>();
    auto* validate = corpus_cmd->add_subcommand(
        "validate", "Check corpus files (.conllu, record files, or corpus directories)");
    validate->add_option("paths", validate_opt->paths, "files or directories to check")
        ->required();
    validate->callback([validate_opt] { run_corpus_validate(*validate_opt); });

    auto synth_opt = std::make_shared<SynthOptions>();
    auto* synth = corpus_cmd->add_subcommand("synth", "Generate an annotated synthetic corpus");
    synth->add_option("--seed", synth_opt->seed, "generator seed")->required();
    synth->add_option("--count", synth_opt->count, "number of instructions")->required();
    synth->add_option("--profile", synth_opt->profile_path,
                      "generator profile (key = value file)");
    synth->add_option("--out", synth_opt->out_dir, "output directory")->required();
    synth->callback([synth_opt] { run_corpus_synth(*synth_opt); });

    // crf
    auto* crf_cmd = app.add_subcommand("crf", "Train, score or run a single tagging model");
    crf_cmd->require_subcommand(1);
    const std::vector<std::string> targets = {"task", "argument", "dependency"};

    auto train_opt = std::make_shared<CrfTrainOptions>();
    auto* train = crf_cmd->add_subcommand("train", "Train one tagging model on a corpus");
    train->add_option("--corpus", train_opt->corpus_dir, "corpus directory")->required();
    train->add_option("--target", train_opt->target, "which model to train")
        ->required()
        ->check(CLI::IsMember(targets));
    train->add_option("--out", train_opt->out_path, "model file to write")->required();
    train->add_flag("--no-task-type-feature", train_opt->no_task_type,
                    "drop the task-type feature (dependency target only)");
    add_training_flags(train, &train_opt->training);
    train->callback([train_opt] { run_crf_train(*train_opt); });

    auto ceval_opt = std::make_shared<CrfEvalOptions>();
    auto* ceval = crf_cmd->add_subcommand(
        "eval", "Score one tagging layer against gold labels (upstream layers from gold)");
    ceval->add_option("--corpus", ceval_opt->corpus_dir, "corpus directory")->required();
    ceval->add_option("--model", ceval_opt->model_path, "model file")->required();
    ceval->add_option("--target", ceval_opt->target, "which layer to score")
        ->required()
        ->check(CLI::IsMember(targets));
    ceval->add_flag("--no-task-type-feature", ceval_opt->no_task_type,
                    "drop the task-type feature (dependency target only)");
    ceval->callback([ceval_opt] { run_crf_eval(*ceval_opt); });

    auto decode_opt = std::make_shared<CrfDecodeOptions>();
    auto* decode = crf_cmd->add_subcommand("decode", "Decode one layer's labels per instruction");
    decode->add_option("--conllu", decode_opt->conllu_path, "instructions to decode")->required();
    decode->add_option("--records", decode_opt->records_path,
                       "annotation records (gold task labels for downstream layers)");
    decode->add_option("--model", decode_opt->model_path, "model file")->required();
    decode->add_option("--task-model", decode_opt->task_model_path,
                       "task model used to tag tasks before a downstream layer");
    decode->add_option("--target", decode_opt->target, "which layer to decode")
        ->required()
        ->check(CLI::IsMember(targets));
    decode->add_option("--out", decode_opt->out_path, "output file (default: standard output)");
    decode->add_flag("--no-task-type-feature", decode_opt->no_task_type,
                     "drop the task-type feature (dependency target only)");
    decode->callback([decode_opt] { run_crf_decode(*decode_opt); });

    // tag
    auto tag_opt = std::make_shared<TagOptions>();
    auto* tag = app.add_subcommand(
        "tag", "Run the full tagging stack and write annotation records");
    tag->add_option("--model-dir", tag_opt->model_dir, "directory with the four models")
        ->required();
    tag->add_option("--in", tag_opt->in_path, "CoNLL-U instructions")->required();
    tag->add_option("--out", tag_opt->out_path, "record file to write")->required();
    tag->add_flag("--no-task-type-feature", tag_opt->no_task_type,
                  "use the dependency model trained without the task-type feature");
    tag->callback([tag_opt] { run_tag(*tag_opt); });

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "Build control-flow graphs from records");
    graph_cmd->require_subcommand(1);

    auto graph_opt = std::make_shared<GraphOptions>();
    auto* gbuild = graph_cmd->add_subcommand(
        "build", "Assemble graphs from labeled records; emits DOT");
    gbuild->add_option("--conllu", graph_opt->conllu_path, "CoNLL-U instructions")->required();
    gbuild->add_option("--in", graph_opt->records_path, "annotation records with labels")
        ->required();
    gbuild->add_flag("--merge,!--no-merge", graph_opt->merge,
                     "merge redundant conditionals (default: merge)");
    gbuild->add_option("--out", graph_opt->out_path, "record file to write with graphs attached");
    gbuild->add_option("--dot", graph_opt->dot_path, "DOT file (default: standard output)");
    gbuild->callback([graph_opt] { run_graph_build(*graph_opt); });

    // plan
    auto plan_opt = std::make_shared<PlanOptions>();
    auto* plan = app.add_subcommand("plan", "Plan a control-flow graph against a world");
    plan->add_option("--graph", plan_opt->graph_path, "graph JSON file")->required();
    plan->add_option("--domain", plan_opt->domain_path,
                     "PDDL operator domain (default: data/domain.pddl)");
    plan->add_option("--world", plan_opt->world_path, "initial world facts")->required();
    plan->add_option("--templates", plan_opt->templates_path, "task template file")->required();
    plan->add_option("--out", plan_opt->out_dir, "output directory")->required();
    plan->add_flag("--emit-pddl", plan_opt->emit_pddl, "also write the PDDL domain and problems");
    plan->add_option("--budget", plan_opt->budget, "search node budget per task");
    plan->callback([plan_opt] { run_plan(*plan_opt); });

    // eval
    auto eval_opt = std::make_shared<EvalOptions>();
    auto* eval_cmd = app.add_subcommand(
        "eval", "End-to-end evaluation of the dependency systems against gold graphs");
    eval_cmd->add_option("--corpus", eval_opt->corpus_dir, "corpus directory with gold graphs")
        ->required();
    eval_cmd->add_option("--models", eval_opt->models_dir, "directory with the four models");
    eval_cmd->add_option("--systems", eval_opt->systems,
                         "comma-separated systems (full, tf-ablation, lex)");
    eval_cmd->add_option("--merge", eval_opt->merge, "evaluate merged, unmerged or both")
        ->check(CLI::IsMember({"both", "on", "off"}));
    eval_cmd->add_option("--markers", eval_opt->markers_path, "marker table for the lex system");
    eval_cmd->add_flag("--oracle", eval_opt->oracle,
                       "feed gold labels through the pipeline instead of model predictions");
    eval_cmd->add_option("--out", eval_opt->out_prefix,
                         "report prefix (writes PREFIX.txt and PREFIX.json)");
    eval_cmd->callback([eval_opt] { run_eval(*eval_opt); });

    // pipeline
    auto pipe_opt = std::make_shared<PipelineConfig>();
    auto pipe_path = std::make_shared<std::string>();
    auto pipe_in = std::make_shared<std::string>();
    auto* pipe = app.add_subcommand(
        "pipeline", "Config-driven run: ensure models, then tag, build and plan instructions");
    pipe->add_option("--config", *pipe_path, "pipeline config file")->required();
    auto* ov_seed = pipe->add_option("--seed", pipe_opt->seed, "override training.seed");
    auto* ov_count = pipe->add_option("--count", pipe_opt->count, "override training.count");
    auto* ov_corpus = pipe->add_option("--corpus", pipe_opt->corpus_dir, "override paths.corpus");
    auto* ov_models = pipe->add_option("--models", pipe_opt->models_dir, "override paths.models");
    auto* ov_out = pipe->add_option("--out", pipe_opt->out_dir, "override paths.out");
    auto* ov_merge = pipe->add_flag("--merge,!--no-merge", pipe_opt->merge_redundant,
                                    "override features.merge_redundant");
    auto* ov_ttf = pipe->add_flag("--task-type-feature,!--no-task-type-feature",
                                  pipe_opt->use_task_type, "override features.use_task_type");
    auto* ov_pddl = pipe->add_flag("--emit-pddl,!--no-emit-pddl", pipe_opt->emit_pddl,
                                   "override planner.emit_pddl");
    pipe->add_option("--in", *pipe_in, "CoNLL-U instructions to process");
    pipe->callback([=] {
        PipelineConfig config = PipelineConfig::from_file(*pipe_path);
        if (ov_seed->count() > 0) config.seed = pipe_opt->seed;
        if (ov_count->count() > 0) config.count = pipe_opt->count;
        if (ov_corpus->count() > 0) config.corpus_dir = pipe_opt->corpus_dir;
        if (ov_models->count() > 0) config.models_dir = pipe_opt->models_dir;
        if (ov_out->count() > 0) config.out_dir = pipe_opt->out_dir;
        if (ov_merge->count() > 0) config.merge_redundant = pipe_opt->merge_redundant;
        if (ov_ttf->count() > 0) config.use_task_type = pipe_opt->use_task_type;
        if (ov_pddl->count() > 0) config.emit_pddl = pipe_opt->emit_pddl;
        run_pipeline(config, *pipe_in);
    });
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Natural-language instructions to conditional robot plans"};
    app.set_version_flag("--version", "nlplan 1.0.0");
    build_app(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
        return 64;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
    return 0;
}

}  // namespace nlplan::cli
