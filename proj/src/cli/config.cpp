#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <set>
#include <sstream>

#include "nlplan/cli/cli.hpp"
#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/corpus/annotations.hpp"
#include "nlplan/corpus/conllu.hpp"

namespace nlplan::cli {

namespace {

/// Drops an unquoted '#' comment; quotes only matter up to the comment scan.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

[[noreturn]] void bad_line(const std::string& origin, int lineno, const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + what);
}

/// Keys a config struct consumed; anything else in the file is a typo.
void reject_unknown(const ConfigMap& map, const std::set<std::string>& known,
                    const std::string& origin) {
    for (const auto& [key, value] : map) {
        (void)value;
        if (!known.count(key)) throw ConfigError(origin + ": unknown config key \"" + key + "\"");
    }
}

}  // namespace

ConfigMap parse_config(const std::string& text, const std::string& origin) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = trim(strip_comment(line));
        if (content.empty()) continue;
        if (content.front() == '[') {
            if (content.back() != ']') bad_line(origin, lineno, "unterminated section header");
            section = trim(content.substr(1, content.size() - 2));
            if (!valid_key(section)) bad_line(origin, lineno, "invalid section name");
            continue;
        }
        const std::size_t eq = content.find('=');
        if (eq == std::string::npos) bad_line(origin, lineno, "expected key = value");
        const std::string key = trim(content.substr(0, eq));
        if (!valid_key(key)) bad_line(origin, lineno, "invalid key \"" + key + "\"");
        std::string value = trim(content.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        else if (!value.empty() && value.front() == '"')
            bad_line(origin, lineno, "unterminated quoted value");
        const std::string full = section.empty() ? key : section + "." + key;
        if (map.count(full)) bad_line(origin, lineno, "duplicate key \"" + full + "\"");
        map[full] = value;
    }
    return map;
}

ConfigMap read_config(const std::string& path) { return parse_config(read_file(path), path); }

std::string config_string(const ConfigMap& map, const std::string& key,
                          const std::string& fallback) {
    auto it = map.find(key);
    return it == map.end() ? fallback : it->second;
}

bool config_bool(const ConfigMap& map, const std::string& key, bool fallback) {
    auto it = map.find(key);
    if (it == map.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError("config key \"" + key + "\": expected true or false, got \"" + it->second +
                      "\"");
}

long long config_int(const ConfigMap& map, const std::string& key, long long fallback) {
    auto it = map.find(key);
    if (it == map.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const long long value = std::strtoll(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
        throw ConfigError("config key \"" + key + "\": expected an integer, got \"" + it->second +
                          "\"");
    return value;
}

double config_real(const ConfigMap& map, const std::string& key, double fallback) {
    auto it = map.find(key);
    if (it == map.end()) return fallback;
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(it->second.c_str(), &end);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
        throw ConfigError("config key \"" + key + "\": expected a number, got \"" + it->second +
                          "\"");
    return value;
}

PipelineConfig PipelineConfig::from_map(const ConfigMap& map, const std::string& origin) {
    PipelineConfig config;
    config.corpus_dir = config_string(map, "paths.corpus", "");
    config.models_dir = config_string(map, "paths.models", "");
    config.templates_path = config_string(map, "paths.templates", "");
    config.world_path = config_string(map, "paths.world", "");
    config.domain_path = config_string(map, "paths.domain", "");
    config.markers_path = config_string(map, "paths.markers", "");
    config.out_dir = config_string(map, "paths.out", "");

    const long long seed = config_int(map, "training.seed", static_cast<long long>(config.seed));
    if (seed < 0) throw ConfigError(origin + ": training.seed must be nonnegative");
    config.seed = static_cast<unsigned long long>(seed);
    const long long count = config_int(map, "training.count", config.count);
    if (count < 1) throw ConfigError(origin + ": training.count must be positive");
    config.count = static_cast<int>(count);
    config.training.regularization =
        config_real(map, "training.regularization", config.training.regularization);
    config.training.tolerance = config_real(map, "training.tolerance", config.training.tolerance);
    config.training.max_iterations = static_cast<int>(
        config_int(map, "training.max_iterations", config.training.max_iterations));

    config.use_task_type = config_bool(map, "features.use_task_type", true);
    config.merge_redundant = config_bool(map, "features.merge_redundant", true);

    config.emit_pddl = config_bool(map, "planner.emit_pddl", false);
    config.budget = config_int(map, "planner.budget", config.budget);
    if (config.budget < 0) throw ConfigError(origin + ": planner.budget must be nonnegative");

    if (config.models_dir.empty())
        throw ConfigError(origin + ": paths.models is required");

    reject_unknown(map,
                   {"paths.corpus", "paths.models", "paths.templates", "paths.world",
                    "paths.domain", "paths.markers", "paths.out", "training.seed",
                    "training.count", "training.regularization", "training.tolerance",
                    "training.max_iterations", "features.use_task_type",
                    "features.merge_redundant", "planner.emit_pddl", "planner.budget"},
                   origin);
    return config;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    return from_map(read_config(path), path);
}

corpus::SynthProfile profile_from_map(const ConfigMap& map, const std::string& origin) {
    corpus::SynthProfile profile;
    profile.mean_tasks = config_real(map, "mean_tasks", profile.mean_tasks);
    profile.sd_tasks = config_real(map, "sd_tasks", profile.sd_tasks);
    profile.max_tasks = static_cast<int>(config_int(map, "max_tasks", profile.max_tasks));
    profile.out_of_order_prob = config_real(map, "out_of_order_prob", profile.out_of_order_prob);
    profile.w_sequential = config_real(map, "w_sequential", profile.w_sequential);
    profile.w_marked_conditional =
        config_real(map, "w_marked_conditional", profile.w_marked_conditional);
    profile.w_conditional_with_else =
        config_real(map, "w_conditional_with_else", profile.w_conditional_with_else);
    profile.w_negated_conditional =
        config_real(map, "w_negated_conditional", profile.w_negated_conditional);
    profile.w_implicit_positive =
        config_real(map, "w_implicit_positive", profile.w_implicit_positive);
    profile.w_implicit_negative =
        config_real(map, "w_implicit_negative", profile.w_implicit_negative);
    profile.w_duplicate_conditional =
        config_real(map, "w_duplicate_conditional", profile.w_duplicate_conditional);
    profile.seq_adverb_prob = config_real(map, "seq_adverb_prob", profile.seq_adverb_prob);

    reject_unknown(map,
                   {"mean_tasks", "sd_tasks", "max_tasks", "out_of_order_prob", "w_sequential",
                    "w_marked_conditional", "w_conditional_with_else", "w_negated_conditional",
                    "w_implicit_positive", "w_implicit_negative", "w_duplicate_conditional",
                    "seq_adverb_prob"},
                   origin);
    return profile;
}

std::vector<corpus::AnnotatedInstruction> load_corpus_dir(const std::string& dir) {
    const std::string conllu = dir + "/" + kCorpusConllu;
    const std::string records = dir + "/" + kCorpusRecords;
    auto instructions = corpus::read_conllu(conllu);
    auto merged = corpus::read_annotations(records, instructions);
    if (!merged.unmatched_ids.empty())
        throw ValidationError(records + ": " + std::to_string(merged.unmatched_ids.size()) +
                              " record(s) match no instruction (first: " +
                              merged.unmatched_ids.front() + ")");
    return std::move(merged.instructions);
}

eval::SystemModels load_models_dir(const std::string& dir) {
    eval::SystemModels models;
    models.task = crf::load_model(dir + "/" + kTaskModel);
    models.argument = crf::load_model(dir + "/" + kArgumentModel);
    models.dependency_full = crf::load_model(dir + "/" + kDependencyFullModel);
    models.dependency_no_task_type = crf::load_model(dir + "/" + kDependencyNoTfModel);
    return models;
}

}  // namespace nlplan::cli
