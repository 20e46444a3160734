#include <json.hpp>

#include <iomanip>
#include <sstream>

#include "nlplan/common/error.hpp"
#include "nlplan/eval/eval.hpp"

namespace nlplan::eval {

namespace {

using corpus::AnnotatedInstruction;
using nlohmann::json;

struct Predictions {
    labelers::TaskTagging tagging;
    labelers::ArgumentTagging arguments;
};

Predictions predict_spans(const AnnotatedInstruction& instr, const SystemModels& models,
                          const EvalConfig& config) {
    Predictions out;
    if (config.oracle_labels) {
        if (!instr.gold_task_labels || !instr.gold_argument_labels ||
            !instr.gold_dependency_labels)
            throw ValidationError("end_to_end_eval: instruction " + instr.id +
                                  " lacks the gold labels required by oracle mode");
        out.tagging = labelers::tagging_from_labels(instr, *instr.gold_task_labels);
        out.arguments = labelers::arguments_from_labels(instr, out.tagging,
                                                        *instr.gold_argument_labels);
    } else {
        out.tagging = labelers::tag_tasks(models.task, instr);
        // Argument decoding is undefined without a task; a taskless tagging
        // scores as an empty graph downstream.
        if (out.tagging.task_count() == 0) return out;
        out.arguments = labelers::tag_arguments(models.argument, instr, out.tagging);
    }
    out.arguments = labelers::resolve_anaphora(instr, out.arguments);
    return out;
}

labelers::DependencyTagging predict_dependencies(const AnnotatedInstruction& instr,
                                                 const labelers::TaskTagging& tagging,
                                                 const SystemModels& models,
                                                 const EvalConfig& config,
                                                 DependencySystem system) {
    if (config.oracle_labels) return {*instr.gold_dependency_labels};
    switch (system) {
        case DependencySystem::lex_induct:
            return lex_induct(instr, tagging, config.markers);
        case DependencySystem::crf_no_task_type:
            return labelers::tag_dependencies(
                models.dependency_no_task_type,
                labelers::extract_dependency_features(instr, tagging, false));
        case DependencySystem::crf_full:
            return labelers::tag_dependencies(
                models.dependency_full,
                labelers::extract_dependency_features(instr, tagging, true));
    }
    throw InternalError("end_to_end_eval: unhandled dependency system");
}

struct CellTally {
    int evaluated = 0;
    int exact = 0;
    double oer_sum = 0.0;
};

std::string format_rate(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << value * 100.0 << '%';
    return out.str();
}

std::string format_oer(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << value;
    return out.str();
}

}  // namespace

std::string system_name(DependencySystem system) {
    switch (system) {
        case DependencySystem::lex_induct: return "lex";
        case DependencySystem::crf_no_task_type: return "tf-ablation";
        case DependencySystem::crf_full: return "full";
    }
    throw InternalError("system_name: unhandled dependency system");
}

DependencySystem parse_system(const std::string& name) {
    if (name == "lex") return DependencySystem::lex_induct;
    if (name == "tf-ablation") return DependencySystem::crf_no_task_type;
    if (name == "full") return DependencySystem::crf_full;
    throw ConfigError("unknown system \"" + name + "\" (expected full, tf-ablation or lex)");
}

EvalReport end_to_end_eval(const std::vector<AnnotatedInstruction>& corpus,
                           const SystemModels& models, const EvalConfig& config) {
    if (config.systems.empty())
        throw ConfigError("end_to_end_eval: no dependency systems configured");
    if (!config.with_merge && !config.without_merge)
        throw ConfigError("end_to_end_eval: neither merge setting enabled");

    std::vector<bool> merge_settings;
    if (config.with_merge) merge_settings.push_back(true);
    if (config.without_merge) merge_settings.push_back(false);

    std::vector<CellTally> cells(config.systems.size() * merge_settings.size());
    EvalReport report;

    for (const AnnotatedInstruction& instr : corpus) {
        if (!instr.gold_graph_json) {
            ++report.skipped;
            continue;
        }
        const cfg::ControlFlowGraph gold =
            cfg::graph_from_json(*instr.gold_graph_json, instr.id);
        const Predictions spans = predict_spans(instr, models, config);
        ++report.evaluated;

        for (std::size_t s = 0; s < config.systems.size(); ++s) {
            cfg::ControlFlowGraph built;
            if (spans.tagging.task_count() > 0) {
                const labelers::DependencyTagging deps = predict_dependencies(
                    instr, spans.tagging, models, config, config.systems[s]);
                built = cfg::build_graph(
                    labelers::assemble_tasks(spans.tagging, spans.arguments, deps));
            }
            for (std::size_t m = 0; m < merge_settings.size(); ++m) {
                const cfg::ControlFlowGraph scored =
                    merge_settings[m] ? cfg::merge_redundant(built) : built.clone();
                CellTally& cell = cells[s * merge_settings.size() + m];
                ++cell.evaluated;
                if (cfg::graphs_equal(gold, scored)) ++cell.exact;
                cell.oer_sum += oer(gold, scored, config.oer_options).oer;
            }
        }
    }

    for (std::size_t s = 0; s < config.systems.size(); ++s) {
        for (std::size_t m = 0; m < merge_settings.size(); ++m) {
            const CellTally& cell = cells[s * merge_settings.size() + m];
            ConfigurationResult row;
            row.system = config.systems[s];
            row.merge = merge_settings[m];
            row.evaluated = cell.evaluated;
            row.exact_matches = cell.exact;
            if (cell.evaluated > 0) {
                row.exact_match_rate =
                    static_cast<double>(cell.exact) / static_cast<double>(cell.evaluated);
                row.mean_oer = cell.oer_sum / static_cast<double>(cell.evaluated);
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

std::string prf_table(const PrfReport& report) {
    std::size_t width = report.weighted.label.size();
    for (const auto& row : report.per_label) width = std::max(width, row.label.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width) + 2) << "label"
        << "precision  recall   f1       support\n";
    auto emit = [&](const PRF& row) {
        out << std::left << std::setw(static_cast<int>(width) + 2) << row.label << std::fixed
            << std::setprecision(3) << std::setw(11) << row.precision << std::setw(9)
            << row.recall << std::setw(9) << row.f1 << row.support << '\n';
    };
    for (const auto& row : report.per_label) emit(row);
    emit(report.weighted);
    return out.str();
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "system" << std::setw(7) << "merge" << std::setw(18)
        << "exact match" << "mean OER\n";
    for (const ConfigurationResult& row : report.rows) {
        std::ostringstream exact;
        exact << format_rate(row.exact_match_rate) << " (" << row.exact_matches << '/'
              << row.evaluated << ')';
        out << std::left << std::setw(14) << system_name(row.system) << std::setw(7)
            << (row.merge ? "yes" : "no") << std::setw(18) << exact.str()
            << format_oer(row.mean_oer) << '\n';
    }
    out << "evaluated " << report.evaluated << " instruction(s); skipped " << report.skipped
        << " without a gold graph\n";
    return out.str();
}

std::string report_json(const EvalReport& report) {
    json rows = json::array();
    for (const ConfigurationResult& row : report.rows) {
        rows.push_back({
            {"system", system_name(row.system)},
            {"merge", row.merge},
            {"evaluated", row.evaluated},
            {"exact_matches", row.exact_matches},
            {"exact_match_rate", row.exact_match_rate},
            {"mean_oer", row.mean_oer},
        });
    }
    json doc = {
        {"evaluated", report.evaluated},
        {"skipped", report.skipped},
        {"rows", rows},
    };
    return doc.dump(2) + "\n";
}

}  // namespace nlplan::eval
