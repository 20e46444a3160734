#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/eval/eval.hpp"

namespace nlplan::eval {

namespace {

// Sentinels bracketing non-empty branches in the linearization. Task types
// never contain angle brackets, so these cannot collide with node tokens.
const std::string kPosOpen = "<pos>";
const std::string kPosClose = "</pos>";
const std::string kNegOpen = "<neg>";
const std::string kNegClose = "</neg>";

std::string node_token(const cfg::CfgNode& node, const OerOptions& options) {
    if (!options.compare_arguments) return node.task.task_type;
    // Mirror the normalization graphs_equal applies: per argument type, the
    // sorted multiset of case-folded, article-stripped values.
    std::ostringstream out;
    out << node.task.task_type;
    for (const auto& [type, values] : node.task.arguments) {
        std::vector<std::string> norm;
        norm.reserve(values.size());
        for (const auto& v : values) norm.push_back(normalize_value(v));
        std::sort(norm.begin(), norm.end());
        out << '|' << type << '=' << join(norm, ",");
    }
    return out.str();
}

void linearize_into(const cfg::CfgNode* node, const OerOptions& options,
                    std::vector<std::string>& out) {
    if (!node) return;
    out.push_back(node_token(*node, options));
    if (node->positive) {
        out.push_back(kPosOpen);
        linearize_into(node->positive.get(), options, out);
        out.push_back(kPosClose);
    }
    if (node->negative) {
        out.push_back(kNegOpen);
        linearize_into(node->negative.get(), options, out);
        out.push_back(kNegClose);
    }
    linearize_into(node->next.get(), options, out);
}

}  // namespace

PrfReport prf_report(const std::vector<std::vector<std::string>>& gold,
                     const std::vector<std::vector<std::string>>& pred) {
    if (gold.size() != pred.size())
        throw ValidationError("prf_report: " + std::to_string(gold.size()) +
                              " gold sequences vs " + std::to_string(pred.size()) +
                              " predicted");
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i].size() != pred[i].size())
            throw ValidationError("prf_report: sequence " + std::to_string(i) + " has " +
                                  std::to_string(gold[i].size()) + " gold labels vs " +
                                  std::to_string(pred[i].size()) + " predicted");

    std::map<std::string, long> true_positive, predicted, support;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (std::size_t j = 0; j < gold[i].size(); ++j) {
            const std::string& g = gold[i][j];
            const std::string& p = pred[i][j];
            ++support[g];
            ++predicted[p];
            if (g == p) ++true_positive[g];
            labels.insert(g);
            labels.insert(p);
        }
    }

    PrfReport report;
    long total_support = 0;
    for (const auto& label : labels) {
        PRF row;
        row.label = label;
        row.support = support[label];
        const long tp = true_positive[label];
        const long pp = predicted[label];
        row.precision = pp > 0 ? static_cast<double>(tp) / static_cast<double>(pp) : 0.0;
        row.recall =
            row.support > 0 ? static_cast<double>(tp) / static_cast<double>(row.support) : 0.0;
        row.f1 = row.precision + row.recall > 0.0
                     ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                     : 0.0;
        total_support += row.support;
        report.per_label.push_back(std::move(row));
    }

    report.weighted.label = "weighted average";
    report.weighted.support = total_support;
    if (total_support > 0) {
        for (const auto& row : report.per_label) {
            const double w = static_cast<double>(row.support) / static_cast<double>(total_support);
            report.weighted.precision += w * row.precision;
            report.weighted.recall += w * row.recall;
            report.weighted.f1 += w * row.f1;
        }
    }
    return report;
}

std::vector<std::string> linearize(const cfg::ControlFlowGraph& graph,
                                   const OerOptions& options) {
    std::vector<std::string> out;
    linearize_into(graph.root.get(), options, out);
    return out;
}

OerResult oer(const cfg::ControlFlowGraph& reference, const cfg::ControlFlowGraph& hypothesis,
              const OerOptions& options) {
    const int n_ref = static_cast<int>(cfg::preorder(reference).size());
    if (n_ref == 0) throw ValidationError("oer: reference graph is empty");

    const std::vector<std::string> ref = linearize(reference, options);
    const std::vector<std::string> hyp = linearize(hypothesis, options);
    const std::size_t n = hyp.size();
    const std::size_t m = ref.size();

    // dist[i][j] = minimum edits turning hyp[0..i) into ref[0..j).
    std::vector<std::vector<int>> dist(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) dist[i][0] = static_cast<int>(i);
    for (std::size_t j = 0; j <= m; ++j) dist[0][j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = dist[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
            dist[i][j] = std::min({sub, dist[i - 1][j] + 1, dist[i][j - 1] + 1});
        }
    }

    // Walk one minimal script back, preferring matches, then substitutions,
    // then insertions. Any minimal script has the same total S+D+I, so the
    // preference only fixes how that total splits across the three counts.
    OerResult result;
    result.n_ref = n_ref;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] && dist[i][j] == dist[i - 1][j - 1]) {
            --i, --j;
        } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
            ++result.substitutions;
            --i, --j;
        } else if (j > 0 && dist[i][j] == dist[i][j - 1] + 1) {
            ++result.insertions;
            --j;
        } else {
            ++result.deletions;
            --i;
        }
    }
    result.oer = static_cast<double>(result.substitutions + result.deletions +
                                     result.insertions) /
                 static_cast<double>(n_ref);
    return result;
}

}  // namespace nlplan::eval
