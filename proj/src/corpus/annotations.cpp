#include "nlplan/corpus/annotations.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"

namespace nlplan::corpus {

using nlohmann::json;

std::pair<std::string, std::string> split_bio(const std::string& label) {
    if (label == "O") return {"O", ""};
    if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-') {
        return {label.substr(0, 1), label.substr(2)};
    }
    throw ValidationError("malformed BIO label: '" + label + "'");
}

namespace {

std::vector<std::string> string_list(const json& j, const std::string& field,
                                     const std::string& where) {
    if (!j.is_array()) throw ValidationError(where + ": field '" + field + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string())
            throw ValidationError(where + ": field '" + field + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

void merge_record(AnnotatedInstruction& instr, const json& rec, const std::string& where,
                  const LabelAlphabet& tasks, const std::vector<std::string>& argument_types) {
    const int n = instr.token_count();
    if (rec.contains("task_labels")) {
        auto labels = string_list(rec["task_labels"], "task_labels", where);
        if (static_cast<int>(labels.size()) != n) {
            throw ValidationError(where + ": task_labels length " +
                                  std::to_string(labels.size()) + " != token count " +
                                  std::to_string(n));
        }
        for (const auto& l : labels) {
            if (!tasks.contains(l)) {
                throw ValidationError(where + ": task label '" + l + "' not in alphabet");
            }
        }
        instr.gold_task_labels = labels;
    }
    if (rec.contains("argument_labels")) {
        auto labels = string_list(rec["argument_labels"], "argument_labels", where);
        if (static_cast<int>(labels.size()) != n) {
            throw ValidationError(where + ": argument_labels length " +
                                  std::to_string(labels.size()) + " != token count " +
                                  std::to_string(n));
        }
        for (const auto& l : labels) {
            auto [tag, type] = split_bio(l);
            if (tag != "O" &&
                std::find(argument_types.begin(), argument_types.end(), type) ==
                    argument_types.end()) {
                throw ValidationError(where + ": argument type '" + type + "' not in alphabet");
            }
        }
        instr.gold_argument_labels = labels;
    }
    if (rec.contains("dependency_labels")) {
        auto labels = string_list(rec["dependency_labels"], "dependency_labels", where);
        for (const auto& l : labels) {
            if (!is_dependency_label(l)) {
                throw ValidationError(where + ": unknown dependency label '" + l + "'");
            }
        }
        if (instr.gold_task_labels) {
            int task_count = 0;
            for (const auto& t : *instr.gold_task_labels) {
                if (t != tasks.outside_label) ++task_count;
            }
            if (task_count != static_cast<int>(labels.size())) {
                throw ValidationError(where + ": dependency_labels length " +
                                      std::to_string(labels.size()) + " != task count " +
                                      std::to_string(task_count));
            }
        }
        instr.gold_dependency_labels = labels;
    }
    if (rec.contains("argument_owners")) {
        const json& owners = rec["argument_owners"];
        if (!owners.is_array())
            throw ValidationError(where + ": argument_owners must be an array");
        std::vector<int> idx;
        for (const auto& v : owners) {
            if (!v.is_number_integer())
                throw ValidationError(where + ": argument_owners must hold integers");
            idx.push_back(v.get<int>());
        }
        instr.gold_argument_owners = idx;
    }
    if (rec.contains("graph") && !rec["graph"].is_null()) {
        instr.gold_graph_json = rec["graph"].dump();
    }
}

}  // namespace

AnnotationMergeResult parse_annotations(const std::string& text, const std::string& origin,
                                        const std::vector<AnnotatedInstruction>& corpus,
                                        const LabelAlphabet& tasks,
                                        const std::vector<std::string>& argument_types) {
    AnnotationMergeResult result;
    result.instructions = corpus;
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < result.instructions.size(); ++i) {
        by_id[result.instructions[i].id] = i;
    }

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = origin + " line " + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(where + ": invalid record: " + e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string()) {
            throw ValidationError(where + ": record must be an object with a string 'id'");
        }
        const std::string id = rec["id"].get<std::string>();
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            result.unmatched_ids.push_back(id);
            continue;
        }
        merge_record(result.instructions[it->second], rec, where, tasks, argument_types);
    }
    return result;
}

AnnotationMergeResult read_annotations(const std::string& path,
                                       const std::vector<AnnotatedInstruction>& corpus,
                                       const LabelAlphabet& tasks,
                                       const std::vector<std::string>& argument_types) {
    return parse_annotations(read_file(path), path, corpus, tasks, argument_types);
}

std::string write_annotations(const std::vector<AnnotatedInstruction>& instructions) {
    std::ostringstream out;
    for (const auto& instr : instructions) {
        json rec;
        rec["id"] = instr.id;
        if (instr.gold_task_labels) rec["task_labels"] = *instr.gold_task_labels;
        if (instr.gold_argument_labels) rec["argument_labels"] = *instr.gold_argument_labels;
        if (instr.gold_dependency_labels)
            rec["dependency_labels"] = *instr.gold_dependency_labels;
        if (instr.gold_argument_owners) rec["argument_owners"] = *instr.gold_argument_owners;
        if (instr.gold_graph_json) rec["graph"] = json::parse(*instr.gold_graph_json);
        out << rec.dump() << "\n";
    }
    return out.str();
}

}  // namespace nlplan::corpus
