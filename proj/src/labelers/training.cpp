#include <algorithm>

#include "nlplan/common/error.hpp"
#include "nlplan/labelers/labelers.hpp"

namespace nlplan::labelers {

namespace {

std::vector<int> label_ids(const std::vector<std::string>& labels,
                           const corpus::LabelAlphabet& alphabet, const std::string& origin) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        int id = alphabet.index_of(label);
        if (id < 0)
            throw ValidationError(origin + ": label '" + label + "' is not in the alphabet");
        out.push_back(id);
    }
    return out;
}

}  // namespace

std::vector<int> gold_splits(const corpus::AnnotatedInstruction& instr,
                             const TaskTagging& gold_tagging) {
    std::vector<int> gaps = gap_lengths(gold_tagging, instr.token_count());
    if (!instr.gold_argument_labels || !instr.gold_argument_owners)
        return naive_splits(gold_tagging, instr.token_count());

    ArgumentTagging gold = arguments_from_labels(instr, gold_tagging, *instr.gold_argument_labels);
    if (instr.gold_argument_owners->size() != gold.spans.size())
        return naive_splits(gold_tagging, instr.token_count());

    // Smallest split that keeps every span owned by the left task on the left
    // side of its gap; gaps without left-owned spans split at zero.
    std::vector<int> splits(gaps.size(), 0);
    for (std::size_t k = 0; k < splits.size(); ++k) {
        const int p1 = gold_tagging.task_indices[k];
        const int p2 = gold_tagging.task_indices[k + 1];
        int s = 0;
        for (const ArgumentSpan& span : gold.spans) {
            if (span.owner_task != static_cast<int>(k)) continue;
            if (span.start > p1 && span.end < p2) s = std::max(s, span.end - p1);
        }
        splits[k] = std::min(s, gaps[k]);
    }
    return splits;
}

crf::CrfModel train_task_model(const std::vector<corpus::AnnotatedInstruction>& data,
                               const corpus::LabelAlphabet& alphabet,
                               const crf::TrainingConfig& config) {
    crf::FeatureInterner dict;
    std::vector<crf::Example> examples;
    examples.reserve(data.size());
    for (const auto& instr : data) {
        if (!instr.gold_task_labels)
            throw ValidationError("instruction " + instr.id + " has no task labels to train on");
        crf::Example ex;
        ex.x = intern_features(task_features(instr), dict);
        ex.y = label_ids(*instr.gold_task_labels, alphabet, instr.id);
        examples.push_back(std::move(ex));
    }
    return crf::train(examples, alphabet, std::move(dict), config);
}

crf::CrfModel train_argument_model(const std::vector<corpus::AnnotatedInstruction>& data,
                                   const corpus::LabelAlphabet& alphabet,
                                   const corpus::LabelAlphabet& task_alphabet,
                                   const crf::TrainingConfig& config) {
    task_alphabet.validate();
    crf::FeatureInterner dict;
    std::vector<crf::Example> examples;
    examples.reserve(data.size());
    for (const auto& instr : data) {
        if (!instr.gold_task_labels || !instr.gold_argument_labels)
            throw ValidationError("instruction " + instr.id +
                                  " lacks the task/argument labels needed for training");
        TaskTagging tagging = tagging_from_labels(instr, *instr.gold_task_labels);
        if (tagging.task_count() == 0) continue;  // association undefined; nothing to learn
        std::vector<int> splits = gold_splits(instr, tagging);
        std::vector<std::string> assoc = build_association_features(tagging, instr, splits);
        crf::Example ex;
        ex.x = intern_features(argument_features(instr, assoc), dict);
        ex.y = label_ids(*instr.gold_argument_labels, alphabet, instr.id);
        examples.push_back(std::move(ex));
    }
    return crf::train(examples, alphabet, std::move(dict), config);
}

crf::CrfModel train_dependency_model(const std::vector<corpus::AnnotatedInstruction>& data,
                                     bool use_task_type, const crf::TrainingConfig& config) {
    const corpus::LabelAlphabet alphabet = corpus::dependency_alphabet();
    crf::FeatureInterner dict;
    std::vector<crf::Example> examples;
    examples.reserve(data.size());
    for (const auto& instr : data) {
        if (!instr.gold_task_labels || !instr.gold_dependency_labels)
            throw ValidationError("instruction " + instr.id +
                                  " lacks the task/dependency labels needed for training");
        TaskTagging tagging = tagging_from_labels(instr, *instr.gold_task_labels);
        if (tagging.task_count() == 0) continue;
        if (instr.gold_dependency_labels->size() != tagging.task_count())
            throw ValidationError("instruction " + instr.id +
                                  " has a dependency label count unequal to its task count");
        crf::Example ex;
        ex.x = intern_features(extract_dependency_features(instr, tagging, use_task_type), dict);
        ex.y = label_ids(*instr.gold_dependency_labels, alphabet, instr.id);
        examples.push_back(std::move(ex));
    }
    return crf::train(examples, alphabet, std::move(dict), config);
}

}  // namespace nlplan::labelers
