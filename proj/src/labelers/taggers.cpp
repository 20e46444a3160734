#include <algorithm>
#include <set>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/corpus/annotations.hpp"
#include "nlplan/labelers/labelers.hpp"

namespace nlplan::labelers {

namespace {

const std::set<std::string>& first_second_person() {
    static const std::set<std::string> s = {"i",   "me", "my",  "mine", "you", "your",
                                            "yours", "we", "us", "our",  "ours"};
    return s;
}

const std::set<std::string>& third_person_anaphors() {
    static const std::set<std::string> s = {"it",  "its", "them",  "they",  "their", "theirs",
                                            "him", "his", "her",   "hers",  "this",  "that",
                                            "these", "those"};
    return s;
}

bool is_pronoun_word(const std::string& value) {
    std::string v = to_lower(value);
    return first_second_person().count(v) > 0 || third_person_anaphors().count(v) > 0;
}

// A span still in need of resolution: a single third-person pronoun word
// whose token is tagged PRON. Replaced values are multi-token or non-pronoun
// words, so resolution is idempotent.
bool is_anaphoric(const corpus::AnnotatedInstruction& instr, const ArgumentSpan& span) {
    if (third_person_anaphors().count(to_lower(span.value)) == 0) return false;
    for (int i = span.start; i <= span.end; ++i)
        if (instr.token_at(i).pos == "PRON") return true;
    return false;
}

// Drops leading adpositions/determiners from the span text ("to me" -> "me",
// "the coffee" -> "coffee"), keeping at least one token.
std::string span_value(const corpus::AnnotatedInstruction& instr, int start, int end) {
    int first = start;
    while (first < end) {
        const std::string& pos = instr.token_at(first).pos;
        if (pos == "ADP" || pos == "DET") ++first;
        else break;
    }
    std::vector<std::string> words;
    for (int i = first; i <= end; ++i) words.push_back(instr.token_at(i).surface);
    return join(words, " ");
}

double assignment_score(const crf::CrfModel& model, const corpus::AnnotatedInstruction& instr,
                        const TaskTagging& tagging, const std::vector<int>& splits) {
    std::vector<std::string> assoc = build_association_features(tagging, instr, splits);
    crf::FeatureSeq ids = lookup_features(argument_features(instr, assoc), model.features);
    return crf::viterbi(model, ids).log_probability;
}

int ordinal_of_trigger(const TaskTagging& tagging, int global_index) {
    for (std::size_t k = 0; k < tagging.task_count(); ++k)
        if (tagging.task_indices[k] == global_index) return static_cast<int>(k);
    return -1;
}

std::vector<ArgumentSpan> spans_from_bio(const corpus::AnnotatedInstruction& instr,
                                         const std::vector<std::string>& labels,
                                         const std::vector<int>& owners,
                                         const TaskTagging& tagging) {
    std::vector<ArgumentSpan> spans;
    int start = -1;
    std::string type;
    auto flush = [&](int end) {
        if (start < 0) return;
        ArgumentSpan s;
        s.type = type;
        s.start = start;
        s.end = end;
        int owner = owners[static_cast<std::size_t>(start) - 1];
        if (owner < 0) owner = ordinal_of_trigger(tagging, start);
        s.owner_task = std::max(owner, 0);
        s.value = span_value(instr, start, end);
        spans.push_back(std::move(s));
        start = -1;
    };
    for (int i = 1; i <= instr.token_count(); ++i) {
        auto [prefix, t] = corpus::split_bio(labels[static_cast<std::size_t>(i) - 1]);
        if (prefix == "B") {
            flush(i - 1);
            start = i;
            type = t;
        } else if (prefix == "I") {
            if (start < 0 || t != type) {  // defensive; repaired labels never hit this
                flush(i - 1);
                start = i;
                type = t;
            }
        } else {
            flush(i - 1);
        }
    }
    flush(instr.token_count());
    return spans;
}

}  // namespace

std::vector<std::string> repair_bio(const std::vector<std::string>& labels) {
    std::vector<std::string> out = labels;
    std::string open_type;
    for (auto& label : out) {
        auto [prefix, type] = corpus::split_bio(label);
        if (prefix == "I" && type != open_type) {
            label = "B-" + type;
            open_type = type;
        } else {
            open_type = (prefix == "O") ? "" : type;
        }
    }
    return out;
}

TaskTagging tagging_from_labels(const corpus::AnnotatedInstruction& instr,
                                const std::vector<std::string>& labels) {
    if (labels.size() != instr.tokens.size())
        throw ValidationError("task label count does not match token count for " + instr.id);
    TaskTagging t;
    t.labels = labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == "O") continue;
        t.task_indices.push_back(static_cast<int>(i) + 1);
        if (std::find(t.task_types.begin(), t.task_types.end(), labels[i]) == t.task_types.end())
            t.task_types.push_back(labels[i]);
    }
    return t;
}

TaskTagging tag_tasks(const crf::CrfModel& model, const corpus::AnnotatedInstruction& instr,
                      const corpus::LabelAlphabet* expected) {
    if (expected && model.alphabet.labels != expected->labels)
        throw ValidationError("task model alphabet does not match the configured task types");
    crf::FeatureSeq ids = lookup_features(task_features(instr), model.features);
    crf::Decoding dec = crf::viterbi(model, ids);
    return tagging_from_labels(instr, dec.labels);
}

std::vector<int> choose_splits(const crf::CrfModel& model,
                               const corpus::AnnotatedInstruction& instr,
                               const TaskTagging& tagging) {
    if (tagging.task_count() == 0)
        throw ValidationError("argument decoding requires at least one task");
    std::vector<int> gaps = gap_lengths(tagging, instr.token_count());
    std::vector<int> splits = naive_splits(tagging, instr.token_count());
    if (splits.empty()) return splits;

    // Coordinate ascent over per-gap splits, left to right, starting from the
    // naive assignment and accepting only strict improvements; at the fixed
    // point every gap's chosen split dominates all its alternatives.
    double best = assignment_score(model, instr, tagging, splits);
    for (int sweep = 0; sweep < 8; ++sweep) {
        bool changed = false;
        for (std::size_t g = 0; g < splits.size(); ++g) {
            for (int s = 0; s <= gaps[g]; ++s) {
                if (s == splits[g]) continue;
                std::vector<int> trial = splits;
                trial[g] = s;
                double sc = assignment_score(model, instr, tagging, trial);
                if (sc > best + 1e-12) {
                    best = sc;
                    splits = std::move(trial);
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    return splits;
}

ArgumentTagging tag_arguments(const crf::CrfModel& model, const corpus::AnnotatedInstruction& instr,
                              const TaskTagging& tagging) {
    std::vector<int> splits = choose_splits(model, instr, tagging);
    std::vector<std::string> assoc = build_association_features(tagging, instr, splits);
    crf::FeatureSeq ids = lookup_features(argument_features(instr, assoc), model.features);
    crf::Decoding dec = crf::viterbi(model, ids);

    ArgumentTagging out;
    out.labels = repair_bio(dec.labels);
    std::vector<int> owners = association_owners(tagging, instr.token_count(), splits);
    out.spans = spans_from_bio(instr, out.labels, owners, tagging);
    return out;
}

ArgumentTagging resolve_anaphora(const corpus::AnnotatedInstruction& instr,
                                 const ArgumentTagging& args) {
    ArgumentTagging out = args;
    for (std::size_t i = 0; i < out.spans.size(); ++i) {
        ArgumentSpan& span = out.spans[i];
        if (!is_anaphoric(instr, span)) continue;

        // Nearest preceding non-pronominal span of the same type, then the
        // nearest preceding Object; earlier spans may already be resolved.
        int best = -1;
        for (std::size_t j = 0; j < i; ++j) {
            const ArgumentSpan& cand = out.spans[j];
            if (cand.start >= span.start || is_pronoun_word(cand.value)) continue;
            if (cand.type == span.type) best = static_cast<int>(j);
        }
        if (best < 0) {
            for (std::size_t j = 0; j < i; ++j) {
                const ArgumentSpan& cand = out.spans[j];
                if (cand.start >= span.start || is_pronoun_word(cand.value)) continue;
                if (cand.type == "Object") best = static_cast<int>(j);
            }
        }
        if (best < 0) {
            span.unresolved_pronoun = true;
            continue;
        }
        span.value = out.spans[static_cast<std::size_t>(best)].value;
        span.unresolved_pronoun = false;
    }
    return out;
}

DependencyTagging tag_dependencies(const crf::CrfModel& model, const StringFeatureSeq& features) {
    if (model.alphabet.labels != corpus::dependency_alphabet().labels)
        throw ValidationError("dependency model alphabet does not match the dependency label set");
    crf::FeatureSeq ids = lookup_features(features, model.features);
    crf::Decoding dec = crf::viterbi(model, ids);
    return DependencyTagging{dec.labels};
}

std::vector<TaskInstance> assemble_tasks(const TaskTagging& tagging, const ArgumentTagging& args,
                                         const DependencyTagging& deps) {
    if (deps.labels.size() != tagging.task_count())
        throw InternalError("dependency label count does not match task count");
    std::vector<TaskInstance> out;
    out.reserve(tagging.task_count());
    for (std::size_t k = 0; k < tagging.task_count(); ++k) {
        TaskInstance t;
        t.task_type = tagging.type_of(k);
        t.trigger_index = tagging.task_indices[k];
        t.dependency = deps.labels[k];
        for (const ArgumentSpan& span : args.spans) {
            if (span.owner_task != static_cast<int>(k)) continue;
            t.arguments[span.type].push_back(span.value);
            if (span.unresolved_pronoun) t.unresolved_pronoun = true;
        }
        out.push_back(std::move(t));
    }
    return out;
}

ArgumentTagging arguments_from_labels(const corpus::AnnotatedInstruction& instr,
                                      const TaskTagging& tagging,
                                      const std::vector<std::string>& bio_labels) {
    if (bio_labels.size() != instr.tokens.size())
        throw ValidationError("argument label count does not match token count for " + instr.id);
    ArgumentTagging out;
    out.labels = repair_bio(bio_labels);
    std::vector<int> owners =
        association_owners(tagging, instr.token_count(), naive_splits(tagging, instr.token_count()));
    out.spans = spans_from_bio(instr, out.labels, owners, tagging);

    // Recorded span owners, when present, override the naive association.
    if (instr.gold_argument_owners &&
        instr.gold_argument_owners->size() == out.spans.size()) {
        for (std::size_t i = 0; i < out.spans.size(); ++i) {
            int owner = (*instr.gold_argument_owners)[i];
            if (owner < 0 || owner >= static_cast<int>(tagging.task_count()))
                throw ValidationError("argument span owner out of range for " + instr.id);
            out.spans[i].owner_task = owner;
        }
    }
    return out;
}

}  // namespace nlplan::labelers
