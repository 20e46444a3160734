#ifndef NLPLAN_CORPUS_ANNOTATIONS_HPP
#define NLPLAN_CORPUS_ANNOTATIONS_HPP

#include <string>
#include <vector>

#include "nlplan/corpus/types.hpp"

namespace nlplan::corpus {

struct AnnotationMergeResult {
    std::vector<AnnotatedInstruction> instructions;
    std::vector<std::string> unmatched_ids;  // record ids with no matching instruction
};

/// Reads a gold-annotation record file (one JSON object per line, keyed by
/// instruction id; fields: task_labels, argument_labels, dependency_labels,
/// graph, and optionally argument_owners) and merges the labels into the
/// matching instructions.
///
/// Validates label-list lengths against the instruction, task labels against
/// `tasks`, argument labels for BIO form over `argument_types`, and
/// dependency labels against the fixed four-label set.
AnnotationMergeResult read_annotations(const std::string& path,
                                       const std::vector<AnnotatedInstruction>& corpus,
                                       const LabelAlphabet& tasks = default_task_alphabet(),
                                       const std::vector<std::string>& argument_types =
                                           default_argument_types());

AnnotationMergeResult parse_annotations(const std::string& text, const std::string& origin,
                                        const std::vector<AnnotatedInstruction>& corpus,
                                        const LabelAlphabet& tasks,
                                        const std::vector<std::string>& argument_types);

/// Serializes gold labels of each instruction as one JSON object per line.
std::string write_annotations(const std::vector<AnnotatedInstruction>& instructions);

/// Splits "B-Object" into ("B", "Object"); "O" -> ("O", ""). Throws
/// ValidationError for anything else.
std::pair<std::string, std::string> split_bio(const std::string& label);

}  // namespace nlplan::corpus

#endif
