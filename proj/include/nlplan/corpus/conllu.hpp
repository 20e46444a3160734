#ifndef NLPLAN_CORPUS_CONLLU_HPP
#define NLPLAN_CORPUS_CONLLU_HPP

#include <string>
#include <vector>

#include "nlplan/corpus/types.hpp"

namespace nlplan::corpus {

/// Reads a CoNLL-U file (10 tab-separated columns, blank-line sentence
/// separation). Documents are split at `# newdoc` comments; a file with no
/// such comment is a single document. Multiword-token ranges (id "1-2") and
/// empty nodes (id "1.1") are skipped. HEAD references are converted from
/// sentence-local ids to global token indices.
///
/// Throws ValidationError naming the offending line / sentence on malformed
/// input or non-tree head structure.
std::vector<AnnotatedInstruction> read_conllu(const std::string& path);

/// Same, from an in-memory buffer; `origin` names the source in errors.
std::vector<AnnotatedInstruction> parse_conllu(const std::string& text,
                                               const std::string& origin);

/// Serializes the retained columns (ID, FORM, UPOS, HEAD, DEPREL); the rest
/// are "_". read_conllu(write_conllu(x)) == x on those columns.
std::string write_conllu(const std::vector<AnnotatedInstruction>& instructions);

/// Validates token invariants (head in-sentence, acyclic, single root).
/// Throws ValidationError naming the instruction and sentence on failure.
void validate_instruction(const AnnotatedInstruction& instr);

}  // namespace nlplan::corpus

#endif
