#ifndef NLPLAN_CORPUS_SYNTH_HPP
#define NLPLAN_CORPUS_SYNTH_HPP

#include <string>
#include <vector>

#include "nlplan/corpus/types.hpp"

namespace nlplan::corpus {

/// Knobs for the template-grammar generator. Fragment weights steer the mix
/// of instruction shapes; every shape carries its own parse skeleton, labels
/// and gold graph, so generated corpora need no external parser.
struct SynthProfile {
    double mean_tasks = 3.73;
    double sd_tasks = 1.93;
    int max_tasks = 8;

    // Probability that a two-task instruction is the out-of-order shape
    // ("bring me X , if you find it ..."), which only occurs standalone.
    double out_of_order_prob = 0.5;

    // Relative weights of the multi-fragment building blocks.
    double w_sequential = 30.0;
    double w_marked_conditional = 16.0;       // if-clause + positive dependent
    double w_conditional_with_else = 8.0;     // ... + "otherwise" sentence
    double w_negated_conditional = 8.0;       // "if you can not find ..., V instead"
    double w_implicit_positive = 8.0;         // "find X . if you can , V ."
    double w_implicit_negative = 8.0;         // "switch on X . if you can not , V ."
    double w_duplicate_conditional = 6.0;     // repeated condition, gold graph merged

    // Chance of a "then"/"now" adverb opening a sequential sentence.
    double seq_adverb_prob = 0.25;
};

/// The argument types the grammar actually emits (a subset of the default
/// inventory, keeping tagger training compact).
const std::vector<std::string>& synth_argument_types();

/// BIO alphabet over synth_argument_types plus O.
LabelAlphabet synth_argument_alphabet();

/// Deterministically generates `count` annotated instructions (ids
/// "synth-<seed>-<n>") with gold task/argument/dependency labels, argument
/// span owners and a gold control-flow graph built directly from the
/// fragment structure.
std::vector<AnnotatedInstruction> generate_synthetic(unsigned long long seed, int count,
                                                     const SynthProfile& profile = {});

}  // namespace nlplan::corpus

#endif
