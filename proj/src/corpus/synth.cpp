#include "nlplan/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <utility>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/common/error.hpp"
#include "nlplan/common/rng.hpp"

namespace nlplan::corpus {
namespace {

// ---------------------------------------------------------------------------
// Vocabulary pools. Conditions that must never merge accidentally draw their
// identifying argument from `objects`/`devices` without repetition inside one
// instruction; everything else may repeat freely.

const std::vector<std::string> kObjects = {
    "coffee", "tea",    "soup",    "pizza",   "sandwich", "water",    "milk",
    "juice",  "keys",   "remote",  "book",    "pen",      "phone",    "wallet",
    "glasses", "charger", "umbrella", "laptop", "towel",   "mug",
};
const std::vector<std::string> kDevices = {
    "tv", "radio", "lamp", "fan", "heater", "oven", "kettle", "light",
};
const std::vector<std::string> kLocations = {
    "kitchen", "bedroom", "office", "garden", "balcony",
    "table",   "shelf",   "desk",   "couch",  "counter",
};
const std::vector<std::string> kStates = {
    "hot", "cold", "clean", "dirty", "empty", "full", "dry", "wet",
};
const std::vector<std::string> kSources = {
    "fridge", "drawer", "cupboard", "box", "bag",
};

std::string pick_unused(Rng& rng, const std::vector<std::string>& pool,
                        std::set<std::string>& used) {
    for (int tries = 0; tries < 64; ++tries) {
        const std::string& v = rng.pick(pool);
        if (used.insert(v).second) return v;
    }
    // Pool exhausted for this instruction (possible only with extreme
    // profiles); a repeat merely merges one more pair of conditions.
    return rng.pick(pool);
}

// ---------------------------------------------------------------------------
// Fragment assembly. A fragment is a self-contained group of sentences with
// its own parse, task triggers, argument spans and control-flow shape; an
// instruction is a chain of fragments.

enum class Shape { Seq, CondPos, CondPosNeg, CondNeg, PosCond, DupCond };

struct TaskSpec {
    int pos = 0;  // fragment-local token position, 1-based
    std::string type;
    std::string dep;
};

struct SpanSpec {
    std::string type;
    int start = 0;  // fragment-local, inclusive
    int end = 0;
    int owner = 0;          // fragment-local task ordinal
    std::string value;      // pronoun-resolved, article-free value
};

struct Frag {
    Shape shape = Shape::Seq;
    std::vector<std::vector<Token>> sentences;  // heads sentence-local here
    std::vector<TaskSpec> tasks;
    std::vector<SpanSpec> spans;
    int total = 0;       // tokens emitted so far
    int sent_start = 0;  // tokens emitted before the current sentence

    void begin_sentence() {
        sentences.emplace_back();
        sent_start = total;
    }

    /// Appends one token; `head_local` is 1-based within the current
    /// sentence (0 = sentence root). Returns the fragment-local position.
    int tok(const std::string& surface, const std::string& pos, const std::string& dep,
            int head_local) {
        Token t;
        t.surface = surface;
        t.pos = pos;
        t.dep_rel = dep;
        t.head = head_local;
        sentences.back().push_back(t);
        return ++total;
    }

    /// Sentence-local position of a fragment-local one.
    int local(int frag_pos) const { return frag_pos - sent_start; }

    void task(int pos, std::string type, std::string dep) {
        tasks.push_back({pos, std::move(type), std::move(dep)});
    }

    void span(std::string type, int start, int end, int owner, std::string value) {
        spans.push_back({std::move(type), start, end, owner, std::move(value)});
    }
};

struct PhraseOut {
    int verb_pos = 0;  // fragment-local
    std::string type;
};

/// Verb phrase for a positive dependent. `referent` is what a pronoun object
/// resolves to. The verb's own attachment is supplied by the caller; the
/// dependents that follow attach to the verb.
PhraseOut dp_phrase(Frag& f, Rng& rng, const std::string& verb_dep, int verb_head,
                    int owner, const std::string& referent) {
    PhraseOut out;
    const int variant = rng.uniform_int(0, 4);
    switch (variant) {
        case 0: {  // bring it to me
            out.verb_pos = f.tok("bring", "VERB", verb_dep, verb_head);
            const int vl = f.local(out.verb_pos);
            f.tok("it", "PRON", "obj", vl);
            f.tok("to", "ADP", "case", vl + 3);
            f.tok("me", "PRON", "obl", vl);
            f.span("Object", out.verb_pos + 1, out.verb_pos + 1, owner, referent);
            f.span("Goal", out.verb_pos + 2, out.verb_pos + 3, owner, "me");
            out.type = "bringing";
            break;
        }
        case 1: {  // bring it to the LOC
            const std::string loc = rng.pick(kLocations);
            out.verb_pos = f.tok("bring", "VERB", verb_dep, verb_head);
            const int vl = f.local(out.verb_pos);
            f.tok("it", "PRON", "obj", vl);
            f.tok("to", "ADP", "case", vl + 4);
            f.tok("the", "DET", "det", vl + 4);
            f.tok(loc, "NOUN", "obl", vl);
            f.span("Object", out.verb_pos + 1, out.verb_pos + 1, owner, referent);
            f.span("Goal", out.verb_pos + 2, out.verb_pos + 4, owner, loc);
            out.type = "bringing";
            break;
        }
        case 2: {  // put it on the LOC
            const std::string loc = rng.pick(kLocations);
            out.verb_pos = f.tok("put", "VERB", verb_dep, verb_head);
            const int vl = f.local(out.verb_pos);
            f.tok("it", "PRON", "obj", vl);
            f.tok("on", "ADP", "case", vl + 4);
            f.tok("the", "DET", "det", vl + 4);
            f.tok(loc, "NOUN", "obl", vl);
            f.span("Object", out.verb_pos + 1, out.verb_pos + 1, owner, referent);
            f.span("Location", out.verb_pos + 2, out.verb_pos + 4, owner, loc);
            out.type = "placing";
            break;
        }
        case 3: {  // take it
            out.verb_pos = f.tok("take", "VERB", verb_dep, verb_head);
            f.tok("it", "PRON", "obj", f.local(out.verb_pos));
            f.span("Object", out.verb_pos + 1, out.verb_pos + 1, owner, referent);
            out.type = "taking";
            break;
        }
        default: {  // go to the LOC
            const std::string loc = rng.pick(kLocations);
            out.verb_pos = f.tok("go", "VERB", verb_dep, verb_head);
            const int vl = f.local(out.verb_pos);
            f.tok("to", "ADP", "case", vl + 3);
            f.tok("the", "DET", "det", vl + 3);
            f.tok(loc, "NOUN", "obl", vl);
            f.span("Location", out.verb_pos + 1, out.verb_pos + 3, owner, loc);
            out.type = "going";
            break;
        }
    }
    return out;
}

/// Verb phrase for a negative dependent ("find the X" / "switch off the X").
PhraseOut dn_phrase(Frag& f, Rng& rng, const std::string& verb_dep, int verb_head,
                    int owner) {
    PhraseOut out;
    if (rng.uniform_int(0, 1) == 0) {
        const std::string obj = rng.pick(kObjects);
        out.verb_pos = f.tok("find", "VERB", verb_dep, verb_head);
        const int vl = f.local(out.verb_pos);
        f.tok("the", "DET", "det", vl + 2);
        f.tok(obj, "NOUN", "obj", vl);
        f.span("Object", out.verb_pos + 1, out.verb_pos + 2, owner, obj);
        out.type = "searching";
    } else {
        const std::string dev = rng.pick(kDevices);
        out.verb_pos = f.tok("switch", "VERB", verb_dep, verb_head);
        const int vl = f.local(out.verb_pos);
        f.tok("off", "ADP", "compound:prt", vl);
        f.tok("the", "DET", "det", vl + 3);
        f.tok(dev, "NOUN", "obj", vl);
        f.span("Device", out.verb_pos + 2, out.verb_pos + 3, owner, dev);
        out.type = "switching_off";
    }
    return out;
}

/// One plain imperative sentence, optionally opened by "then"/"now".
Frag make_sequential(Rng& rng, double adverb_prob) {
    Frag f;
    f.shape = Shape::Seq;
    f.begin_sentence();
    const int off = rng.chance(adverb_prob) ? 1 : 0;
    const int variant = rng.uniform_int(0, 5);
    if (off) f.tok(rng.uniform_int(0, 1) == 0 ? "then" : "now", "ADV", "advmod", 2);
    switch (variant) {
        case 0: {  // go to the LOC .
            const std::string loc = rng.pick(kLocations);
            const int v = f.tok("go", "VERB", "root", 0);
            f.tok("to", "ADP", "case", off + 4);
            f.tok("the", "DET", "det", off + 4);
            f.tok(loc, "NOUN", "obl", off + 1);
            f.tok(".", "PUNCT", "punct", off + 1);
            f.task(v, "going", dep_label::sequential);
            f.span("Location", v + 1, v + 3, 0, loc);
            break;
        }
        case 1: {  // take the OBJ from the SRC .
            const std::string obj = rng.pick(kObjects);
            const std::string src = rng.pick(kSources);
            const int v = f.tok("take", "VERB", "root", 0);
            f.tok("the", "DET", "det", off + 3);
            f.tok(obj, "NOUN", "obj", off + 1);
            f.tok("from", "ADP", "case", off + 6);
            f.tok("the", "DET", "det", off + 6);
            f.tok(src, "NOUN", "obl", off + 1);
            f.tok(".", "PUNCT", "punct", off + 1);
            f.task(v, "taking", dep_label::sequential);
            f.span("Object", v + 1, v + 2, 0, obj);
            f.span("Source", v + 3, v + 5, 0, src);
            break;
        }
        case 2: {  // take the OBJ .
            const std::string obj = rng.pick(kObjects);
            const int v = f.tok("take", "VERB", "root", 0);
            f.tok("the", "DET", "det", off + 3);
            f.tok(obj, "NOUN", "obj", off + 1);
            f.tok(".", "PUNCT", "punct", off + 1);
            f.task(v, "taking", dep_label::sequential);
            f.span("Object", v + 1, v + 2, 0, obj);
            break;
        }
        case 3: {  // bring the OBJ to me .
            const std::string obj = rng.pick(kObjects);
            const int v = f.tok("bring", "VERB", "root", 0);
            f.tok("the", "DET", "det", off + 3);
            f.tok(obj, "NOUN", "obj", off + 1);
            f.tok("to", "ADP", "case", off + 5);
            f.tok("me", "PRON", "obl", off + 1);
            f.tok(".", "PUNCT", "punct", off + 1);
            f.task(v, "bringing", dep_label::sequential);
            f.span("Object", v + 1, v + 2, 0, obj);
            f.span("Goal", v + 3, v + 4, 0, "me");
            break;
        }
        case 4: {  // bring me the OBJ .
            const std::string obj = rng.pick(kObjects);
            const int v = f.tok("bring", "VERB", "root", 0);
            f.tok("me", "PRON", "iobj", off + 1);
            f.tok("the", "DET", "det", off + 4);
            f.tok(obj, "NOUN", "obj", off + 1);
            f.tok(".", "PUNCT", "punct", off + 1);
            f.task(v, "bringing", dep_label::sequential);
            f.span("Goal", v + 1, v + 1, 0, "me");
            f.span("Object", v + 2, v + 3, 0, obj);
            break;
        }
        default: {  // put the OBJ on the LOC .
            const std::string obj = rng.pick(kObjects);
            const std::string loc = rng.pick(kLocations);
            const int v = f.tok("put", "VERB", "root", 0);
            f.tok("the", "DET", "det", off + 3);
            f.tok(obj, "NOUN", "obj", off + 1);
            f.tok("on", "ADP", "case", off + 6);
            f.tok("the", "DET", "det", off + 6);
            f.tok(loc, "NOUN", "obl", off + 1);
            f.tok(".", "PUNCT", "punct", off + 1);
            f.task(v, "placing", dep_label::sequential);
            f.span("Object", v + 1, v + 2, 0, obj);
            f.span("Location", v + 3, v + 5, 0, loc);
            break;
        }
    }
    return f;
}

/// "if the OBJ is ST , <dp> ." — optionally followed by "otherwise , <dn> .".
Frag make_marked_conditional(Rng& rng, std::set<std::string>& used, bool with_else) {
    Frag f;
    f.shape = with_else ? Shape::CondPosNeg : Shape::CondPos;
    f.begin_sentence();
    const std::string obj = pick_unused(rng, kObjects, used);
    const std::string st = rng.pick(kStates);
    f.tok("if", "SCONJ", "mark", 5);
    f.tok("the", "DET", "det", 3);
    f.tok(obj, "NOUN", "nsubj", 5);
    const int cond = f.tok("is", "AUX", "cop", 5);
    f.tok(st, "ADJ", "advcl", 7);
    f.tok(",", "PUNCT", "punct", 7);
    const PhraseOut dp = dp_phrase(f, rng, "root", 0, 1, obj);
    f.tok(".", "PUNCT", "punct", 7);
    f.task(cond, "check_state", dep_label::conditional);
    f.task(dp.verb_pos, dp.type, dep_label::dependent_positive);
    f.span("Object", 2, 3, 0, obj);
    f.span("State", 5, 5, 0, st);
    if (with_else) {
        f.begin_sentence();
        f.tok("otherwise", "ADV", "advmod", 3);
        f.tok(",", "PUNCT", "punct", 3);
        const PhraseOut dn = dn_phrase(f, rng, "root", 0, 2);
        f.tok(".", "PUNCT", "punct", 3);
        f.task(dn.verb_pos, dn.type, dep_label::dependent_negative);
    }
    return f;
}

/// "if you can not find the OBJ , <dn> instead ."
Frag make_negated_conditional(Rng& rng, std::set<std::string>& used) {
    Frag f;
    f.shape = Shape::CondNeg;
    f.begin_sentence();
    const std::string obj = pick_unused(rng, kObjects, used);
    f.tok("if", "SCONJ", "mark", 5);
    f.tok("you", "PRON", "nsubj", 5);
    f.tok("can", "AUX", "aux", 5);
    f.tok("not", "PART", "advmod", 5);
    const int cond = f.tok("find", "VERB", "advcl", 9);
    f.tok("the", "DET", "det", 7);
    f.tok(obj, "NOUN", "obj", 5);
    f.tok(",", "PUNCT", "punct", 9);
    const PhraseOut dn = dn_phrase(f, rng, "root", 0, 1);
    const int vl = f.local(dn.verb_pos);
    f.tok("instead", "ADV", "advmod", vl);
    f.tok(".", "PUNCT", "punct", vl);
    f.task(cond, "searching", dep_label::conditional);
    f.task(dn.verb_pos, dn.type, dep_label::dependent_negative);
    f.span("Object", 6, 7, 0, obj);
    return f;
}

/// "bring me the OBJ , if you find it on the LOC ." — the dependent precedes
/// its condition. Only used as a complete two-task instruction.
Frag make_out_of_order(Rng& rng, std::set<std::string>& used) {
    Frag f;
    f.shape = Shape::PosCond;
    f.begin_sentence();
    const std::string obj = pick_unused(rng, kObjects, used);
    const std::string loc = rng.pick(kLocations);
    const int dep = f.tok("bring", "VERB", "root", 0);
    f.tok("me", "PRON", "iobj", 1);
    f.tok("the", "DET", "det", 4);
    f.tok(obj, "NOUN", "obj", 1);
    f.tok(",", "PUNCT", "punct", 1);
    f.tok("if", "SCONJ", "mark", 8);
    f.tok("you", "PRON", "nsubj", 8);
    const int cond = f.tok("find", "VERB", "advcl", 1);
    f.tok("it", "PRON", "obj", 8);
    f.tok("on", "ADP", "case", 12);
    f.tok("the", "DET", "det", 12);
    f.tok(loc, "NOUN", "obl", 8);
    f.tok(".", "PUNCT", "punct", 1);
    f.task(dep, "bringing", dep_label::dependent_positive);
    f.task(cond, "searching", dep_label::conditional);
    f.span("Goal", 2, 2, 0, "me");
    f.span("Object", 3, 4, 0, obj);
    f.span("Object", 9, 9, 1, obj);
    f.span("Location", 10, 12, 1, loc);
    return f;
}

/// "find the OBJ . if you can , <dp> ." or
/// "switch on the DEV . if you can not , <dn> ." — the second sentence has no
/// task token inside the if-clause, so only context identifies the condition.
Frag make_implicit(Rng& rng, std::set<std::string>& used, bool positive) {
    Frag f;
    f.begin_sentence();
    if (positive) {
        f.shape = Shape::CondPos;
        const std::string obj = pick_unused(rng, kObjects, used);
        const int cond = f.tok("find", "VERB", "root", 0);
        f.tok("the", "DET", "det", 3);
        f.tok(obj, "NOUN", "obj", 1);
        f.tok(".", "PUNCT", "punct", 1);
        f.task(cond, "searching", dep_label::conditional);
        f.span("Object", 2, 3, 0, obj);
        f.begin_sentence();
        f.tok("if", "SCONJ", "mark", 3);
        f.tok("you", "PRON", "nsubj", 3);
        f.tok("can", "AUX", "advcl", 5);
        f.tok(",", "PUNCT", "punct", 5);
        const PhraseOut dp = dp_phrase(f, rng, "root", 0, 1, obj);
        f.tok(".", "PUNCT", "punct", f.local(dp.verb_pos));
        f.task(dp.verb_pos, dp.type, dep_label::dependent_positive);
    } else {
        f.shape = Shape::CondNeg;
        const std::string dev = pick_unused(rng, kDevices, used);
        const int cond = f.tok("switch", "VERB", "root", 0);
        f.tok("on", "ADP", "compound:prt", 1);
        f.tok("the", "DET", "det", 4);
        f.tok(dev, "NOUN", "obj", 1);
        f.tok(".", "PUNCT", "punct", 1);
        f.task(cond, "switching_on", dep_label::conditional);
        f.span("Device", 3, 4, 0, dev);
        f.begin_sentence();
        f.tok("if", "SCONJ", "mark", 3);
        f.tok("you", "PRON", "nsubj", 3);
        f.tok("can", "AUX", "advcl", 6);
        f.tok("not", "PART", "advmod", 3);
        f.tok(",", "PUNCT", "punct", 6);
        const PhraseOut dn = dn_phrase(f, rng, "root", 0, 1);
        f.tok(".", "PUNCT", "punct", f.local(dn.verb_pos));
        f.task(dn.verb_pos, dn.type, dep_label::dependent_negative);
    }
    return f;
}

/// Two sentences restating the same condition; the gold graph keeps a single
/// condition node with both dependents chained on its positive branch.
Frag make_duplicate_conditional(Rng& rng, std::set<std::string>& used) {
    Frag f;
    f.shape = Shape::DupCond;
    const std::string obj = pick_unused(rng, kObjects, used);
    const std::string st = rng.pick(kStates);
    const std::string loc = rng.pick(kLocations);

    f.begin_sentence();  // if the OBJ is ST bring it to me .
    f.tok("if", "SCONJ", "mark", 5);
    f.tok("the", "DET", "det", 3);
    f.tok(obj, "NOUN", "nsubj", 5);
    const int cond1 = f.tok("is", "AUX", "cop", 5);
    f.tok(st, "ADJ", "advcl", 6);
    const int dep1 = f.tok("bring", "VERB", "root", 0);
    f.tok("it", "PRON", "obj", 6);
    f.tok("to", "ADP", "case", 9);
    f.tok("me", "PRON", "obl", 6);
    f.tok(".", "PUNCT", "punct", 6);

    f.begin_sentence();  // if it is ST put it on the LOC .
    f.tok("if", "SCONJ", "mark", 4);
    f.tok("it", "PRON", "nsubj", 4);
    const int cond2 = f.tok("is", "AUX", "cop", 4);
    f.tok(st, "ADJ", "advcl", 5);
    const int dep2 = f.tok("put", "VERB", "root", 0);
    f.tok("it", "PRON", "obj", 5);
    f.tok("on", "ADP", "case", 9);
    f.tok("the", "DET", "det", 9);
    f.tok(loc, "NOUN", "obl", 5);
    f.tok(".", "PUNCT", "punct", 5);

    f.task(cond1, "check_state", dep_label::conditional);
    f.task(dep1, "bringing", dep_label::dependent_positive);
    f.task(cond2, "check_state", dep_label::conditional);
    f.task(dep2, "placing", dep_label::dependent_positive);

    f.span("Object", 2, 3, 0, obj);
    f.span("State", 5, 5, 0, st);
    f.span("Object", 7, 7, 1, obj);
    f.span("Goal", 8, 9, 1, "me");
    f.span("Object", 12, 12, 2, obj);
    f.span("State", 14, 14, 2, st);
    f.span("Object", 16, 16, 3, obj);
    f.span("Location", 17, 19, 3, loc);
    return f;
}

/// Arranges a fragment's task nodes into its control-flow shape and returns
/// the fragment's root node.
std::unique_ptr<cfg::CfgNode> shape_graph(Shape shape,
                                          std::vector<std::unique_ptr<cfg::CfgNode>> nodes) {
    switch (shape) {
        case Shape::Seq:
            return std::move(nodes[0]);
        case Shape::CondPos:
            nodes[0]->positive = std::move(nodes[1]);
            return std::move(nodes[0]);
        case Shape::CondPosNeg:
            nodes[0]->positive = std::move(nodes[1]);
            nodes[0]->negative = std::move(nodes[2]);
            return std::move(nodes[0]);
        case Shape::CondNeg:
            nodes[0]->negative = std::move(nodes[1]);
            return std::move(nodes[0]);
        case Shape::PosCond:
            nodes[1]->positive = std::move(nodes[0]);
            return std::move(nodes[1]);
        case Shape::DupCond:
            // The restated condition (ordinal 2) vanishes; its dependent
            // chains after the first dependent on the surviving branch.
            nodes[1]->next = std::move(nodes[3]);
            nodes[0]->positive = std::move(nodes[1]);
            return std::move(nodes[0]);
    }
    throw InternalError("shape_graph: unhandled fragment shape");
}

AnnotatedInstruction assemble(std::vector<Frag> frags, std::string id) {
    AnnotatedInstruction instr;
    instr.id = std::move(id);

    int token_count = 0;
    for (const Frag& f : frags) token_count += f.total;
    std::vector<std::string> task_labels(static_cast<std::size_t>(token_count), "O");
    std::vector<std::string> arg_labels(static_cast<std::size_t>(token_count), "O");
    std::vector<std::string> dep_labels;
    std::vector<int> owners;

    cfg::ControlFlowGraph graph;
    cfg::CfgNode* graph_tail = nullptr;

    int frag_offset = 0;   // tokens before the current fragment
    int task_offset = 0;   // tasks before the current fragment
    int sentence_id = 0;
    for (Frag& f : frags) {
        int global_base = frag_offset;  // start of the current sentence
        for (const auto& sentence : f.sentences) {
            for (const Token& t : sentence) {
                Token out = t;
                out.index = static_cast<int>(instr.tokens.size()) + 1;
                out.head = t.head == 0 ? 0 : global_base + t.head;
                out.sentence_id = sentence_id;
                instr.tokens.push_back(out);
            }
            global_base += static_cast<int>(sentence.size());
            ++sentence_id;
        }

        std::sort(f.tasks.begin(), f.tasks.end(),
                  [](const TaskSpec& a, const TaskSpec& b) { return a.pos < b.pos; });
        std::sort(f.spans.begin(), f.spans.end(),
                  [](const SpanSpec& a, const SpanSpec& b) { return a.start < b.start; });

        std::vector<std::unique_ptr<cfg::CfgNode>> nodes;
        for (std::size_t k = 0; k < f.tasks.size(); ++k) {
            const TaskSpec& t = f.tasks[k];
            task_labels[static_cast<std::size_t>(frag_offset + t.pos - 1)] = t.type;
            dep_labels.push_back(t.dep);

            auto node = std::make_unique<cfg::CfgNode>();
            node->node_id = task_offset + static_cast<int>(k);
            node->task.task_type = t.type;
            node->task.dependency = t.dep;
            node->task.trigger_index = frag_offset + t.pos;
            nodes.push_back(std::move(node));
        }
        for (const SpanSpec& s : f.spans) {
            arg_labels[static_cast<std::size_t>(frag_offset + s.start - 1)] = "B-" + s.type;
            for (int i = s.start + 1; i <= s.end; ++i) {
                arg_labels[static_cast<std::size_t>(frag_offset + i - 1)] = "I-" + s.type;
            }
            owners.push_back(task_offset + s.owner);
            nodes[static_cast<std::size_t>(s.owner)]->task.arguments[s.type].push_back(s.value);
        }

        auto root = shape_graph(f.shape, std::move(nodes));
        if (!graph.root) {
            graph.root = std::move(root);
            graph_tail = graph.root.get();
        } else {
            graph_tail->next = std::move(root);
            graph_tail = graph_tail->next.get();
        }

        frag_offset += f.total;
        task_offset += static_cast<int>(f.tasks.size());
    }
    graph.recount();

    instr.gold_task_labels = std::move(task_labels);
    instr.gold_argument_labels = std::move(arg_labels);
    instr.gold_dependency_labels = std::move(dep_labels);
    instr.gold_argument_owners = std::move(owners);
    instr.gold_graph_json = cfg::graph_to_json(graph);
    return instr;
}

void validate_profile(const SynthProfile& p) {
    if (!(p.mean_tasks > 0.0) || !(p.sd_tasks >= 0.0)) {
        throw ConfigError("synth profile: mean_tasks must be positive and sd_tasks nonnegative");
    }
    if (p.max_tasks < 1) throw ConfigError("synth profile: max_tasks must be at least 1");
    if (p.out_of_order_prob < 0.0 || p.out_of_order_prob > 1.0 || p.seq_adverb_prob < 0.0 ||
        p.seq_adverb_prob > 1.0) {
        throw ConfigError("synth profile: probabilities must lie in [0, 1]");
    }
    const double weights[] = {p.w_sequential,        p.w_marked_conditional,
                              p.w_conditional_with_else, p.w_negated_conditional,
                              p.w_implicit_positive, p.w_implicit_negative,
                              p.w_duplicate_conditional};
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ConfigError("synth profile: fragment weights must be nonnegative");
        total += w;
    }
    if (p.w_sequential <= 0.0 && total <= 0.0) {
        throw ConfigError("synth profile: at least one fragment weight must be positive");
    }
}

}  // namespace

const std::vector<std::string>& synth_argument_types() {
    static const std::vector<std::string> types = {
        "Object", "Goal", "Source", "State", "Location", "Device",
    };
    return types;
}

LabelAlphabet synth_argument_alphabet() {
    LabelAlphabet a;
    a.labels.push_back("O");
    for (const auto& t : synth_argument_types()) {
        a.labels.push_back("B-" + t);
        a.labels.push_back("I-" + t);
    }
    return a;
}

std::vector<AnnotatedInstruction> generate_synthetic(unsigned long long seed, int count,
                                                     const SynthProfile& profile) {
    if (count < 0) throw ValidationError("generate_synthetic: count must be nonnegative");
    validate_profile(profile);

    // Fragment menu: task cost, profile weight, builder tag.
    enum Kind { kSeq, kMarked, kWithElse, kNegated, kImplicitPos, kImplicitNeg, kDuplicate };
    const std::pair<int, Kind> menu[] = {
        {1, kSeq},         {2, kMarked},      {3, kWithElse},  {2, kNegated},
        {2, kImplicitPos}, {2, kImplicitNeg}, {4, kDuplicate},
    };
    const auto weight_of = [&profile](Kind k) {
        switch (k) {
            case kSeq: return profile.w_sequential;
            case kMarked: return profile.w_marked_conditional;
            case kWithElse: return profile.w_conditional_with_else;
            case kNegated: return profile.w_negated_conditional;
            case kImplicitPos: return profile.w_implicit_positive;
            case kImplicitNeg: return profile.w_implicit_negative;
            case kDuplicate: return profile.w_duplicate_conditional;
        }
        return 0.0;
    };

    Rng rng(seed);
    std::vector<AnnotatedInstruction> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        const double raw = rng.gauss(profile.mean_tasks, profile.sd_tasks);
        int k = static_cast<int>(std::lround(raw));
        k = std::max(1, std::min(profile.max_tasks, k));

        std::vector<Frag> frags;
        std::set<std::string> used;
        if (k == 2 && rng.chance(profile.out_of_order_prob)) {
            frags.push_back(make_out_of_order(rng, used));
        } else {
            int remaining = k;
            while (remaining > 0) {
                std::vector<Kind> options;
                std::vector<double> weights;
                for (const auto& [cost, kind] : menu) {
                    if (cost > remaining) continue;
                    const double w = weight_of(kind);
                    if (w <= 0.0 && kind != kSeq) continue;
                    options.push_back(kind);
                    weights.push_back(kind == kSeq ? std::max(w, 1e-9) : w);
                }
                const Kind kind = options[rng.pick_weighted(weights)];
                switch (kind) {
                    case kSeq:
                        frags.push_back(make_sequential(rng, profile.seq_adverb_prob));
                        remaining -= 1;
                        break;
                    case kMarked:
                        frags.push_back(make_marked_conditional(rng, used, false));
                        remaining -= 2;
                        break;
                    case kWithElse:
                        frags.push_back(make_marked_conditional(rng, used, true));
                        remaining -= 3;
                        break;
                    case kNegated:
                        frags.push_back(make_negated_conditional(rng, used));
                        remaining -= 2;
                        break;
                    case kImplicitPos:
                        frags.push_back(make_implicit(rng, used, true));
                        remaining -= 2;
                        break;
                    case kImplicitNeg:
                        frags.push_back(make_implicit(rng, used, false));
                        remaining -= 2;
                        break;
                    case kDuplicate:
                        frags.push_back(make_duplicate_conditional(rng, used));
                        remaining -= 4;
                        break;
                }
            }
        }
        out.push_back(assemble(std::move(frags), "synth-" + std::to_string(seed) + "-" +
                                                     std::to_string(n)));
    }
    return out;
}

}  // namespace nlplan::corpus
