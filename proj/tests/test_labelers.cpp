#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "nlplan/cfg/cfg.hpp"
#include "nlplan/common/error.hpp"
#include "nlplan/corpus/synth.hpp"
#include "nlplan/corpus/types.hpp"
#include "nlplan/crf/crf.hpp"
#include "nlplan/labelers/labelers.hpp"

using namespace nlplan;

namespace {

corpus::Token tok(int index, const std::string& surface, const std::string& pos,
                  const std::string& dep, int head, int sentence = 0) {
    corpus::Token t;
    t.index = index;
    t.surface = surface;
    t.pos = pos;
    t.dep_rel = dep;
    t.head = head;
    t.sentence_id = sentence;
    return t;
}

/// "if the coffee is hot , bring it to me ." with its dependency parse.
corpus::AnnotatedInstruction coffee_example() {
    corpus::AnnotatedInstruction instr;
    instr.id = "coffee";
    instr.tokens = {
        tok(1, "if", "SCONJ", "mark", 5),    tok(2, "the", "DET", "det", 3),
        tok(3, "coffee", "NOUN", "nsubj", 5), tok(4, "is", "AUX", "cop", 5),
        tok(5, "hot", "ADJ", "advcl", 7),    tok(6, ",", "PUNCT", "punct", 7),
        tok(7, "bring", "VERB", "root", 0),  tok(8, "it", "PRON", "obj", 7),
        tok(9, "to", "ADP", "case", 10),     tok(10, "me", "PRON", "obl", 7),
        tok(11, ".", "PUNCT", "punct", 7),
    };
    return instr;
}

/// Models trained once on a synthetic corpus and shared by the test cases.
struct Models {
    crf::CrfModel task;
    crf::CrfModel argument;
    crf::CrfModel dep_full;
    crf::CrfModel dep_notf;
};

const Models& trained() {
    static const Models models = [] {
        auto data = corpus::generate_synthetic(101, 600);
        Models m;
        m.task = labelers::train_task_model(data, corpus::default_task_alphabet());
        m.argument = labelers::train_argument_model(data, corpus::synth_argument_alphabet(),
                                                    corpus::default_task_alphabet());
        m.dep_full = labelers::train_dependency_model(data, true);
        m.dep_notf = labelers::train_dependency_model(data, false);
        return m;
    }();
    return models;
}

}  // namespace

TEST_CASE("task features cover the token window") {
    auto instr = coffee_example();
    auto feats = labelers::task_features(instr);
    REQUIRE(feats.size() == 11);
    const auto& bring = feats[6];
    auto has = [&bring](const std::string& f) {
        return std::find(bring.begin(), bring.end(), f) != bring.end();
    };
    CHECK(has("b"));
    CHECK(has("w=bring"));
    CHECK(has("pos=VERB"));
    CHECK(has("dep=root"));
    CHECK(has("hpos=ROOT"));
    CHECK(has("w-1=,"));
    CHECK(has("w+1=it"));
    CHECK(has("pos-1=PUNCT"));
    CHECK(has("pos+1=PRON"));
    // Sequence boundaries map to a sentinel.
    CHECK(std::find(feats[0].begin(), feats[0].end(), "w-1=<s>") != feats[0].end());
    CHECK(std::find(feats[10].begin(), feats[10].end(), "pos+1=<s>") != feats[10].end());
}

TEST_CASE("argument features conjoin the association value") {
    auto instr = coffee_example();
    std::vector<std::string> assoc(11, "check_state");
    assoc[6] = labelers::kNullAssociation;
    auto feats = labelers::argument_features(instr, assoc);
    const auto& it_feats = feats[7];
    CHECK(std::find(it_feats.begin(), it_feats.end(), "assoc=check_state") != it_feats.end());
    CHECK(std::find(it_feats.begin(), it_feats.end(), "assoc|w=check_state|it") != it_feats.end());
    CHECK(std::find(it_feats.begin(), it_feats.end(), "assoc|pos=check_state|PRON") !=
          it_feats.end());
    const auto& trig = feats[6];
    CHECK(std::find(trig.begin(), trig.end(), "assoc=phi") != trig.end());

    std::vector<std::string> short_assoc(3, "x");
    CHECK_THROWS_AS(labelers::argument_features(instr, short_assoc), ValidationError);
}

TEST_CASE("dependency features read the parse structure") {
    auto instr = coffee_example();
    std::vector<std::string> gold(11, "O");
    gold[3] = "check_state";
    gold[6] = "bringing";
    auto tagging = labelers::tagging_from_labels(instr, gold);
    auto feats = labelers::extract_dependency_features(instr, tagging, true);
    REQUIRE(feats.size() == 2);

    const std::vector<std::string> want_cond = {
        "pos=AUX", "dep=cop", "has_mark=0", "has_advcl_child=0",
        "length_conj=0", "task_type=check_state",
    };
    CHECK(feats[0] == want_cond);
    const std::vector<std::string> want_dep = {
        "pos=VERB", "dep=root", "has_mark=0", "has_advcl_child=1",
        "length_conj=0", "task_type=bringing",
    };
    CHECK(feats[1] == want_dep);

    auto ablated = labelers::extract_dependency_features(instr, tagging, false);
    for (const auto& fs : ablated) {
        for (const auto& f : fs) CHECK(f.rfind("task_type=", 0) != 0);
    }
}

TEST_CASE("dependency features count conj chains and surface advmod children") {
    // "take the pen and the book and the mug ." with a conj chain on pen.
    corpus::AnnotatedInstruction instr;
    instr.id = "conj";
    instr.tokens = {
        tok(1, "take", "VERB", "root", 0), tok(2, "the", "DET", "det", 3),
        tok(3, "pen", "NOUN", "obj", 1),   tok(4, "and", "CCONJ", "cc", 6),
        tok(5, "the", "DET", "det", 6),    tok(6, "book", "NOUN", "conj", 3),
        tok(7, "and", "CCONJ", "cc", 9),   tok(8, "the", "DET", "det", 9),
        tok(9, "mug", "NOUN", "conj", 3),  tok(10, "then", "ADV", "advmod", 1),
    };
    std::vector<std::string> gold(10, "O");
    gold[2] = "taking";  // length_conj counts the chain even off the trigger verb
    auto tagging = labelers::tagging_from_labels(instr, gold);
    auto feats = labelers::extract_dependency_features(instr, tagging, false);
    REQUIRE(feats.size() == 1);
    auto has = [&](const std::string& f) {
        return std::find(feats[0].begin(), feats[0].end(), f) != feats[0].end();
    };
    CHECK(has("length_conj=2"));

    gold[2] = "O";
    gold[0] = "taking";
    tagging = labelers::tagging_from_labels(instr, gold);
    feats = labelers::extract_dependency_features(instr, tagging, false);
    auto has_verb = [&](const std::string& f) {
        return std::find(feats[0].begin(), feats[0].end(), f) != feats[0].end();
    };
    CHECK(has_verb("length_conj=0"));
    CHECK(has_verb("advmod_child=then"));
}

TEST_CASE("association owners follow the split points") {
    auto instr = coffee_example();
    std::vector<std::string> gold(11, "O");
    gold[3] = "check_state";
    gold[6] = "bringing";
    auto tagging = labelers::tagging_from_labels(instr, gold);

    CHECK(labelers::gap_lengths(tagging, 11) == std::vector<int>{2});
    CHECK(labelers::naive_splits(tagging, 11) == std::vector<int>{2});

    // Split 1: "hot" stays with the condition, "," moves to the second task.
    auto owners = labelers::association_owners(tagging, 11, {1});
    CHECK(owners == std::vector<int>{0, 0, 0, -1, 0, 1, -1, 1, 1, 1, 1});

    auto assoc = labelers::build_association_features(tagging, instr, {1});
    CHECK(assoc[0] == "check_state");
    CHECK(assoc[3] == labelers::kNullAssociation);
    CHECK(assoc[5] == "bringing");

    CHECK_THROWS_AS(labelers::association_owners(tagging, 11, {}), ValidationError);
    CHECK_THROWS_AS(labelers::association_owners(tagging, 11, {3}), ValidationError);
    CHECK_THROWS_AS(labelers::association_owners(tagging, 11, {-1}), ValidationError);
}

TEST_CASE("bio repair promotes dangling inside labels") {
    std::vector<std::string> labels = {"O", "I-Object", "I-Object", "O", "B-Goal", "I-Goal"};
    auto fixed = labelers::repair_bio(labels);
    CHECK(fixed == std::vector<std::string>{"O", "B-Object", "I-Object", "O", "B-Goal", "I-Goal"});

    std::vector<std::string> mismatch = {"B-Goal", "I-Object"};
    auto fixed2 = labelers::repair_bio(mismatch);
    CHECK(fixed2 == std::vector<std::string>{"B-Goal", "B-Object"});
}

TEST_CASE("span values drop leading adpositions and determiners") {
    auto instr = coffee_example();
    std::vector<std::string> gold_task(11, "O");
    gold_task[3] = "check_state";
    gold_task[6] = "bringing";
    auto tagging = labelers::tagging_from_labels(instr, gold_task);
    std::vector<std::string> bio = {"O", "B-Object", "I-Object", "O",      "B-State", "O",
                                    "O", "B-Object", "B-Goal",   "I-Goal", "O"};
    auto args = labelers::arguments_from_labels(instr, tagging, bio);
    REQUIRE(args.spans.size() == 4);
    CHECK(args.spans[0].value == "coffee");  // "the coffee"
    CHECK(args.spans[1].value == "hot");
    CHECK(args.spans[2].value == "it");
    CHECK(args.spans[3].value == "me");      // "to me"
    CHECK(args.spans[0].owner_task == 0);
    CHECK(args.spans[1].owner_task == 0);
    CHECK(args.spans[2].owner_task == 1);
    CHECK(args.spans[3].owner_task == 1);
}

TEST_CASE("anaphora resolution walks the cascade and is idempotent") {
    auto instr = coffee_example();
    std::vector<std::string> gold_task(11, "O");
    gold_task[3] = "check_state";
    gold_task[6] = "bringing";
    auto tagging = labelers::tagging_from_labels(instr, gold_task);
    std::vector<std::string> bio = {"O", "B-Object", "I-Object", "O",      "B-State", "O",
                                    "O", "B-Object", "B-Goal",   "I-Goal", "O"};
    auto args = labelers::arguments_from_labels(instr, tagging, bio);
    auto resolved = labelers::resolve_anaphora(instr, args);
    CHECK(resolved.spans[2].value == "coffee");   // it -> the coffee
    CHECK_FALSE(resolved.spans[2].unresolved_pronoun);
    CHECK(resolved.spans[3].value == "me");       // first/second person left alone
    auto twice = labelers::resolve_anaphora(instr, resolved);
    for (std::size_t i = 0; i < twice.spans.size(); ++i) {
        CHECK(twice.spans[i].value == resolved.spans[i].value);
    }
}

TEST_CASE("anaphora falls back to objects and flags dead ends") {
    // "take the keys . bring it to them ." - "them" has no Goal antecedent.
    corpus::AnnotatedInstruction instr;
    instr.id = "fallback";
    instr.tokens = {
        tok(1, "take", "VERB", "root", 0),  tok(2, "the", "DET", "det", 3),
        tok(3, "keys", "NOUN", "obj", 1),   tok(4, ".", "PUNCT", "punct", 1),
        tok(5, "bring", "VERB", "root", 0, 1), tok(6, "it", "PRON", "obj", 5, 1),
        tok(7, "to", "ADP", "case", 8, 1),  tok(8, "them", "PRON", "obl", 5, 1),
        tok(9, ".", "PUNCT", "punct", 5, 1),
    };
    std::vector<std::string> gold_task(9, "O");
    gold_task[0] = "taking";
    gold_task[4] = "bringing";
    auto tagging = labelers::tagging_from_labels(instr, gold_task);
    std::vector<std::string> bio = {"O", "B-Object", "I-Object", "O", "O",
                                    "B-Object", "B-Goal", "I-Goal", "O"};
    auto args = labelers::arguments_from_labels(instr, tagging, bio);
    auto resolved = labelers::resolve_anaphora(instr, args);
    CHECK(resolved.spans[1].value == "keys");  // it -> keys (same type)
    CHECK(resolved.spans[2].value == "keys");  // them -> keys (Object fallback)
    CHECK_FALSE(resolved.spans[2].unresolved_pronoun);

    // A pronoun with nothing before it stays put and is flagged.
    corpus::AnnotatedInstruction lonely;
    lonely.id = "lonely";
    lonely.tokens = {
        tok(1, "take", "VERB", "root", 0),
        tok(2, "it", "PRON", "obj", 1),
        tok(3, ".", "PUNCT", "punct", 1),
    };
    std::vector<std::string> lt(3, "O");
    lt[0] = "taking";
    auto ltag = labelers::tagging_from_labels(lonely, lt);
    auto largs = labelers::arguments_from_labels(lonely, ltag, {"O", "B-Object", "O"});
    auto lres = labelers::resolve_anaphora(lonely, largs);
    CHECK(lres.spans[0].value == "it");
    CHECK(lres.spans[0].unresolved_pronoun);
}

TEST_CASE("trained taggers reproduce the worked example") {
    const auto& m = trained();
    auto instr = coffee_example();

    auto tagging = labelers::tag_tasks(m.task, instr);
    std::vector<std::string> want_task = {"O", "O", "O", "check_state", "O", "O",
                                          "bringing", "O", "O", "O", "O"};
    CHECK(tagging.labels == want_task);
    REQUIRE(tagging.task_count() == 2);

    auto args = labelers::tag_arguments(m.argument, instr, tagging);
    std::vector<std::string> want_bio = {"O", "B-Object", "I-Object", "O",      "B-State", "O",
                                         "O", "B-Object", "B-Goal",   "I-Goal", "O"};
    CHECK(args.labels == want_bio);

    auto resolved = labelers::resolve_anaphora(instr, args);
    REQUIRE(resolved.spans.size() == 4);
    CHECK(resolved.spans[2].value == "coffee");

    auto feats = labelers::extract_dependency_features(instr, tagging, true);
    auto deps = labelers::tag_dependencies(m.dep_full, feats);
    CHECK(deps.labels == std::vector<std::string>{corpus::dep_label::conditional,
                                                  corpus::dep_label::dependent_positive});

    auto tasks = labelers::assemble_tasks(tagging, resolved, deps);
    REQUIRE(tasks.size() == 2);
    CHECK(tasks[0].task_type == "check_state");
    CHECK(tasks[0].trigger_index == 4);
    CHECK(tasks[0].arguments.at("Object") == std::vector<std::string>{"coffee"});
    CHECK(tasks[0].arguments.at("State") == std::vector<std::string>{"hot"});
    CHECK(tasks[1].task_type == "bringing");
    CHECK(tasks[1].arguments.at("Object") == std::vector<std::string>{"coffee"});
    CHECK(tasks[1].arguments.at("Goal") == std::vector<std::string>{"me"});

    auto graph = cfg::merge_redundant(cfg::build_graph(tasks));
    REQUIRE(graph.root != nullptr);
    CHECK(graph.node_count == 2);
    CHECK(graph.root->task.task_type == "check_state");
    REQUIRE(graph.root->positive != nullptr);
    CHECK(graph.root->positive->task.task_type == "bringing");
    CHECK(graph.root->negative == nullptr);
    CHECK(graph.root->next == nullptr);
}

TEST_CASE("chosen splits dominate per-gap alternatives") {
    const auto& m = trained();
    auto data = corpus::generate_synthetic(303, 30);
    int multi_gap = 0;
    for (const auto& instr : data) {
        auto tagging = labelers::tag_tasks(m.task, instr);
        if (tagging.task_count() < 2) continue;
        auto chosen = labelers::choose_splits(m.argument, instr, tagging);
        auto gaps = labelers::gap_lengths(tagging, instr.token_count());
        REQUIRE(chosen.size() == gaps.size());
        if (gaps.size() > 1) ++multi_gap;

        auto score_of = [&](const std::vector<int>& splits) {
            auto assoc = labelers::build_association_features(tagging, instr, splits);
            auto feats = labelers::lookup_features(labelers::argument_features(instr, assoc),
                                                   m.argument.features);
            return crf::viterbi(m.argument, feats).log_probability;
        };
        const double best = score_of(chosen);
        for (std::size_t g = 0; g < gaps.size(); ++g) {
            for (int s = 0; s <= gaps[g]; ++s) {
                auto alt = chosen;
                alt[g] = s;
                CHECK(score_of(alt) <= best + 1e-9);
            }
        }
        // The chosen assignment is at least as good as the naive one.
        CHECK(score_of(labelers::naive_splits(tagging, instr.token_count())) <= best + 1e-9);
    }
    CHECK(multi_gap > 0);
}

TEST_CASE("gold splits cover the gold owners") {
    auto data = corpus::generate_synthetic(404, 50);
    for (const auto& instr : data) {
        auto tagging = labelers::tagging_from_labels(instr, *instr.gold_task_labels);
        auto splits = labelers::gold_splits(instr, tagging);
        auto owners = labelers::association_owners(tagging, instr.token_count(), splits);
        auto args = labelers::arguments_from_labels(instr, tagging, *instr.gold_argument_labels);
        REQUIRE(args.spans.size() == instr.gold_argument_owners->size());
        for (std::size_t s = 0; s < args.spans.size(); ++s) {
            const auto& span = args.spans[s];
            CHECK(span.owner_task == (*instr.gold_argument_owners)[s]);
            // Every token of a span associates with the span's owner.
            for (int i = span.start; i <= span.end; ++i) {
                CHECK(owners[static_cast<std::size_t>(i) - 1] == span.owner_task);
            }
        }
    }
}

TEST_CASE("taggers validate their inputs") {
    const auto& m = trained();
    auto instr = coffee_example();
    corpus::LabelAlphabet wrong;
    wrong.labels = {"O", "other"};
    CHECK_THROWS_AS(labelers::tag_tasks(m.task, instr, &wrong), ValidationError);

    corpus::AnnotatedInstruction empty;
    empty.id = "empty";
    CHECK_THROWS_AS(labelers::tag_tasks(m.task, empty), ValidationError);

    // Dependency tagging demands the dependency alphabet.
    CHECK_THROWS_AS(labelers::tag_dependencies(m.task, labelers::StringFeatureSeq{{"pos=VERB"}}),
                    ValidationError);

    // Training requires gold labels.
    corpus::AnnotatedInstruction bare;
    bare.id = "bare";
    bare.tokens = {tok(1, "go", "VERB", "root", 0)};
    CHECK_THROWS_AS(labelers::train_task_model({bare}, corpus::default_task_alphabet()),
                    ValidationError);
}
