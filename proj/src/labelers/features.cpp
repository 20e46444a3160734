#include <algorithm>
#include <queue>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/labelers/labelers.hpp"

namespace nlplan::labelers {

namespace {

const std::string kBoundary = "<s>";

std::string lower_surface(const corpus::AnnotatedInstruction& instr, int global_index) {
    if (global_index < 1 || global_index > instr.token_count()) return kBoundary;
    return to_lower(instr.token_at(global_index).surface);
}

std::string pos_at(const corpus::AnnotatedInstruction& instr, int global_index) {
    if (global_index < 1 || global_index > instr.token_count()) return kBoundary;
    return instr.token_at(global_index).pos;
}

}  // namespace

StringFeatureSeq task_features(const corpus::AnnotatedInstruction& instr) {
    StringFeatureSeq out;
    out.reserve(instr.tokens.size());
    for (const corpus::Token& tok : instr.tokens) {
        std::vector<std::string> f;
        f.reserve(9);
        f.push_back("b");
        f.push_back("w=" + to_lower(tok.surface));
        f.push_back("pos=" + tok.pos);
        f.push_back("dep=" + tok.dep_rel);
        f.push_back("hpos=" + (tok.head == 0 ? std::string("ROOT") : pos_at(instr, tok.head)));
        f.push_back("w-1=" + lower_surface(instr, tok.index - 1));
        f.push_back("w+1=" + lower_surface(instr, tok.index + 1));
        f.push_back("pos-1=" + pos_at(instr, tok.index - 1));
        f.push_back("pos+1=" + pos_at(instr, tok.index + 1));
        out.push_back(std::move(f));
    }
    return out;
}

StringFeatureSeq argument_features(const corpus::AnnotatedInstruction& instr,
                                   const std::vector<std::string>& association) {
    if (association.size() != instr.tokens.size())
        throw ValidationError("association assignment length does not match token count");
    StringFeatureSeq out = task_features(instr);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::string& a = association[i];
        out[i].push_back("assoc=" + a);
        out[i].push_back("assoc|w=" + a + "|" + to_lower(instr.tokens[i].surface));
        out[i].push_back("assoc|pos=" + a + "|" + instr.tokens[i].pos);
    }
    return out;
}

StringFeatureSeq extract_dependency_features(const corpus::AnnotatedInstruction& instr,
                                             const TaskTagging& tagging, bool use_task_type) {
    if (tagging.task_count() == 0)
        throw ValidationError("dependency features require at least one task");

    // Undirected conj adjacency; length_conj of a token is the size of its
    // conj-connected component minus itself.
    const int n = instr.token_count();
    std::vector<std::vector<int>> conj_adj(static_cast<std::size_t>(n) + 1);
    for (const corpus::Token& tok : instr.tokens) {
        if (tok.dep_rel == "conj" && tok.head > 0) {
            conj_adj[static_cast<std::size_t>(tok.index)].push_back(tok.head);
            conj_adj[static_cast<std::size_t>(tok.head)].push_back(tok.index);
        }
    }
    auto conj_chain_size = [&](int start) {
        std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
        std::queue<int> q;
        q.push(start);
        seen[static_cast<std::size_t>(start)] = true;
        int count = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            ++count;
            for (int v : conj_adj[static_cast<std::size_t>(u)]) {
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = true;
                    q.push(v);
                }
            }
        }
        return count - 1;
    };

    StringFeatureSeq out;
    out.reserve(tagging.task_count());
    for (std::size_t k = 0; k < tagging.task_count(); ++k) {
        const corpus::Token& tok = instr.token_at(tagging.task_indices[k]);
        bool has_mark = false;
        bool has_advcl = false;
        std::string advmod_child;
        for (const corpus::Token& child : instr.tokens) {
            if (child.head != tok.index) continue;
            if (child.dep_rel == "mark") has_mark = true;
            if (child.dep_rel == "advcl") has_advcl = true;
            if (child.dep_rel == "advmod" && advmod_child.empty())
                advmod_child = to_lower(child.surface);
        }

        std::vector<std::string> f;
        f.push_back("pos=" + tok.pos);
        f.push_back("dep=" + tok.dep_rel);
        f.push_back(std::string("has_mark=") + (has_mark ? "1" : "0"));
        if (!advmod_child.empty()) f.push_back("advmod_child=" + advmod_child);
        f.push_back(std::string("has_advcl_child=") + (has_advcl ? "1" : "0"));
        f.push_back("length_conj=" + std::to_string(conj_chain_size(tok.index)));
        if (use_task_type) f.push_back("task_type=" + tagging.type_of(k));
        out.push_back(std::move(f));
    }
    return out;
}

crf::FeatureSeq intern_features(const StringFeatureSeq& feats, crf::FeatureInterner& dict) {
    crf::FeatureSeq out;
    out.reserve(feats.size());
    for (const auto& names : feats) {
        std::vector<int> ids;
        ids.reserve(names.size());
        for (const auto& name : names) ids.push_back(dict.intern(name));
        out.push_back(std::move(ids));
    }
    return out;
}

crf::FeatureSeq lookup_features(const StringFeatureSeq& feats, const crf::FeatureInterner& dict) {
    crf::FeatureSeq out;
    out.reserve(feats.size());
    for (const auto& names : feats) {
        std::vector<int> ids;
        ids.reserve(names.size());
        for (const auto& name : names) ids.push_back(dict.lookup(name));
        out.push_back(std::move(ids));
    }
    return out;
}

std::vector<int> gap_lengths(const TaskTagging& tagging, int token_count) {
    (void)token_count;
    std::vector<int> out;
    for (std::size_t k = 0; k + 1 < tagging.task_count(); ++k)
        out.push_back(tagging.task_indices[k + 1] - tagging.task_indices[k] - 1);
    return out;
}

std::vector<int> naive_splits(const TaskTagging& tagging, int token_count) {
    // The forward-association reading: every token after a task keeps that
    // task's association until the next task begins.
    return gap_lengths(tagging, token_count);
}

std::vector<int> association_owners(const TaskTagging& tagging, int token_count,
                                    const std::vector<int>& split_points) {
    const std::size_t m = tagging.task_count();
    if (m == 0) throw ValidationError("token association is undefined without tasks");
    if (split_points.size() + 1 != m)
        throw ValidationError("expected one split point per gap between consecutive tasks");

    std::vector<int> owners(static_cast<std::size_t>(token_count), static_cast<int>(m) - 1);
    for (int i = 1; i <= tagging.task_indices[0]; ++i) owners[static_cast<std::size_t>(i - 1)] = 0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const int p1 = tagging.task_indices[k];
        const int p2 = tagging.task_indices[k + 1];
        const int gap = p2 - p1 - 1;
        const int s = split_points[k];
        if (s < 0 || s > gap)
            throw ValidationError("split point " + std::to_string(s) + " outside gap of length " +
                                  std::to_string(gap));
        for (int i = p1 + 1; i < p2; ++i)
            owners[static_cast<std::size_t>(i - 1)] =
                (i <= p1 + s) ? static_cast<int>(k) : static_cast<int>(k + 1);
    }
    for (std::size_t k = 0; k < m; ++k)
        owners[static_cast<std::size_t>(tagging.task_indices[k] - 1)] = -1;
    return owners;
}

std::vector<std::string> build_association_features(const TaskTagging& tagging,
                                                    const corpus::AnnotatedInstruction& instr,
                                                    const std::vector<int>& split_points) {
    std::vector<int> owners = association_owners(tagging, instr.token_count(), split_points);
    std::vector<std::string> out(owners.size());
    for (std::size_t i = 0; i < owners.size(); ++i)
        out[i] = owners[i] < 0 ? kNullAssociation
                               : tagging.type_of(static_cast<std::size_t>(owners[i]));
    return out;
}

}  // namespace nlplan::labelers
