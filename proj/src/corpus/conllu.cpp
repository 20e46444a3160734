#include "nlplan/corpus/conllu.hpp"

#include <map>
#include <sstream>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"

namespace nlplan::corpus {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

struct RawToken {
    int local_id = 0;
    std::string form, upos, deprel;
    int local_head = 0;
};

void check_sentence_tree(const std::vector<Token>& tokens, int first, int last,
                         const std::string& instr_id, int sentence_id) {
    const std::string where =
        "instruction '" + instr_id + "' sentence " + std::to_string(sentence_id);
    int roots = 0;
    for (int i = first; i <= last; ++i) {
        const Token& t = tokens[static_cast<std::size_t>(i - 1)];
        if (t.head == 0) {
            ++roots;
            continue;
        }
        if (t.head == t.index) {
            throw ValidationError(where + ": token " + std::to_string(t.index) +
                                  " is its own head");
        }
        if (t.head < first || t.head > last) {
            throw ValidationError(where + ": token " + std::to_string(t.index) +
                                  " has head outside its sentence");
        }
    }
    if (roots != 1) {
        throw ValidationError(where + ": expected exactly one root token, found " +
                              std::to_string(roots));
    }
    // Walk up from every token; a cycle never reaches the root.
    const int n = last - first + 1;
    for (int i = first; i <= last; ++i) {
        int cur = i;
        int steps = 0;
        while (tokens[static_cast<std::size_t>(cur - 1)].head != 0) {
            cur = tokens[static_cast<std::size_t>(cur - 1)].head;
            if (++steps > n) {
                throw ValidationError(where + ": head cycle involving token " +
                                      std::to_string(i));
            }
        }
    }
}

}  // namespace

void validate_instruction(const AnnotatedInstruction& instr) {
    int i = 0;
    const int n = instr.token_count();
    while (i < n) {
        const int sid = instr.tokens[static_cast<std::size_t>(i)].sentence_id;
        int j = i;
        while (j < n && instr.tokens[static_cast<std::size_t>(j)].sentence_id == sid) ++j;
        check_sentence_tree(instr.tokens, i + 1, j, instr.id, sid);
        i = j;
    }
}

std::vector<AnnotatedInstruction> parse_conllu(const std::string& text,
                                               const std::string& origin) {
    std::vector<AnnotatedInstruction> docs;
    AnnotatedInstruction cur;
    std::vector<RawToken> sentence;
    int sentence_id = 0;
    int doc_count = 0;
    bool any_content = false;

    auto flush_sentence = [&]() {
        if (sentence.empty()) return;
        const int base = cur.token_count();
        // local ids must be 1..n in order
        for (std::size_t k = 0; k < sentence.size(); ++k) {
            if (sentence[k].local_id != static_cast<int>(k) + 1) {
                throw ValidationError(origin + ": sentence " + std::to_string(sentence_id) +
                                      " has non-contiguous token ids");
            }
        }
        for (const RawToken& r : sentence) {
            Token t;
            t.index = base + r.local_id;
            t.surface = r.form;
            t.pos = r.upos;
            t.dep_rel = r.deprel;
            t.head = r.local_head == 0 ? 0 : base + r.local_head;
            t.sentence_id = sentence_id;
            cur.tokens.push_back(t);
        }
        ++sentence_id;
        sentence.clear();
    };

    auto flush_doc = [&]() {
        flush_sentence();
        if (!cur.tokens.empty()) {
            if (cur.id.empty()) {
                cur.id = "doc" + std::to_string(doc_count);
            }
            validate_instruction(cur);
            docs.push_back(std::move(cur));
            cur = AnnotatedInstruction{};
            ++doc_count;
            sentence_id = 0;
        }
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush_sentence();
            continue;
        }
        if (line[0] == '#') {
            std::string comment = trim(line.substr(1));
            if (comment.rfind("newdoc", 0) == 0) {
                flush_doc();
                auto parts = split(comment, '=');
                if (parts.size() >= 2) cur.id = trim(parts[1]);
            }
            continue;
        }
        any_content = true;
        auto cols = split(line, '\t');
        if (cols.size() != 10) {
            throw ValidationError(origin + " line " + std::to_string(line_no) +
                                  ": expected 10 tab-separated columns, got " +
                                  std::to_string(cols.size()));
        }
        const std::string& id = cols[0];
        if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
            continue;  // multiword-token range or empty node
        }
        if (!all_digits(id)) {
            throw ValidationError(origin + " line " + std::to_string(line_no) +
                                  ": malformed token id '" + id + "'");
        }
        const std::string& head = cols[6];
        if (!all_digits(head)) {
            throw ValidationError(origin + " line " + std::to_string(line_no) +
                                  ": malformed HEAD '" + head + "'");
        }
        RawToken r;
        r.local_id = std::stoi(id);
        r.form = cols[1];
        r.upos = cols[3];
        r.local_head = std::stoi(head);
        r.deprel = cols[7];
        sentence.push_back(r);
    }
    flush_doc();
    if (!any_content && docs.empty()) {
        throw ValidationError(origin + ": no token lines found");
    }
    return docs;
}

std::vector<AnnotatedInstruction> read_conllu(const std::string& path) {
    return parse_conllu(read_file(path), path);
}

std::string write_conllu(const std::vector<AnnotatedInstruction>& instructions) {
    std::ostringstream out;
    for (const auto& instr : instructions) {
        out << "# newdoc id = " << instr.id << "\n";
        int i = 0;
        const int n = instr.token_count();
        while (i < n) {
            const int sid = instr.tokens[static_cast<std::size_t>(i)].sentence_id;
            const int base = i;  // tokens before this sentence
            while (i < n && instr.tokens[static_cast<std::size_t>(i)].sentence_id == sid) {
                const Token& t = instr.tokens[static_cast<std::size_t>(i)];
                const int local_id = t.index - base;
                const int local_head = t.head == 0 ? 0 : t.head - base;
                out << local_id << '\t' << t.surface << "\t_\t" << t.pos << "\t_\t_\t"
                    << local_head << '\t' << t.dep_rel << "\t_\t_\n";
                ++i;
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace nlplan::corpus
