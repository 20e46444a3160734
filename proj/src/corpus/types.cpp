#include "nlplan/corpus/types.hpp"

#include <set>

#include "nlplan/common/error.hpp"

namespace nlplan::corpus {

bool is_dependency_label(const std::string& s) {
    return s == dep_label::conditional || s == dep_label::dependent_positive ||
           s == dep_label::dependent_negative || s == dep_label::sequential;
}

bool LabelAlphabet::contains(const std::string& label) const {
    return index_of(label) >= 0;
}

int LabelAlphabet::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

void LabelAlphabet::validate() const {
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) {
            throw ValidationError("alphabet has duplicate label: " + l);
        }
    }
    if (!outside_label.empty() && !contains(outside_label)) {
        throw ValidationError("alphabet is missing its outside label: " + outside_label);
    }
}

const std::vector<std::string>& default_task_types() {
    static const std::vector<std::string> types = {
        "going",       "taking",        "bringing",      "placing",
        "searching",   "check_state",   "switching_on",  "switching_off",
    };
    return types;
}

const std::vector<std::string>& default_argument_types() {
    static const std::vector<std::string> types = {
        "Object",    "Goal",     "Source",   "State",    "Location", "Device",
        "Recipient", "Container", "Surface",  "Room",     "Person",   "Instrument",
        "Direction", "Manner",   "Time",     "Quantity", "Color",    "Size",
        "Shape",     "Material", "Duration",
    };
    return types;
}

LabelAlphabet default_task_alphabet() {
    LabelAlphabet a;
    a.labels.push_back("O");
    for (const auto& t : default_task_types()) a.labels.push_back(t);
    return a;
}

LabelAlphabet default_argument_alphabet() {
    LabelAlphabet a;
    a.labels.push_back("O");
    for (const auto& t : default_argument_types()) {
        a.labels.push_back("B-" + t);
        a.labels.push_back("I-" + t);
    }
    return a;
}

LabelAlphabet dependency_alphabet() {
    LabelAlphabet a;
    a.labels = {dep_label::conditional, dep_label::dependent_positive,
                dep_label::dependent_negative, dep_label::sequential};
    a.outside_label.clear();
    return a;
}

}  // namespace nlplan::corpus
