#ifndef NLPLAN_COMMON_TEXT_HPP
#define NLPLAN_COMMON_TEXT_HPP

#include <string>
#include <vector>

namespace nlplan {

std::string to_lower(std::string s);
std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string trim(const std::string& s);

/// Case-folds and strips leading articles ("the coffee" -> "coffee").
/// Shared by graph comparison, merging and planner grounding.
std::string normalize_value(const std::string& s);

/// Reads a whole file; throws ConfigError if it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace nlplan

#endif
