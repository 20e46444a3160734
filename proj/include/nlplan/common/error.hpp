#ifndef NLPLAN_COMMON_ERROR_HPP
#define NLPLAN_COMMON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace nlplan {

/// Error categories, mapped to process exit codes by the CLI.
enum class ErrorCategory {
    validation,   // bad input data (exit 2)
    config,       // bad configuration or missing files (exit 3)
    unsolvable,   // planner could not reach a goal within budget (exit 4)
    internal,     // pipeline bug or numerical failure (exit 5)
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& message)
        : Error(ErrorCategory::validation, message) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& message)
        : Error(ErrorCategory::config, message) {}
};

struct UnsolvableError : Error {
    explicit UnsolvableError(const std::string& message)
        : Error(ErrorCategory::unsolvable, message) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& message)
        : Error(ErrorCategory::internal, message) {}
};

}  // namespace nlplan

#endif
