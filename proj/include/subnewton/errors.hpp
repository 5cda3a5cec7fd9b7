#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subnewton {

/// Malformed input text (LIBSVM/CSV/weights). Carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that cannot be used: unknown label, empty dataset, bad split.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (dimension mismatch, out-of-range parameter).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// CG met a direction with s'Hs <= 0; the operator is not positive definite.
class CurvatureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const char* message) {
    if (!condition) throw ContractViolation(message);
}

}  // namespace subnewton
