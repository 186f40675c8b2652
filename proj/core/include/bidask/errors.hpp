#pragma once

#include <stdexcept>
#include <string>

namespace bidask {

// Precondition violations: a caller handed us values outside the documented
// domain (negative scales, NaN inputs, out-of-range probabilities, ...).
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Internal state is inconsistent with what the operation requires, e.g. an
// amplitude vector whose norm has drifted past tolerance.
class invalid_state : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or semantically invalid external data (CSV schema problems,
// crossed books, non-positive sizes). Messages carry file/line context so
// the CLI can surface them verbatim.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string located(const std::string& source, std::size_t line, const std::string& what) {
    return source + ":" + std::to_string(line) + ": " + what;
}

} // namespace bidask
