#pragma once
#include <stdexcept>
#include <string>

namespace gsp {

// Malformed input file (bad JSON/CSV syntax, truncated payload).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a documented invariant.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced a non-finite loss or parameter value.
struct DivergenceError : std::runtime_error {
    int epoch;
    DivergenceError(int epoch_, const std::string& msg)
        : std::runtime_error(msg), epoch(epoch_) {}
};

}  // namespace gsp
