#pragma once

#include <stdexcept>
#include <string>

namespace tabroute {

// Bad arguments or malformed caller-supplied data. Maps to exit code 2 in the CLI.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unparseable files (fixtures, configs, tables, datasets).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Transport-level backend failure. Retryable by policy.
struct backend_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Well-formed HTTP exchange whose payload violates the completions contract
// (e.g. missing logprobs). Never retried.
struct protocol_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scripted backend asked for more steps than its script holds.
struct fixture_exhausted_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Undefined fit (single-class samples, empty sample set).
struct calibration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sweep-level failure (too many per-query errors).
struct harness_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tabroute
