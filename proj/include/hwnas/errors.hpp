#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hwnas {

/// Malformed architecture string or operation name.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Benchmark file violates the CSV contract (bad header, field count, value).
struct SchemaError : std::runtime_error {
    SchemaError(std::size_t line, std::size_t column, const std::string& what_arg)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what_arg),
          line(line), column(column) {}
    std::size_t line;
    std::size_t column;
};

/// Same architecture appears twice in a benchmark file.
struct DuplicateKeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested architecture or value is not present in the table.
struct LookupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rejection sampler exhausted its draw budget without filling the population.
struct HaltingError : std::runtime_error {
    HaltingError(std::size_t attempts, const std::string& what_arg)
        : std::runtime_error(what_arg), attempts(attempts) {}
    std::size_t attempts;
};

/// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
    DivergenceError(std::size_t epoch, const std::string& what_arg)
        : std::runtime_error(what_arg), epoch(epoch) {}
    std::size_t epoch;
};

}  // namespace hwnas
