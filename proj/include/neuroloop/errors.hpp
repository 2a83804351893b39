#pragma once

#include <stdexcept>
#include <string>

namespace neuroloop {

// Parameter outside its physical or mathematical domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration; the message starts with the offending field path.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_path(field) {}
    std::string field_path;
};

struct RoutingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StreamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Population layout does not fit the available neurons or synapse columns.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace neuroloop
