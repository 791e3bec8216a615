#ifndef MSMAG_COMMON_HPP
#define MSMAG_COMMON_HPP

#include <stdexcept>
#include <string>

namespace msmag {

inline constexpr double pi = 3.14159265358979323846;

// Bad user input: unknown names, out-of-range parameters, malformed config.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (mesh, config syntax).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally invalid mesh (non-conforming, degenerate triangle).
struct TopologyError : std::runtime_error {
    explicit TopologyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime numerical failure: blow-up, solver non-convergence.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace msmag

#endif
