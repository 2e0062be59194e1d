#pragma once

#include <stdexcept>
#include <string>

namespace fcl {

// Invalid or inconsistent configuration (bad keys, dimension mismatch).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (non-convergence, residue above tolerance).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data files.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fcl
