#pragma once

#include <stdexcept>
#include <string>

namespace msb {

// Invalid inputs: malformed specs, violated generator invariants, bad queries.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical-consistency failures: singular systems, tolerance violations,
// overflow in exact integer counts.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed files or query strings.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msb
