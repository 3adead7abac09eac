#pragma once

#include <stdexcept>
#include <string>

namespace csh {

/// Invalid parameters or configuration (maps to CLI exit code 2).
class ConstraintError : public std::runtime_error {
public:
    explicit ConstraintError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal protocol violation, e.g. a decodability failure (CLI exit code 3).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace csh
