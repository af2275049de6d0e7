#pragma once

#include <stdexcept>
#include <string>

namespace skipsim {

// Bad configuration text or bad parameter values supplied by the caller.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Snapshot database problems: missing entries, hash mismatches, corrupt files.
struct CacheError : std::runtime_error {
  explicit CacheError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failures (unwritable directory, short write, ...).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Violated structural precondition inside the simulation state itself,
// e.g. comparing membership vectors of different lengths.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace skipsim
