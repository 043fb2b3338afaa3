#pragma once

#include <stdexcept>
#include <string>

namespace kgtc {

/// Malformed or unreadable user input (files, records, labels).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent configuration, e.g. a checkpoint that does not match the run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Prepared artifacts whose checksums no longer match their manifest.
class StaleArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A ranking metric was requested on a list without both label classes.
class UndefinedMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kgtc
