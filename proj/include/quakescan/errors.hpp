#pragma once

#include <stdexcept>
#include <string>

namespace quakescan {

// Error taxonomy mirrors the process exit codes: config errors exit 2,
// data errors 3, convergence errors 4.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown by numeric kernels on inputs they are undefined for (zero variance,
// too few points). Callers that evaluate many features catch this and record
// a missing value instead of aborting the whole window.
class DegenerateInput : public DataError {
 public:
  explicit DegenerateInput(const std::string& msg) : DataError(msg) {}
};

class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace quakescan
