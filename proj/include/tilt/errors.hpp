// Error taxonomy shared by the library and the CLI exit-code mapping.
#pragma once

#include <stdexcept>
#include <string>

namespace tilt {

// Bad flags, bad config keys, malformed requests.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data violates a file schema or a sampling invariant.
class SchemaError : public std::runtime_error {
public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-finite values, invalid domains, divergence.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem problems.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int schema = 3;
inline constexpr int numeric = 4;
inline constexpr int io = 5;
}  // namespace exit_code

}  // namespace tilt
