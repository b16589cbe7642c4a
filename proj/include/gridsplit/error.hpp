#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridsplit {

enum class ErrorKind {
    invalid_argument,
    parse,
    validation,
    unsupported,
    numerical,
    infeasible,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; the kind drives CLI exit codes,
// C API status codes and HTTP status mapping.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace gridsplit
