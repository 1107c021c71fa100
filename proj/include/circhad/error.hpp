#pragma once

#include <stdexcept>
#include <string>

namespace circhad {

/// Raised when an argument violates an operation's precondition
/// (lag or index out of range, malformed text, wrong length).
class usage_error : public std::invalid_argument {
 public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace circhad
