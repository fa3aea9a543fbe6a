#pragma once

#include <stdexcept>
#include <string>

namespace fenchelkit {

/// Raised when an operation's precondition fails or a solver gives up.
/// The message is the short diagnostic ("improper function", "pivot limit", ...).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fenchelkit
