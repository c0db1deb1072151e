#pragma once

#include <stdexcept>
#include <string>

namespace advq {

// Single exception type with a machine-checkable kind. Messages are
// prefixed with the originating module so CLI errors stay attributable.
struct Error : std::runtime_error {
  enum class Kind {
    Parse,       // malformed input file
    Validation,  // structurally valid input violating a contract
    Domain,      // argument outside the declared domain (e.g. x not in D)
    Degenerate,  // constant function where F_0 or F_1 must be nonempty
    Numeric,     // tolerance violation or non-convergence
    Usage,       // bad CLI/config usage
  };

  Error(Kind k, const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), kind(k) {}

  Kind kind;
};

} // namespace advq
