#pragma once

#include <stdexcept>
#include <string>

namespace greenchain {

// Malformed or inconsistent input: bad JSON, rows that don't sum to one,
// unknown states. The CLI maps this to exit code 2.
class spec_error : public std::runtime_error {
 public:
  explicit spec_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerically degenerate or structurally unsolvable system (singular
// pivot, no absorbing boundary reachable). The CLI maps this, along with
// std::domain_error, to exit code 3.
class solver_error : public std::runtime_error {
 public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace greenchain
