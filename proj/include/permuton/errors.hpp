#pragma once

#include <stdexcept>
#include <string>

namespace permuton {

// Two points of a set share an x- or y-coordinate, so the induced
// permutation is undefined.
class DuplicateCoordinate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeLimitExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ParameterOutOfRange : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Density evaluated exactly on its singular set.
class SingularPoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A deterministic inequality failed. Always an implementation bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace permuton
