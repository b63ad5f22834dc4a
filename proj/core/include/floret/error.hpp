#pragma once

#include <stdexcept>
#include <string>

namespace floret {

// Base for all library errors. `where` carries a location hint (a JSON
// pointer into a model file, a CSV line, a parameter name) when one exists.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::string where = {})
      : std::runtime_error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Malformed or structurally invalid model description.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Observed counts that do not fit the model (length, negative entries,
// unknown leaf paths, unexposed florets).
class DataError : public Error {
 public:
  using Error::Error;
};

// Arguments outside an operation's domain: dimension mismatch, parameters
// off the simplex, non-positive parameters where the interior is required.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The MLE lies on the boundary of the parameter space, so asymptotic
// quantities are not available.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

}  // namespace floret
