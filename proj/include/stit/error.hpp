#pragma once

#include <stdexcept>
#include <string>

namespace stit {

// Invalid geometric or numeric input (empty polytope, a >= b, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The hyperplane measure violates a model assumption: evenness, probability
// normalization, non-degeneracy, or positivity of the separating measures.
class AssumptionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cell count exceeded the configured cap. STIT processes do not explode, so
// this signals a bug or a pathological configuration.
class ExplosionGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Monte Carlo estimation could not be carried out (e.g. an empty table).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal algorithm exceeded its iteration budget.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Rejected run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace stit
