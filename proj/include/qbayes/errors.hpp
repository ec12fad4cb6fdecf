#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbayes {

// Invalid arguments (bad grids, malformed covariances, unknown outcomes) throw
// std::invalid_argument. The types below are the recoverable, domain-level
// failures that callers are expected to catch.

/// Evidence with zero probability under the prior: the Bayes denominator vanishes.
class ImpossibleEvidence : public std::runtime_error {
 public:
  explicit ImpossibleEvidence(const std::string& what) : std::runtime_error(what) {}
};

/// A likelihood value exceeds its declared bound Gamma_E.
class GammaViolation : public std::invalid_argument {
 public:
  GammaViolation(const std::string& what, std::size_t index)
      : std::invalid_argument(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// The heralded success probability of an update batch is indistinguishable
/// from zero at the working precision; the caller must fall back.
class BatchTooImprobable : public std::runtime_error {
 public:
  explicit BatchTooImprobable(const std::string& what) : std::runtime_error(what) {}
};

/// An estimated outcome probability fell below twice the per-evaluation budget.
class FloorViolation : public std::runtime_error {
 public:
  FloorViolation(const std::string& what, std::size_t outcome)
      : std::runtime_error(what), outcome_(outcome) {}
  std::size_t outcome() const { return outcome_; }

 private:
  std::size_t outcome_;
};

}  // namespace qbayes
