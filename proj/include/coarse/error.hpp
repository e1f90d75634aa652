#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

/// Malformed input: bad ids, metric-axiom violations, invalid covers.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hypothesis of an operation does not hold for the supplied data.
class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// Metric axioms fail; the message names the offending pair or triple.
class MetricError : public InputError {
 public:
  using InputError::InputError;
};

/// A certified constant exceeded its caller-supplied ceiling.
class CeilingExceeded : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A bounded search gave up. Inconclusive, never a proof of non-existence.
class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coarse
