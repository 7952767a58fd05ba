#pragma once

#include <stdexcept>
#include <string>

namespace coregae {

// Malformed input text (edge lists, TSV, config files, embedding files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a contract (shape, range, capacity).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or singular systems during numerical work.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coregae
