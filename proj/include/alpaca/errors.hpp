#pragma once

#include <stdexcept>
#include <string>

namespace alpaca {

/// A Cholesky pivot fell below tolerance.
class NotPositiveDefinite : public std::runtime_error {
 public:
  explicit NotPositiveDefinite(const std::string& what)
      : std::runtime_error("not positive definite: " + what) {}
};

class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what)
      : std::invalid_argument("shape mismatch: " + what) {}
};

/// Training produced a NaN or infinite loss.
class NonFiniteLoss : public std::runtime_error {
 public:
  explicit NonFiniteLoss(const std::string& what)
      : std::runtime_error("non-finite loss: " + what) {}
};

/// Malformed corpus, model, config or CSV input.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace alpaca
