#pragma once

#include <stdexcept>
#include <string>

namespace glim {

// Input data or configuration failed structural checks (bad CSV, inconsistent
// path grid, unknown variance family, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical operation left its supported domain (non-PD covariance, pivot
// below the floor, overflow in a variance profile, degenerate step scale).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Fitting could not produce a usable result (too few paths, rank-deficient
// design, every restart rejected).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace glim
