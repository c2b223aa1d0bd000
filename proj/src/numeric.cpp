#include "glim/numeric.hpp"

#include <cmath>

namespace glim {

double kahan_sum(std::span<const double> xs) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : xs) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  // For large x, log1p(exp(-x)) underflows gracefully instead of exp(x) blowing up.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double clamp_probability(double y, double eps) {
  if (y < eps) return eps;
  if (y > 1.0 - eps) return 1.0 - eps;
  return y;
}

}  // namespace glim
