#pragma once

#include <span>

namespace glim {

// Compensated summation; used wherever many covariance entries fold into one
// scalar so the result does not drift with the horizon.
double kahan_sum(std::span<const double> xs);

double sigmoid(double x);

// log(1 + exp(x)) without overflow for large |x|.
double softplus(double x);

// Pull an interior probability into [eps, 1 - eps] before a probit transform.
double clamp_probability(double y, double eps);

}  // namespace glim
