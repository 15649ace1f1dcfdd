#pragma once

#include <span>

namespace pathorder::numerics {

/// Natural log of the Gamma function for x > 0.
/// Lanczos approximation (g = 607/128, 15 terms); relative error below 1e-13 for x >= 0.5.
/// Arguments in (0, 0.5) are shifted through Gamma(x + 1) = x Gamma(x).
double log_gamma(double x);

/// ln B(v) = sum ln Gamma(v_i) - ln Gamma(sum v_i). Requires a non-empty vector of positive values.
double log_multivariate_beta(std::span<const double> v);

/// Regularized lower incomplete gamma P(a, x).
double regularized_lower_gamma(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
/// Uses the power series for x < a + 1 and a Lentz continued fraction otherwise.
double regularized_upper_gamma(double a, double x);

/// Survival function of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_survival(double x, double dof) {
  return regularized_upper_gamma(0.5 * dof, 0.5 * x);
}

}  // namespace pathorder::numerics
