#include "pathorder/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "pathorder/errors.hpp"

namespace pathorder::numerics {
namespace {

constexpr double kLanczosG = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128.
constexpr std::array<double, 15> kLanczosCoefficients = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4, .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,  -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4, .36899182659531622704e-5};

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

constexpr int kMaxIterations = 1'000'000;
constexpr double kTolerance = 1e-12;

double lanczos_log_gamma(double x) {
  // Gamma(x) = sqrt(2 pi) t^(x - 1/2) e^-t A(x - 1), t = x - 1/2 + g
  const double z = x - 1.0;
  double sum = kLanczosCoefficients[0];
  for (std::size_t i = 1; i < kLanczosCoefficients.size(); ++i) {
    sum += kLanczosCoefficients[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  return kHalfLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

// exp(a ln x - x - ln Gamma(a)), the common prefactor of both branches.
double gamma_prefactor(double a, double x) {
  return std::exp(a * std::log(x) - x - log_gamma(a));
}

// Power series for P(a, x).
double lower_series(double a, double x) {
  double denom = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kTolerance) {
      return std::min(1.0, sum * gamma_prefactor(a, x));
    }
  }
  throw NumericError("incomplete gamma series did not converge");
}

// Continued fraction for Q(a, x), modified Lentz.
double upper_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kTolerance) {
      return std::min(1.0, gamma_prefactor(a, x) * h);
    }
  }
  throw NumericError("incomplete gamma continued fraction did not converge");
}

void check_arguments(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma: argument must be non-negative");
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  if (std::isinf(x)) return x;
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) return lanczos_log_gamma(x + 1.0) - std::log(x);
  return lanczos_log_gamma(x);
}

double log_multivariate_beta(std::span<const double> v) {
  if (v.empty()) throw DomainError("log_multivariate_beta: empty vector");
  double sum_logs = 0.0;
  double total = 0.0;
  for (double value : v) {
    sum_logs += log_gamma(value);
    total += value;
  }
  return sum_logs - log_gamma(total);
}

double regularized_lower_gamma(double a, double x) {
  check_arguments(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_continued_fraction(a, x);
}

double regularized_upper_gamma(double a, double x) {
  check_arguments(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_continued_fraction(a, x);
}

}  // namespace pathorder::numerics
