#include "pathorder/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pathorder/errors.hpp"

namespace pathorder {
namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

// ln of a Gamma(shape >= 1) variate.
double log_gamma_variate_large(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal_variate(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

}  // namespace

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t z = seed;
  for (auto& word : s_) {
    word = mix64(z);
    z += 0x9e3779b97f4a7c15ULL;
  }
}

std::uint64_t Rng::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double normal_variate(Rng& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double log_gamma_variate(double shape, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma variate: shape must be positive");
  if (shape >= 1.0) return log_gamma_variate_large(shape, rng);
  const double boosted = log_gamma_variate_large(shape + 1.0, rng);
  return boosted + std::log(rng.uniform_open()) / shape;
}

double gamma_variate(double shape, Rng& rng) { return std::exp(log_gamma_variate(shape, rng)); }

std::vector<double> dirichlet_variate(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  if (alpha.empty()) return out;
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = log_gamma_variate(alpha[i], rng);
  const double top = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

std::vector<double> flat_dirichlet_variate(std::size_t dim, Rng& rng) {
  const std::vector<double> ones(dim, 1.0);
  return dirichlet_variate(ones, rng);
}

std::size_t categorical_draw(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = rng.uniform() * total;
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    running += weights[i];
    last_positive = i;
    if (target < running) return i;
  }
  return last_positive;
}

}  // namespace pathorder
