#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pathorder {

/// SplitMix64 finalizer. Bijective 64-bit mixing used for seeding and stream derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `stream` derived from `master`; distinct streams give unrelated seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// xoshiro256** generator seeded through SplitMix64.
/// Identical seeds give identical sequences on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Unbiased integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t s_[4];
};

/// Standard normal variate (Box-Muller, one output per call).
double normal_variate(Rng& rng);

/// Gamma(shape, 1) variate by Marsaglia-Tsang squeeze rejection; shape < 1 uses the
/// Gamma(shape + 1) * U^(1/shape) boost. Throws DomainError for shape <= 0.
double gamma_variate(double shape, Rng& rng);

/// Natural log of a Gamma(shape, 1) variate; stays finite for tiny shapes.
double log_gamma_variate(double shape, Rng& rng);

/// Dirichlet(alpha) draw by normalizing independent Gamma variates (in log space).
std::vector<double> dirichlet_variate(std::span<const double> alpha, Rng& rng);

/// Flat Dirichlet(1, ..., 1) draw of dimension `dim`.
std::vector<double> flat_dirichlet_variate(std::size_t dim, Rng& rng);

/// Index drawn with probability proportional to `weights`.
std::size_t categorical_draw(std::span<const double> weights, Rng& rng);

}  // namespace pathorder
