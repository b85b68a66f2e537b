#pragma once

#include <cstdint>
#include <utility>

#include "vbal/core.hpp"

namespace vbal {

/// Sylvester Hadamard matrix; n must be a power of two.
Instance hadamard(std::size_t n, Exponent p = Exponent::infinity(),
                  Exponent q = Exponent::infinity());

Instance identity_instance(std::size_t n, Exponent p = Exponent(1.0),
                           Exponent q = Exponent::infinity());

/// m x n matrix whose columns are Gaussian directions scaled to unit lp norm.
/// Deterministic per seed. Requires n <= m.
Instance random_ball_instance(std::size_t n, std::size_t m, Exponent p, std::uint64_t seed,
                              std::optional<Exponent> q = std::nullopt);

/// 0/1 columns with exactly t ones each (or Binomial(m, t/m) ones when
/// `binomial` is set, capped at t). Requires t <= m.
Instance beck_fiala_instance(std::size_t n, std::size_t m, std::size_t t, std::uint64_t seed,
                             bool binomial = false);

struct BruteForceResult {
  Vector signs;
  double value = 0.0;
};

/// Exact minimizer of ||A x||_q over {-1,1}^n, n <= 22. Only sign vectors
/// with x_0 = +1 are enumerated; among equal values the lexicographically
/// smallest vector (with -1 < +1) wins.
BruteForceResult brute_force_signs(const Instance& inst, Exponent q);

/// Draws `samples` points of [-1,1]^n with at least n/2 coordinates at +-1
/// and checks ||H x||_2 >= sqrt(n) * sqrt(n/2) for each.
bool hadamard_fractional_check(std::size_t n, std::size_t samples, std::uint64_t seed);

/// {x : |<g, x>| <= s} with s = C^-n 3^-n / 16.
struct ThinStrip {
  Vector normal;
  double half_width = 0.0;
  double scale_c = 1.0;
  int draws = 0;  // Gaussian draws used by the rejection sampler

  std::size_t dim() const noexcept { return static_cast<std::size_t>(normal.size()); }
  /// 2 Phi(s / ||g||_2) - 1.
  double gaussian_measure() const;
};

/// Rejection-samples g ~ N(0, I_n) until no nonzero ternary point lies in
/// C^n K and ||g||_2^2 <= 4n. At most 100 draws. Requires n <= 16.
ThinStrip thin_strip_instance(std::size_t n, double c, std::uint64_t seed);

/// True iff |<g, x>| > C^n s for every x in {-1,0,1}^n \ {0}. Requires n <= 16.
bool verify_no_ternary_point(const ThinStrip& strip);

}  // namespace vbal
