#pragma once

// Exact and Monte Carlo Gaussian-measure quantities.
//
// Monte Carlo loops split their samples into fixed-size chunks, each with its
// own derived seed, so estimates are reproducible for a given seed no matter
// how many threads run them.

#include <cstdint>
#include <optional>

#include "vbal/core.hpp"

namespace vbal {

struct MeasureEstimate {
  double estimate = 0.0;
  std::size_t samples = 0;
  double ci_half_width = 0.0;  // 95%
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMonteCarloChunk = 4096;

/// Standard normal CDF.
double normal_cdf(double x);

/// gamma_n({x : |<a, x>| <= 1}) = 2 Phi(1/||a||_2) - 1, and 1 for a = 0.
double strip_measure_exact(const Vector& a);

/// prod_j strip_measure_exact(A_j / radius): a lower bound on the Gaussian
/// measure of {x : ||A x||_inf <= radius}.
double sidak_product_bound(const Instance& inst, double radius);

/// Fraction of standard Gaussian samples inside `body`, with a Wilson 95%
/// interval (the half-width covers both ends of the interval). At least 1000
/// samples.
MeasureEstimate mc_gaussian_measure(const DiscrepancyBody& body, std::size_t samples,
                                    std::uint64_t seed);

/// Mean of ||A g||_q over g ~ N(0, I_n). At least 1000 samples.
MeasureEstimate mc_expected_lq_norm(const Instance& inst, Exponent q, std::size_t samples,
                                    std::uint64_t seed);

struct CubeDistanceEstimate {
  MeasureEstimate mean_distance;   // E d(g, [-eps,eps]^n)
  MeasureEstimate fraction_below;  // P[d(g, [-eps,eps]^n) < threshold]
  double threshold = 0.0;          // (1 - 5 eps) sqrt(n)
};

/// eps in (0, 0.2], at least 100 samples.
CubeDistanceEstimate mc_distance_to_cube(std::size_t n, double eps, std::size_t samples,
                                         std::uint64_t seed);

struct MeasureBoundReport {
  double radius = 0.0;          // C sqrt(min(p, ln(2m/n))) n^(max(0,1/2-1/p)+1/q)
  MeasureEstimate measure;
  double log2_per_n = 0.0;      // log2(estimate) / n, -inf when no sample hit
  std::optional<double> sidak;  // only for q = inf
};

/// Gaussian measure of {x : ||A x||_q <= radius} with the radius above.
MeasureBoundReport measure_bound_check(const Instance& inst, std::size_t samples, std::uint64_t seed,
                                  double c = 1.0);

}  // namespace vbal
