#pragma once

// Partial and full colorings by Gaussian projection.
//
// One round samples x* ~ N(0, I_n), projects it onto (eps K) ∩ H ∩ [-eps,eps]^n
// and rescales by 1/eps, so the returned increment lies in K ∩ [-1,1]^n with
// every coordinate that touched the cube boundary sitting exactly at +-1.
// Shifts are handled by stretching each coordinate so the nearer boundary of
// [-1 - s_i, 1 - s_i] becomes the symmetric cube.

#include <cstdint>
#include <optional>
#include <vector>

#include "vbal/core.hpp"

namespace vbal {

/// Per-coordinate bounds lo_i < 0 < hi_i for an increment, normalized by
/// `flip` so that the upper bound is the nearer one (|hi_i| <= |lo_i|).
struct ShiftBounds {
  Vector lo;
  Vector hi;
  Vector flip;  // +-1

  /// Bounds for increments z with shift + z in [-1,1]^n. Every entry of
  /// `shift` must lie strictly inside (-1, 1).
  static ShiftBounds from_shift(const Vector& shift);
  void validate() const;
};

struct RoundReport {
  int newly_frozen = 0;
  double disc_increment = 0.0;
  int projection_iters = 0;
  int retries_used = 0;
  double radius = 0.0;        // body radius the increment was projected into
  double slack = 0.0;         // solver and snapping allowance on top of radius
  double epsilon = 0.0;
  std::size_t active_before = 0;
  bool fallback = false;
};

/// Thrown when a round cannot freeze enough coordinates within the retry
/// budget. Carries the best converged attempt (empty if none converged).
class NoProgressError : public Error {
 public:
  NoProgressError(const std::string& what, Vector best, int best_frozen, RoundReport report)
      : Error(ErrorCode::NoProgress, what),
        best_(std::move(best)),
        best_frozen_(best_frozen),
        report_(report) {}
  const Vector& best() const noexcept { return best_; }
  int best_frozen() const noexcept { return best_frozen_; }
  const RoundReport& report() const noexcept { return report_; }

 private:
  Vector best_;
  int best_frozen_;
  RoundReport report_;
};

/// Instance whose column i is flip_i * hi_i * a_i.
Instance stretch_map(const Instance& inst, const ShiftBounds& bounds);

struct RoundOutcome {
  Vector increment;                    // in [-1,1]^n
  std::vector<std::size_t> frozen;     // coordinates with |increment_i| == 1
  RoundReport report;
};

/// One Gaussian projection round. `stream` separates RNG streams of
/// different rounds of the same run.
RoundOutcome partial_round(const Instance& inst, double radius, const std::optional<Subspace>& h,
                           const SolverConfig& cfg, std::uint64_t stream = 0);

struct PartialColoring {
  Vector increment;             // x with shift + x in [-1,1]^n
  ColoringState state;          // shift + increment, frozen coordinates snapped
  std::vector<RoundReport> rounds;
  double radius = 0.0;
  std::size_t newly_frozen = 0;
  bool stalled = false;         // only set when stalls are tolerated
};

/// Repeats rounds on the still-active coordinates until a target_fraction of
/// the initially active ones reach +-1. Every round's increment lies in
/// {||A z||_q <= radius} (up to the recorded slack). `h` is a subspace of
/// R^n that all increments must lie in.
PartialColoring partial_coloring(const Instance& inst, const Vector& shift,
                                 const std::optional<Subspace>& h, const SolverConfig& cfg,
                                 double radius);

struct FullColoring {
  Vector signs;
  double discrepancy = 0.0;
  std::vector<RoundReport> rounds;
  int phases = 0;                 // partial colorings performed
  int fallbacks = 0;
  double radius_sum = 0.0;        // sum of per-round radii
  double slack_sum = 0.0;
  double increment_sum = 0.0;     // sum of per-round increment discrepancies
  /// Every intermediate state, when requested.
  std::vector<ColoringState> trace;
};

/// Iterated partial coloring with per-phase radius
/// partial_bound(|active|, m, p, q, C). Requires n <= m and a positive bound
/// exponent.
FullColoring full_coloring(const Instance& inst, const SolverConfig& cfg, bool keep_trace = false);

/// p with 1/2 - 1/p = 1/ln(n/t) when t < n/10, else 4.
double beck_fiala_exponent(std::size_t n, std::size_t t);

struct BeckFialaColoring {
  FullColoring coloring;
  double p = 4.0;
  std::size_t t = 0;
  double discrepancy = 0.0;       // l_inf discrepancy of the 0/1 matrix
  double reference = 0.0;         // sqrt(t) * ln(2 max(n,t) / t)
  double ratio = 0.0;
};

/// Colors a 0/1 instance. Sparsity is taken from the instance when recorded,
/// otherwise from the densest column.
BeckFialaColoring beck_fiala_color(const Instance& inst, const SolverConfig& cfg);

}  // namespace vbal
