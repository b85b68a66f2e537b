#pragma once

// Euclidean projections onto K ∩ H ∩ box, where K = {y : ||A y||_q <= r}.

#include <optional>

#include "vbal/core.hpp"

namespace vbal {

struct ProjectionProblem {
  Vector anchor;
  DiscrepancyBody body;
  double cube_half_width = 1.0;
  std::optional<Subspace> subspace;
  // Per-coordinate box [lo_i, hi_i] used instead of the symmetric cube.
  std::optional<Vector> asym_lo;
  std::optional<Vector> asym_hi;

  /// Throws InvalidArgument / DimensionMismatch on inconsistent data.
  void validate() const;
  Vector box_lo() const;
  Vector box_hi() const;
  /// Largest violation over the body, box and subspace constraints.
  double violation(const Vector& y) const;
};

struct ProjectionResult {
  Vector point;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class ProjectionMethod {
  Auto,       // Dykstra for q = inf, splitting otherwise
  Dykstra,    // only valid for q = inf or a whole-space body
  Splitting,
};

/// Coordinatewise clamp to [-eps, eps].
Vector project_cube(const Vector& z, double eps);
Vector project_box(const Vector& z, const Vector& lo, const Vector& hi);

/// B (B^T z) for the orthonormal basis B of h.
Vector project_subspace(const Vector& z, const Subspace& h);

/// Euclidean projection onto {w : ||w||_q <= r}. Closed form for q = 2 and
/// q = inf, sort-based soft thresholding for q = 1, and a safeguarded
/// Newton/bisection solve of the KKT multiplier otherwise.
Vector project_lq_ball(const Vector& z, Exponent q, double r);

/// Projection onto a single strip {y : |<row, y>| <= r}.
Vector project_strip(const Vector& z, const Vector& row, double r);

/// argmin ||anchor - y||_2 over K ∩ H ∩ box. A non-converged result is
/// returned (not thrown) when the iteration cap is hit.
ProjectionResult project_feasible(const ProjectionProblem& prob, const SolverConfig& cfg,
                                  ProjectionMethod method = ProjectionMethod::Auto);

}  // namespace vbal
