#include "vbal/proj.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace vbal {

namespace {

constexpr double kBallTol = 1e-10;
constexpr int kBallMaxIter = 500;

// Solves w + c * w^(q-1) = a for w in [0, a], a > 0, c > 0, q > 1.
double solve_scalar_kkt(double a, double c, double q) {
  double lo = 0.0;
  double hi = a;
  double w = q >= 2.0 ? a : 0.5 * a;
  for (int it = 0; it < 200; ++it) {
    const double wq1 = std::pow(w, q - 1.0);
    const double f = w + c * wq1 - a;
    if (f > 0.0) hi = w; else lo = w;
    if (std::abs(f) <= 1e-15 * a || hi - lo <= 1e-16 * a) break;
    const double df = 1.0 + c * (q - 1.0) * (w > 0.0 ? wq1 / w : 0.0);
    double next = (df > 0.0 && std::isfinite(df)) ? w - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    w = next;
  }
  return w;
}

Vector project_l1_ball(const Vector& z, double r) {
  // Sort-based threshold search; returns sign(z) * max(|z| - theta, 0).
  std::vector<double> mags(static_cast<std::size_t>(z.size()));
  for (Eigen::Index j = 0; j < z.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(z[j]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumsum += mags[k];
    const double t = (cumsum - r) / static_cast<double>(k + 1);
    if (k + 1 == mags.size() || mags[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  Vector out(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double m = std::max(std::abs(z[j]) - theta, 0.0);
    out[j] = z[j] < 0.0 ? -m : m;
  }
  return out;
}

Vector project_general_ball(const Vector& z, double q, double r) {
  const Eigen::Index n = z.size();
  const Vector mag = z.cwiseAbs();
  Vector w(n);

  // phi(lambda) = sum w_j(lambda)^q - r^q is decreasing in lambda.
  auto evaluate = [&](double lambda, double* dphi) {
    double phi = 0.0;
    double d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = mag[j];
      if (a == 0.0) {
        w[j] = 0.0;
        continue;
      }
      const double wj = solve_scalar_kkt(a, lambda * q, q);
      w[j] = wj;
      if (wj <= 0.0) continue;
      const double wq1 = std::pow(wj, q - 1.0);
      phi += wq1 * wj;
      // dw/dlambda from implicit differentiation of the scalar KKT equation.
      const double dw = -q * wq1 / (1.0 + lambda * q * (q - 1.0) * wq1 / wj);
      d += q * wq1 * dw;
    }
    if (dphi) *dphi = d;
    return phi - std::pow(r, q);
  };

  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (evaluate(hi, nullptr) > 0.0) {
    lo = hi;
    hi *= 4.0;
    if (++guard > 200) {
      throw Error(ErrorCode::NonConvergence, "lq-ball projection: cannot bracket multiplier");
    }
  }

  const double rq = std::pow(r, q);
  double lambda = 0.5 * (lo + hi);
  bool done = false;
  for (int it = 0; it < kBallMaxIter; ++it) {
    double dphi = 0.0;
    const double phi = evaluate(lambda, &dphi);
    if (std::abs(phi) <= kBallTol * rq) {
      done = true;
      break;
    }
    if (phi > 0.0) lo = lambda; else hi = lambda;
    if (hi - lo <= 1e-15 * hi) {
      done = true;
      break;
    }
    double next = dphi < 0.0 ? lambda - phi / dphi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
  }
  if (!done) {
    throw Error(ErrorCode::NonConvergence, "lq-ball projection: multiplier search did not converge");
  }
  evaluate(lambda, nullptr);

  Vector out(n);
  for (Eigen::Index j = 0; j < n; ++j) out[j] = z[j] < 0.0 ? -w[j] : w[j];
  const double norm = lq_norm(out, q);
  if (norm > r) out *= r / norm;
  return out;
}

// Shared view of the constraint data.
struct Constraints {
  const Matrix& a;
  Exponent q;
  double radius;
  bool has_body;
  Vector lo;
  Vector hi;
  const Subspace* h;
};

ProjectionResult finish(const ProjectionProblem& prob, Vector point, double gap, int iters,
                        double tol) {
  ProjectionResult res;
  res.residual = std::max(prob.violation(point), gap);
  res.point = std::move(point);
  res.iterations = iters;
  res.converged = res.residual <= tol;
  return res;
}

// Dykstra's cyclic projections over {H} ∪ {strips} ∪ {box}; the box comes
// last so boundary coordinates of the returned point are exact.
ProjectionResult dykstra(const ProjectionProblem& prob, const Constraints& c, double tol,
                         int max_iter) {
  const Eigen::Index n = prob.anchor.size();
  const Eigen::Index m = c.a.rows();
  Vector y = prob.anchor;

  std::vector<Eigen::Index> rows;
  Vector row_sq(m);
  if (c.has_body) {
    for (Eigen::Index j = 0; j < m; ++j) {
      row_sq[j] = c.a.row(j).squaredNorm();
      if (row_sq[j] > 0.0) rows.push_back(j);
    }
  }
  Vector strip_inc = Vector::Zero(m);
  Vector box_inc = Vector::Zero(n);
  Vector sub_inc = Vector::Zero(n);
  Vector prev = y;
  Vector z(n);

  // The iterate can sit still for a whole cycle while the increments are
  // still moving, so the gap includes the increment changes.
  int it = 0;
  double gap = std::numeric_limits<double>::infinity();
  while (it < max_iter) {
    ++it;
    double inc_change = 0.0;
    if (c.h) {
      z = y + sub_inc;
      y = project_subspace(z, *c.h);
      const Vector next = z - y;
      inc_change += (next - sub_inc).squaredNorm();
      sub_inc = next;
    }
    for (Eigen::Index j : rows) {
      const double t = c.a.row(j).dot(y) + strip_inc[j] * row_sq[j];
      const double clamped = std::clamp(t, -c.radius, c.radius);
      const double s = (t - clamped) / row_sq[j];
      y.noalias() += (strip_inc[j] - s) * c.a.row(j).transpose();
      inc_change += (s - strip_inc[j]) * (s - strip_inc[j]) * row_sq[j];
      strip_inc[j] = s;
    }
    z = y + box_inc;
    y = z.cwiseMax(c.lo).cwiseMin(c.hi);
    const Vector next_box = z - y;
    inc_change += (next_box - box_inc).squaredNorm();
    box_inc = next_box;

    gap = std::sqrt((y - prev).squaredNorm() + inc_change);
    prev = y;
    if (gap <= tol && prob.violation(y) <= tol) break;
  }
  return finish(prob, std::move(y), gap, it, tol);
}

constexpr double kRelax = 1.6;

// ADMM on min 1/2||y - anchor||^2 with copies v = y (box), s = y (subspace)
// and w = A y (lq ball). Every block update is a closed-form projection; the
// y-step uses an eigendecomposition of A^T A so the penalty can change freely.

ProjectionResult splitting(const ProjectionProblem& prob, const Constraints& c, double tol,
                           int max_iter) {
  const Eigen::Index n = prob.anchor.size();
  const Matrix& a = c.a;
  const bool use_h = c.h != nullptr;
  const double copies = use_h ? 2.0 : 1.0;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  const Matrix& basis = eig.eigenvectors();
  const Vector lambdas = eig.eigenvalues().cwiseMax(0.0);

  const Vector& anchor = prob.anchor;
  Vector y = anchor.cwiseMax(c.lo).cwiseMin(c.hi);
  Vector v = y;
  Vector s = use_h ? project_subspace(y, *c.h) : Vector();
  Vector w = project_lq_ball(a * y, c.q, c.radius);
  Vector uv = Vector::Zero(n);
  Vector us = use_h ? Vector::Zero(n) : Vector();
  Vector uw = Vector::Zero(a.rows());

  double rho = 1.0;
  Vector diag_inv(n);
  auto refresh = [&] {
    for (Eigen::Index k = 0; k < n; ++k) diag_inv[k] = 1.0 / (1.0 + rho * copies + rho * lambdas[k]);
  };
  refresh();

  int it = 0;
  double primal = std::numeric_limits<double>::infinity();
  double dual = primal;
  Vector rhs(n), ay(a.rows()), v_old(n), s_old, w_old(a.rows()), yv(n), yw(a.rows()), ys;
  while (it < max_iter) {
    ++it;
    rhs = anchor + rho * (v - uv) + rho * (a.transpose() * (w - uw));
    if (use_h) rhs += rho * (s - us);
    y = basis * (diag_inv.asDiagonal() * (basis.transpose() * rhs));
    ay.noalias() = a * y;

    // Over-relaxed copies: each block sees relax * y + (1 - relax) * old copy.
    v_old = v;
    w_old = w;
    yv = kRelax * y + (1.0 - kRelax) * v_old;
    yw = kRelax * ay + (1.0 - kRelax) * w_old;
    v = (yv + uv).cwiseMax(c.lo).cwiseMin(c.hi);
    w = project_lq_ball(yw + uw, c.q, c.radius);
    if (use_h) {
      s_old = s;
      ys = kRelax * y + (1.0 - kRelax) * s_old;
      s = project_subspace(ys + us, *c.h);
    }

    uv += yv - v;
    uw += yw - w;
    double p2 = (y - v).squaredNorm() + (ay - w).squaredNorm();
    Vector dvec = (v - v_old) + a.transpose() * (w - w_old);
    if (use_h) {
      us += ys - s;
      p2 += (y - s).squaredNorm();
      dvec += s - s_old;
    }
    primal = std::sqrt(p2);
    dual = rho * dvec.norm();

    if (primal <= tol && dual <= tol && prob.violation(v) <= tol) break;

    if (it % 10 == 0) {
      double factor = 1.0;
      if (primal > 10.0 * dual) factor = 2.0;
      else if (dual > 10.0 * primal) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        uv /= factor;
        uw /= factor;
        if (use_h) us /= factor;
        refresh();
      }
    }
  }
  return finish(prob, std::move(v), std::max(primal, dual), it, tol);
}

}  // namespace

// ---------------------------------------------------------------------------

void ProjectionProblem::validate() const {
  const Eigen::Index n = anchor.size();
  if (body.a.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "projection: anchor length differs from body");
  }
  if (!(cube_half_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "projection: cube half-width must be positive");
  }
  if (subspace && static_cast<Eigen::Index>(subspace->ambient_dim()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "projection: subspace dimension mismatch");
  }
  if (asym_lo.has_value() != asym_hi.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "projection: asymmetric bounds need both sides");
  }
  if (asym_lo) {
    if (asym_lo->size() != n || asym_hi->size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "projection: asymmetric bound length mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lo = (*asym_lo)[i];
      const double hi = (*asym_hi)[i];
      if (!(lo < 0.0 && hi > 0.0) || hi - lo > 2.0 * cube_half_width * (1.0 + 1e-12)) {
        throw Error(ErrorCode::InvalidArgument,
                    "projection: asymmetric bounds need lo < 0 < hi and hi - lo <= 2 eps");
      }
    }
  }
}

Vector ProjectionProblem::box_lo() const {
  return asym_lo ? *asym_lo : Vector::Constant(anchor.size(), -cube_half_width);
}

Vector ProjectionProblem::box_hi() const {
  return asym_hi ? *asym_hi : Vector::Constant(anchor.size(), cube_half_width);
}

double ProjectionProblem::violation(const Vector& y) const {
  double v = 0.0;
  if (!body.is_whole_space()) v = std::max(v, body.value(y) - body.radius);
  const Vector lo = box_lo();
  const Vector hi = box_hi();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    v = std::max({v, lo[i] - y[i], y[i] - hi[i]});
  }
  if (subspace) v = std::max(v, (y - project_subspace(y, *subspace)).norm());
  return v;
}

Vector project_cube(const Vector& z, double eps) {
  return z.cwiseMax(-eps).cwiseMin(eps);
}

Vector project_box(const Vector& z, const Vector& lo, const Vector& hi) {
  if (lo.size() != z.size() || hi.size() != z.size()) {
    throw Error(ErrorCode::DimensionMismatch, "project_box: length mismatch");
  }
  return z.cwiseMax(lo).cwiseMin(hi);
}

Vector project_subspace(const Vector& z, const Subspace& h) {
  if (static_cast<std::size_t>(z.size()) != h.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "project_subspace: length mismatch");
  }
  if (h.dim() == 0) return Vector::Zero(z.size());
  return h.basis() * (h.basis().transpose() * z);
}

Vector project_lq_ball(const Vector& z, Exponent q, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "lq ball radius must be positive");
  if (r == std::numeric_limits<double>::infinity()) return z;
  if (q.is_infinite()) return z.cwiseMax(-r).cwiseMin(r);
  const double norm = lq_norm(z, q);
  if (norm <= r) return z;
  const double qv = q.value();
  if (qv == 2.0) return z * (r / norm);
  if (qv == 1.0) return project_l1_ball(z, r);
  return project_general_ball(z, qv, r);
}

Vector project_strip(const Vector& z, const Vector& row, double r) {
  const double sq = row.squaredNorm();
  if (sq == 0.0) return z;
  const double t = row.dot(z);
  const double clamped = std::clamp(t, -r, r);
  return z - ((t - clamped) / sq) * row;
}

ProjectionResult project_feasible(const ProjectionProblem& prob, const SolverConfig& cfg,
                                  ProjectionMethod method) {
  prob.validate();
  const double tol = cfg.proj_tol;
  const auto m = static_cast<std::size_t>(prob.body.a.rows());
  const auto n = static_cast<std::size_t>(prob.anchor.size());
  const int max_iter = cfg.max_iter_for(m, n);

  Constraints c{prob.body.a,       prob.body.q,    prob.body.radius, !prob.body.is_whole_space(),
                prob.box_lo(),     prob.box_hi(),  prob.subspace ? &*prob.subspace : nullptr};

  const double start_violation = prob.violation(prob.anchor);
  if (start_violation <= tol) {
    return ProjectionResult{prob.anchor, start_violation, 0, true};
  }
  if (!c.has_body && !c.h) {
    Vector y = prob.anchor.cwiseMax(c.lo).cwiseMin(c.hi);
    return finish(prob, std::move(y), 0.0, 1, tol);
  }
  if (method == ProjectionMethod::Auto) {
    method = (!c.has_body || c.q.is_infinite()) ? ProjectionMethod::Dykstra
                                                : ProjectionMethod::Splitting;
  }
  if (method == ProjectionMethod::Dykstra) {
    if (c.has_body && !c.q.is_infinite()) {
      throw Error(ErrorCode::InvalidArgument, "Dykstra path needs q = inf (strip body)");
    }
    return dykstra(prob, c, tol, max_iter);
  }
  if (!c.has_body) return dykstra(prob, c, tol, max_iter);
  return splitting(prob, c, tol, max_iter);
}

}  // namespace vbal
