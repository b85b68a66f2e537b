#include "vbal/coloring.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vbal/proj.hpp"

namespace vbal {

namespace {

constexpr double kBoundarySnap = 1e-9;

Vector gaussian_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(static_cast<Eigen::Index>(n));
  for (auto& v : g) v = normal(gen);
  return g;
}

// Vectors of h that vanish outside `keep`, expressed in the coordinates of
// `keep` and then stretched by 1/scale_i.
std::optional<Subspace> restrict_and_stretch(const std::optional<Subspace>& h,
                                             const std::vector<std::size_t>& keep,
                                             const Vector& scale) {
  if (!h) return std::nullopt;
  const Matrix& b = h->basis();
  const auto n = static_cast<Eigen::Index>(h->ambient_dim());
  const auto k = static_cast<Eigen::Index>(keep.size());
  std::vector<char> kept(static_cast<std::size_t>(n), 0);
  for (auto i : keep) kept[i] = 1;

  Matrix dropped_rows(n - k, b.cols());
  Matrix kept_rows(k, b.cols());
  for (Eigen::Index i = 0, d = 0, s = 0; i < n; ++i) {
    if (kept[static_cast<std::size_t>(i)]) kept_rows.row(s++) = b.row(i);
    else dropped_rows.row(d++) = b.row(i);
  }
  Matrix coeffs;
  if (n - k == 0 || b.cols() == 0) {
    coeffs = Matrix::Identity(b.cols(), b.cols());
  } else {
    Eigen::FullPivLU<Matrix> lu(dropped_rows);
    lu.setThreshold(1e-10);
    coeffs = lu.kernel();
    if (lu.rank() == b.cols()) coeffs = Matrix(b.cols(), 0);
  }
  Matrix spanning = kept_rows * coeffs;
  for (Eigen::Index i = 0; i < k; ++i) spanning.row(i) /= scale[i];
  return Subspace::span_of(spanning);
}

// Upper bound on sup ||A v||_q / ||v||_2 without an SVD.
double cheap_operator_bound(const Matrix& a, Exponent q) {
  const double fro = a.norm();
  if (q.is_infinite() || q.value() >= 2.0) return fro;
  return fro * std::pow(static_cast<double>(a.rows()), q.reciprocal() - 0.5);
}

}  // namespace

// ---------------------------------------------------------------------------

ShiftBounds ShiftBounds::from_shift(const Vector& shift) {
  ShiftBounds b;
  const Eigen::Index n = shift.size();
  b.lo.resize(n);
  b.hi.resize(n);
  b.flip.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = shift[i];
    if (!(std::abs(s) < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "shift coordinate " + std::to_string(i) +
                                                  " is not strictly inside (-1,1)");
    }
    // Raw bounds are [-1 - s, 1 - s]; flip so the nearer side is on top.
    const double f = s >= 0.0 ? 1.0 : -1.0;
    b.flip[i] = f;
    b.hi[i] = 1.0 - std::abs(s);
    b.lo[i] = -1.0 - std::abs(s);
  }
  return b;
}

void ShiftBounds::validate() const {
  if (lo.size() != hi.size() || lo.size() != flip.size()) {
    throw Error(ErrorCode::DimensionMismatch, "shift bounds have inconsistent lengths");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    const bool ok = lo[i] >= -2.0 && lo[i] < 0.0 && hi[i] > 0.0 && hi[i] <= 2.0 &&
                    hi[i] - lo[i] <= 2.0 + 1e-12 && std::abs(hi[i]) <= std::abs(lo[i]) &&
                    std::abs(flip[i]) == 1.0;
    if (!ok) {
      throw Error(ErrorCode::InvalidArgument,
                  "shift bounds violate -2 <= lo < 0 < hi <= 2, hi - lo <= 2, |hi| <= |lo| at " +
                      std::to_string(i));
    }
  }
}

Instance stretch_map(const Instance& inst, const ShiftBounds& bounds) {
  if (static_cast<std::size_t>(bounds.hi.size()) != inst.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "stretch_map: bounds length differs from n");
  }
  Matrix a = inst.a();
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    if (bounds.hi[i] == 0.0) {
      throw Error(ErrorCode::InvalidArgument, "stretch_map: zero upper bound");
    }
    a.col(i) *= bounds.flip[i] * bounds.hi[i];
  }
  return inst.with_matrix(std::move(a));
}

RoundOutcome partial_round(const Instance& inst, double radius, const std::optional<Subspace>& h,
                           const SolverConfig& cfg, std::uint64_t stream) {
  cfg.validate();
  const std::size_t n = inst.cols();
  const double eps = cfg.epsilon;
  const auto required = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.min_round_fraction * static_cast<double>(n))));
  const std::uint64_t fp = inst.fingerprint();
  const double op_bound = cheap_operator_bound(inst.a(), inst.q());

  RoundOutcome best;
  best.report.newly_frozen = -1;
  int total_iters = 0;

  for (int attempt = 0; attempt <= cfg.retry_budget; ++attempt) {
    ProjectionProblem prob{gaussian_vector(n, derive_seed(cfg.seed, fp, stream, static_cast<std::uint64_t>(attempt))),
                           DiscrepancyBody(inst.a(), inst.q(), eps * radius),
                           eps,
                           h,
                           std::nullopt,
                           std::nullopt};
    const ProjectionResult res = project_feasible(prob, cfg);
    total_iters += res.iterations;
    if (!res.converged) continue;

    Vector y = res.point;
    double snap_sq = 0.0;
    std::vector<std::size_t> frozen;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (std::abs(y[k]) >= eps - cfg.freeze_tol) {
        const double snapped = y[k] < 0.0 ? -eps : eps;
        snap_sq += (snapped - y[k]) * (snapped - y[k]);
        y[k] = snapped;
        frozen.push_back(i);
      }
    }
    Vector x = y / eps;
    for (auto i : frozen) x[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(i)] < 0.0 ? -1.0 : 1.0;

    const int count = static_cast<int>(frozen.size());
    if (count > best.report.newly_frozen) {
      best.increment = x;
      best.frozen = std::move(frozen);
      best.report.newly_frozen = count;
      best.report.disc_increment = lq_norm(inst.a() * x, inst.q());
      best.report.radius = radius;
      best.report.slack = (res.residual + op_bound * std::sqrt(snap_sq)) / eps;
      best.report.epsilon = eps;
      best.report.active_before = n;
    }
    best.report.retries_used = attempt;
    best.report.projection_iters = total_iters;
    if (static_cast<std::size_t>(count) >= required) return best;
  }

  best.report.retries_used = cfg.retry_budget;
  best.report.projection_iters = total_iters;
  const int got = std::max(best.report.newly_frozen, 0);
  throw NoProgressError("partial round froze " + std::to_string(got) + " of required " +
                            std::to_string(required) + " coordinates after " +
                            std::to_string(cfg.retry_budget + 1) + " attempts",
                        best.increment, got, best.report);
}

namespace {

struct PhaseContext {
  std::uint64_t next_stream = 0;
  bool tolerate_stall = false;
};

PartialColoring partial_coloring_impl(const Instance& inst, const Vector& shift,
                                      const std::optional<Subspace>& h, const SolverConfig& cfg,
                                      double radius, PhaseContext& ctx) {
  const std::size_t n = inst.cols();
  if (static_cast<std::size_t>(shift.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "partial_coloring: shift length differs from n");
  }
  if (h && h->ambient_dim() != n) {
    throw Error(ErrorCode::DimensionMismatch, "partial_coloring: subspace dimension mismatch");
  }
  for (Eigen::Index i = 0; i < shift.size(); ++i) {
    if (!(std::abs(shift[i]) <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "partial_coloring: shift outside [-1,1]");
    }
  }

  PartialColoring out;
  out.radius = radius;
  out.state.x = shift;
  out.state.refresh_frozen();

  std::size_t initially_active = 0;
  for (Eigen::Index i = 0; i < shift.size(); ++i) initially_active += std::abs(shift[i]) < 1.0;
  const auto target = static_cast<std::size_t>(
      std::ceil(cfg.target_fraction * static_cast<double>(initially_active) - 1e-12));

  SolverConfig round_cfg = cfg;
  int halvings = 0;
  while (out.newly_frozen < target) {
    const std::vector<std::size_t> active = out.state.active();
    Vector sub_shift(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      sub_shift[static_cast<Eigen::Index>(k)] = out.state.x[static_cast<Eigen::Index>(active[k])];
    }
    const Instance sub = inst.select_columns(active);
    const ShiftBounds bounds = ShiftBounds::from_shift(sub_shift);
    const Instance stretched = stretch_map(sub, bounds);
    const Vector scale = bounds.flip.cwiseProduct(bounds.hi);
    const std::optional<Subspace> sub_h = restrict_and_stretch(h, active, scale);

    RoundOutcome round;
    const std::uint64_t stream = ctx.next_stream++;
    try {
      round = partial_round(stretched, radius, sub_h, round_cfg, stream);
    } catch (const NoProgressError& e) {
      if (halvings < cfg.max_epsilon_halvings &&
          round_cfg.epsilon / 2.0 > round_cfg.freeze_tol * 10.0) {
        round_cfg.epsilon /= 2.0;
        ++halvings;
        continue;
      }
      if (!ctx.tolerate_stall) throw;
      out.stalled = true;
      if (e.best().size() == 0) break;
      round.increment = e.best();
      round.report = e.report();
    }

    // Map back: z = D y, then keep whichever of +z / -z hits more boundaries.
    const Vector z = scale.cwiseProduct(round.increment);
    auto hits = [&](double sign) {
      int count = 0;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const double v = sub_shift[static_cast<Eigen::Index>(k)] + sign * z[static_cast<Eigen::Index>(k)];
        count += std::abs(v) >= 1.0 - kBoundarySnap;
      }
      return count;
    };
    const double sign = hits(-1.0) > hits(1.0) ? -1.0 : 1.0;

    Vector delta = Vector::Zero(static_cast<Eigen::Index>(n));
    int newly = 0;
    double snap_sq = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(active[k]);
      double v = out.state.x[i] + sign * z[static_cast<Eigen::Index>(k)];
      if (std::abs(v) >= 1.0 - kBoundarySnap) {
        const double snapped = v < 0.0 ? -1.0 : 1.0;
        snap_sq += (snapped - v) * (snapped - v);
        v = snapped;
        ++newly;
      }
      delta[i] = v - out.state.x[i];
      out.state.x[i] = v;
    }
    out.state.refresh_frozen();
    out.state.round += 1;
    out.newly_frozen += static_cast<std::size_t>(newly);

    RoundReport report = round.report;
    report.newly_frozen = newly;
    report.disc_increment = lq_norm(inst.a() * delta, inst.q());
    report.slack += cheap_operator_bound(inst.a(), inst.q()) * std::sqrt(snap_sq);
    report.active_before = active.size();
    report.epsilon = round_cfg.epsilon;
    out.rounds.push_back(report);
    if (out.stalled) break;
  }

  out.increment = out.state.x - shift;
  return out;
}

}  // namespace

PartialColoring partial_coloring(const Instance& inst, const Vector& shift,
                                 const std::optional<Subspace>& h, const SolverConfig& cfg,
                                 double radius) {
  cfg.validate();
  PhaseContext ctx;
  return partial_coloring_impl(inst, shift, h, cfg, radius, ctx);
}

FullColoring full_coloring(const Instance& inst, const SolverConfig& cfg, bool keep_trace) {
  cfg.validate();
  const Exponent p = inst.p();
  const Exponent q = inst.q();
  if (!(bound_exponent(p, q) > 0.0)) {
    throw Error(ErrorCode::UnsupportedRegime,
                "full coloring needs max(0,1/2-1/p)+1/q > 0 (p <= 2 with q = inf is excluded)");
  }
  const std::size_t n = inst.cols();
  const std::size_t m = inst.rows();
  if (n > m) {
    throw Error(ErrorCode::InvalidArgument, "full coloring needs n <= m");
  }

  FullColoring out;
  ColoringState state = ColoringState::zeros(n);
  if (keep_trace) out.trace.push_back(state);
  PhaseContext ctx;
  ctx.tolerate_stall = true;

  for (std::vector<std::size_t> active = state.active(); !active.empty(); active = state.active()) {
    const double radius = partial_bound(active.size(), m, p, q, cfg.radius_constant);
    PartialColoring phase = partial_coloring_impl(inst, state.x, std::nullopt, cfg, radius, ctx);
    ++out.phases;
    for (const auto& r : phase.rounds) out.rounds.push_back(r);
    state.x = phase.state.x;
    state.refresh_frozen();

    if (phase.stalled) {
      // Freeze the active coordinate closest to the boundary.
      const std::vector<std::size_t> left = state.active();
      if (!left.empty()) {
        std::size_t pick = left.front();
        for (auto i : left) {
          if (std::abs(state.x[static_cast<Eigen::Index>(i)]) >
              std::abs(state.x[static_cast<Eigen::Index>(pick)])) {
            pick = i;
          }
        }
        const auto k = static_cast<Eigen::Index>(pick);
        const double target = state.x[k] < 0.0 ? -1.0 : 1.0;
        const double step = target - state.x[k];
        state.x[k] = target;
        state.refresh_frozen();
        RoundReport fb;
        fb.fallback = true;
        fb.newly_frozen = 1;
        fb.active_before = left.size();
        fb.disc_increment = lq_norm(inst.a().col(k) * step, q);
        fb.radius = fb.disc_increment;
        out.rounds.push_back(fb);
        ++out.fallbacks;
      }
    }
    state.round = out.phases;
    if (keep_trace) out.trace.push_back(state);
  }

  out.signs = state.x;
  out.discrepancy = lq_norm(inst.a() * out.signs, q);
  for (const auto& r : out.rounds) {
    out.radius_sum += r.radius;
    out.slack_sum += r.slack;
    out.increment_sum += r.disc_increment;
  }
  return out;
}

double beck_fiala_exponent(std::size_t n, std::size_t t) {
  if (t < 1 || n < 1) throw Error(ErrorCode::InvalidArgument, "Beck-Fiala needs n, t >= 1");
  const double dn = static_cast<double>(n);
  const double dt = static_cast<double>(t);
  if (10.0 * dt >= dn) return 4.0;
  return 1.0 / (0.5 - 1.0 / std::log(dn / dt));
}

BeckFialaColoring beck_fiala_color(const Instance& inst, const SolverConfig& cfg) {
  const Matrix& a = inst.a();
  std::size_t t = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    std::size_t nnz = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      if (v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::NonBinary, "Beck-Fiala coloring needs a 0/1 matrix");
      }
      nnz += v == 1.0;
    }
    t = std::max(t, nnz);
  }
  if (inst.sparsity_t()) t = static_cast<std::size_t>(*inst.sparsity_t());
  if (t == 0) t = 1;

  BeckFialaColoring out;
  const std::size_t n = inst.cols();
  out.t = t;
  out.p = beck_fiala_exponent(n, t);
  const double scale = std::pow(static_cast<double>(t), -1.0 / out.p);
  const Instance scaled(a * scale, Exponent(out.p), Exponent::infinity());
  out.coloring = full_coloring(scaled, cfg);
  out.discrepancy = lq_norm(a * out.coloring.signs, Exponent::infinity());
  const double dt = static_cast<double>(t);
  out.reference = std::sqrt(dt) * std::log(2.0 * std::max(static_cast<double>(n), dt) / dt);
  out.ratio = out.discrepancy / out.reference;
  return out;
}

}  // namespace vbal
