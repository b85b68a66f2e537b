// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "vbal/coloring.hpp"
#include "vbal/instances.hpp"
#include "vbal/measure.hpp"
#include "vbal/proj.hpp"

using namespace vbal;

namespace {

const Exponent kInf = Exponent::infinity();
const double kInfD = std::numeric_limits<double>::infinity();

// Pinned tolerances and limits.
constexpr double kBoxTol = 1e-9;              // 1: |x_i| <= 1 + 1e-9
constexpr double kRatioCap = 8.0;             // 1, 5, 11
constexpr double kRuntime1 = 600.0;           // 1: < 10 min
constexpr double kSlopeLo = 0.35, kSlopeHi = 0.65;
constexpr double kRuntime2 = 1800.0;          // 2: < 30 min
constexpr std::size_t kMeasureSamples = 1000000;
constexpr double kRuntime6 = 300.0;           // 6: < 5 min
constexpr double kCiMultiplier = 3.0;         // 6
constexpr std::size_t kCubeSamples = 200;     // 7
constexpr double kCubeFraction = 0.95;        // 7
constexpr double kOracleTol = 1e-5;           // 8
constexpr double kNonexpTol = 1e-8;           // 8
constexpr double kIdempotentTol = 1e-9;       // 8
constexpr double kKhintchineCap = 3.0;        // 9
constexpr std::size_t kKhintchineSamples = 10000;
constexpr double kExponentTol = 1e-9;         // 11

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolverConfig seeded(std::uint64_t seed) {
  SolverConfig cfg;
  cfg.seed = seed;
  return cfg;
}

Exponent exp_of(double q) { return std::isinf(q) ? kInf : Exponent(q); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Matrix gaussian(std::mt19937_64& gen, Eigen::Index m, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = scale * normal(gen);
  return a;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Full-coloring runs from every criterion, checked by criterion 3.
struct LedgerEntry {
  std::string label;
  double discrepancy;
  double radius_sum;
};
std::vector<LedgerEntry> g_ledger;

FullColoring run_full(const Instance& inst, const SolverConfig& cfg, const std::string& label) {
  FullColoring fc = full_coloring(inst, cfg);
  g_ledger.push_back({label, fc.discrepancy, fc.radius_sum});
  return fc;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& why) {
    if (!ok && pass) detail = why;
    pass = pass && ok;
  }
};

// 1
Outcome partial_contract() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::size_t ns[] = {16, 32, 64};
  const Exponent ps[] = {Exponent(2.0), Exponent(3.0), kInf};
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = ns[k % 3];
    const Exponent p = ps[(k / 3) % 3];
    const Instance inst = random_ball_instance(n, n, p, 1000 + k);
    const double radius = partial_bound(n, n, p, p, 1.0);
    const PartialColoring pc =
        partial_coloring(inst, Vector::Zero(static_cast<Eigen::Index>(n)), std::nullopt, seeded(k), radius);
    std::size_t at_one = 0;
    for (double v : pc.state.x) at_one += std::abs(v) == 1.0;
    o.require(2 * at_one >= n, "run " + std::to_string(k) + ": only " + std::to_string(at_one) + " at +-1");
    o.require(pc.state.x.cwiseAbs().maxCoeff() <= 1.0 + kBoxTol, "run " + std::to_string(k) + " leaves the cube");
    worst = std::max(worst, lq_norm(inst.a() * pc.increment, p) / radius);
  }
  const double secs = seconds_since(t0);
  o.require(worst <= kRatioCap, "max ratio " + fmt(worst) + " > 8");
  o.require(secs < kRuntime1, "runtime " + fmt(secs) + " s");
  if (o.pass) o.detail = "50 runs, max disc/partial_bound " + fmt(worst) + ", " + fmt(secs) + " s";
  return o;
}

// 2
Outcome full_exponent() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::size_t ns[] = {64, 128, 256, 512};
  std::ostringstream detail;
  for (const Exponent p : {Exponent(2.0), kInf}) {
    std::vector<double> lx, ly;
    for (std::size_t n : ns) {
      std::vector<double> d;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Instance inst = random_ball_instance(n, n, p, 17 * n + seed);
        d.push_back(run_full(inst, seeded(seed), "c2 n=" + std::to_string(n)).discrepancy);
      }
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(median(d)));
    }
    const double slope = ls_slope(lx, ly);
    o.require(slope >= kSlopeLo && slope <= kSlopeHi, "p=" + p.to_string() + " slope " + fmt(slope));
    detail << "slope(p=" << p.to_string() << ") " << fmt(slope) << ", ";
  }
  const double secs = seconds_since(t0);
  o.require(secs < kRuntime2, "runtime " + fmt(secs) + " s");
  if (o.pass) o.detail = detail.str() + fmt(secs) + " s";
  return o;
}

// 3
Outcome triangle_ledger() {
  Outcome o;
  double worst = 0.0;
  for (const auto& e : g_ledger) {
    o.require(e.discrepancy <= e.radius_sum,
              e.label + ": " + fmt(e.discrepancy) + " > " + fmt(e.radius_sum));
    worst = std::max(worst, e.discrepancy / e.radius_sum);
  }
  o.require(!g_ledger.empty(), "no full-coloring runs recorded");
  if (o.pass) o.detail = std::to_string(g_ledger.size()) + " runs, max disc/sum radii " + fmt(worst);
  return o;
}

// 4
Outcome hadamard_lower_bound() {
  Outcome o;
  std::ostringstream detail;
  for (std::size_t n : {4, 8, 16}) {
    const double v = brute_force_signs(hadamard(n), kInf).value;
    o.require(v >= std::sqrt(static_cast<double>(n)), "n=" + std::to_string(n) + " value " + fmt(v));
    o.require(hadamard_fractional_check(n, 1000, 7 * n), "fractional check n=" + std::to_string(n));
    detail << "n=" << n << " min " << v << "; ";
  }
  if (o.pass) o.detail = detail.str() + "fractional checks passed";
  return o;
}

// 5
Outcome oracle_sanity() {
  Outcome o;
  const double ps[] = {2.0, 3.0, 4.0, kInfD};
  const double qs[] = {2.0, 4.0, kInfD};
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 4 + k % 7;
    const std::size_t m = n + k % 3;
    const Exponent p = exp_of(ps[k % 4]);
    Exponent q = exp_of(qs[k % 3]);
    if (q.value() < p.value()) q = p;
    if (p.value() <= 2.0 && q.is_infinite()) q = Exponent(4.0);
    const Instance inst = random_ball_instance(n, m, p, 3000 + k, q);
    const FullColoring fc = run_full(inst, seeded(k), "c5 #" + std::to_string(k));
    const double best = brute_force_signs(inst, q).value;
    const double cap = kRatioCap * full_bound(n, m, p, q, 1.0);
    o.require(fc.discrepancy >= best, "#" + std::to_string(k) + " beats the exact minimum");
    o.require(fc.discrepancy <= cap, "#" + std::to_string(k) + " disc " + fmt(fc.discrepancy) + " > " + fmt(cap));
    worst = std::max(worst, fc.discrepancy / full_bound(n, m, p, q, 1.0));
  }
  if (o.pass) o.detail = "20 instances, max disc/full_bound " + fmt(worst);
  return o;
}

// 6
Outcome measure_bounds() {
  Outcome o;
  const auto t0 = Clock::now();
  std::ostringstream detail;
  for (std::size_t n : {4, 6, 8}) {
    const Instance inst = random_ball_instance(n, n, kInf, 4000 + n);
    const MeasureBoundReport r = measure_bound_check(inst, kMeasureSamples, 11 * n);
    const double floor = std::pow(4.0, -static_cast<double>(n));
    o.require(r.measure.estimate >= floor, "n=" + std::to_string(n) + " measure " + fmt(r.measure.estimate));
    o.require(r.sidak.has_value() && r.measure.estimate + kCiMultiplier * r.measure.ci_half_width >= *r.sidak,
              "n=" + std::to_string(n) + " below the product bound");
    detail << "n=" << n << " gamma " << fmt(r.measure.estimate) << " (log2/n " << fmt(r.log2_per_n)
           << ", product " << fmt(r.sidak.value_or(0.0)) << "); ";
  }
  const double secs = seconds_since(t0);
  o.require(secs < kRuntime6, "runtime " + fmt(secs) + " s");
  if (o.pass) o.detail = detail.str() + fmt(secs) + " s";
  return o;
}

// 7
Outcome concentration() {
  Outcome o;
  const CubeDistanceEstimate c = mc_distance_to_cube(1000, 0.05, kCubeSamples, 5);
  const double above = 1.0 - c.fraction_below.estimate;
  o.require(above >= kCubeFraction, "fraction above " + fmt(above));
  if (o.pass) o.detail = "fraction with d >= " + fmt(c.threshold) + ": " + fmt(above);
  return o;
}

// 8
Outcome projection_oracle() {
  Outcome o;
  std::mt19937_64 gen(808);
  std::normal_distribution<double> normal;
  SolverConfig cfg;
  cfg.proj_max_iter = 20000;
  const double qs[] = {1.0, 2.0, 4.0, kInfD};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(gen() % 6);
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 6);
    const double q = qs[trial % 4];
    const Matrix a = gaussian(gen, m, n);
    const Vector x = gaussian(gen, n, 1, 2.0);
    const double r = 0.3 + 0.01 * static_cast<double>(gen() % 100);
    const double eps = 0.2 + 0.01 * static_cast<double>(gen() % 100);
    ProjectionProblem prob{x, DiscrepancyBody(a, exp_of(q), r), eps, std::nullopt, std::nullopt, std::nullopt};
    std::optional<Matrix> basis;
    if (trial % 4 != 1 && trial % 3 == 0 && n > 1) {
      prob.subspace = Subspace::span_of(gaussian(gen, n, n - 1));
      basis = prob.subspace->basis();
    }
    const ProjectionResult res = project_feasible(prob, cfg);
    const oracle::Problem op{x, a, q, r, Vector::Constant(n, -eps), Vector::Constant(n, eps), basis};
    const double err = (res.point - oracle::project(op)).norm();
    o.require(res.converged, "problem " + std::to_string(trial) + " did not converge");
    o.require(err < kOracleTol, "problem " + std::to_string(trial) + " off by " + fmt(err));
    worst = std::max(worst, err);
  }

  // Single-set maps: nonexpansive and idempotent.
  const Subspace h = Subspace::span_of(gaussian(gen, 7, 3));
  const Vector row = gaussian(gen, 7, 1);
  const double bq[] = {1.0, 1.5, 2.0, 3.0, kInfD};
  int props = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector u = gaussian(gen, 7, 1, 2.0);
    const Vector v = trial % 2 ? Vector(u + gaussian(gen, 7, 1, 0.1)) : Vector(gaussian(gen, 7, 1, 2.0));
    const double d = (u - v).norm();
    const Exponent q = exp_of(bq[trial % 5]);
    const std::vector<std::function<Vector(const Vector&)>> maps = {
        [](const Vector& z) { return project_cube(z, 0.7); },
        [&](const Vector& z) { return project_subspace(z, h); },
        [&](const Vector& z) { return project_strip(z, row, 0.4); },
        [&](const Vector& z) { return project_lq_ball(z, q, 1.3); },
    };
    for (const auto& f : maps) {
      const Vector fu = f(u);
      o.require((fu - f(v)).norm() <= d + kNonexpTol, "nonexpansiveness, pair " + std::to_string(trial));
      o.require((f(fu) - fu).norm() <= kIdempotentTol, "idempotence, point " + std::to_string(trial));
      props += 2;
    }
  }

  // project_feasible itself, solved tightly.
  SolverConfig tight;
  tight.proj_tol = 1e-11;
  tight.proj_max_iter = 200000;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 2 + trial % 4, m = 1 + trial % 3;
    const Matrix a = gaussian(gen, m, n);
    const Exponent q = exp_of(qs[trial % 4]);
    const Vector u = gaussian(gen, n, 1, 2.0), v = gaussian(gen, n, 1, 2.0);
    ProjectionProblem pu{u, DiscrepancyBody(a, q, 0.7), 0.4, std::nullopt, std::nullopt, std::nullopt};
    ProjectionProblem pv = pu;
    pv.anchor = v;
    const ProjectionResult ru = project_feasible(pu, tight), rv = project_feasible(pv, tight);
    o.require(ru.converged && rv.converged, "tight solve " + std::to_string(trial) + " did not converge");
    o.require((ru.point - rv.point).norm() <= (u - v).norm() + kNonexpTol,
              "project_feasible nonexpansiveness " + std::to_string(trial));
    pu.anchor = ru.point;
    const ProjectionResult again = project_feasible(pu, tight);
    o.require((again.point - ru.point).norm() <= kIdempotentTol,
              "project_feasible idempotence " + std::to_string(trial));
    props += 2;
  }
  if (o.pass) {
    o.detail = "100 problems, max l2 error " + fmt(worst) + "; " + std::to_string(props) + " property checks";
  }
  return o;
}

// 9
Outcome khintchine() {
  Outcome o;
  double worst = 0.0;
  for (double p : {1.0, 2.0, 4.0}) {
    for (std::size_t n : {16, 64}) {
      const Instance inst = random_ball_instance(n, n, Exponent(p), 9000 + n + static_cast<std::size_t>(p));
      const MeasureEstimate e = mc_expected_lq_norm(inst, Exponent(p), kKhintchineSamples, n);
      const double ratio = e.estimate / (std::sqrt(p) * std::pow(static_cast<double>(n), std::max(0.5, 1.0 / p)));
      o.require(ratio <= kKhintchineCap, "p=" + fmt(p) + " n=" + std::to_string(n) + " ratio " + fmt(ratio));
      worst = std::max(worst, ratio);
    }
  }
  if (o.pass) o.detail = "max ratio " + fmt(worst);
  return o;
}

// 10
Outcome thin_strip() {
  Outcome o;
  std::ostringstream detail;
  for (std::size_t n = 4; n <= 9; ++n) {
    try {
      const ThinStrip s = thin_strip_instance(n, 1.5, 10 * n);
      const double gamma = s.gaussian_measure();
      o.require(s.draws <= 100, "n=" + std::to_string(n) + " used " + std::to_string(s.draws) + " draws");
      o.require(verify_no_ternary_point(s), "n=" + std::to_string(n) + " has a ternary point");
      o.require(gamma > 0.0, "n=" + std::to_string(n) + " zero measure");
      detail << "n=" << n << " gamma " << fmt(gamma) << " ln/n " << fmt(std::log(gamma) / n) << "; ";
    } catch (const Error& e) {
      o.require(false, "n=" + std::to_string(n) + ": " + e.what());
    }
  }
  if (o.pass) o.detail = detail.str();
  return o;
}

// 11
Outcome beck_fiala() {
  Outcome o;
  double worst_eq = 0.0;
  for (std::size_t n = 2; n <= 8192; n *= 2) {
    for (std::size_t t = 1; t <= n; t = t < 8 ? t + 1 : t * 3 / 2) {
      const double p = beck_fiala_exponent(n, t);
      if (10 * t < n) {
        const double gap = std::abs((0.5 - 1.0 / p) - 1.0 / std::log(static_cast<double>(n) / t));
        worst_eq = std::max(worst_eq, gap);
        o.require(p >= 2.0 && p < 16.0, "p out of [2,16)");
      } else {
        o.require(p == 4.0, "n=" + std::to_string(n) + " t=" + std::to_string(t) + " not the p=4 branch");
      }
    }
    o.require(beck_fiala_exponent(n, n) == 4.0, "t=n not the p=4 branch");
  }
  o.require(worst_eq <= kExponentTol, "defining equation off by " + fmt(worst_eq));

  std::ostringstream detail;
  double worst = 0.0;
  for (std::size_t n : {64, 128}) {
    for (std::size_t t : {n / 4, n}) {
      const Instance inst = beck_fiala_instance(n, n, t, 11000 + n + t);
      const BeckFialaColoring bf = beck_fiala_color(inst, seeded(n + t));
      g_ledger.push_back({"c11 n=" + std::to_string(n) + " t=" + std::to_string(t),
                          bf.coloring.discrepancy, bf.coloring.radius_sum});
      o.require(bf.ratio <= kRatioCap, "n=" + std::to_string(n) + " t=" + std::to_string(t) + " C " + fmt(bf.ratio));
      worst = std::max(worst, bf.ratio);
      detail << "n=" << n << " t=" << t << " disc " << bf.discrepancy << " C " << fmt(bf.ratio) << "; ";
    }
  }
  if (o.pass) o.detail = "equation gap " + fmt(worst_eq) + "; " + detail.str() + "max C " + fmt(worst);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  // Criterion 3 runs last so that it sees every full-coloring run.
  const std::vector<Criterion> order = {
      {1, "partial-coloring contract", partial_contract},
      {2, "full-coloring exponent", full_exponent},
      {4, "Hadamard lower bound", hadamard_lower_bound},
      {5, "oracle sanity", oracle_sanity},
      {6, "measure bounds", measure_bounds},
      {7, "cube-distance concentration", concentration},
      {8, "projection oracle equivalence", projection_oracle},
      {9, "expected norm bound", khintchine},
      {10, "thin-strip construction", thin_strip},
      {11, "Beck-Fiala exponent selection", beck_fiala},
      {3, "triangle-inequality ledger", triangle_ledger},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failed = 0;
  for (const auto& c : order) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::ostringstream line;
    line << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " [" << c.name << "] " << o.detail
         << " (" << fmt(seconds_since(t0)) << " s)";
    lines.emplace_back(c.id, line.str());
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed ? 1 : 0;
}
