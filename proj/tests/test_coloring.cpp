#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "vbal/coloring.hpp"
#include "vbal/instances.hpp"

using namespace vbal;

namespace {

const Exponent kInf = Exponent::infinity();
const double kInfD = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::size_t at_boundary(const Vector& x) {
  std::size_t k = 0;
  for (double v : x) k += std::abs(v) == 1.0;
  return k;
}

SolverConfig seeded(std::uint64_t seed) {
  SolverConfig cfg;
  cfg.seed = seed;
  return cfg;
}

// Ledger checks shared by every full-coloring run.
void check_full_run(const Instance& inst, const FullColoring& fc) {
  const Exponent q = inst.q();
  REQUIRE(static_cast<std::size_t>(fc.signs.size()) == inst.cols());
  CHECK(at_boundary(fc.signs) == inst.cols());
  CHECK(fc.discrepancy == lq_norm(inst.a() * fc.signs, q));
  CHECK(fc.discrepancy <= fc.radius_sum);
  CHECK(fc.discrepancy <= fc.increment_sum * (1.0 + 1e-12) + 1e-12);
  for (const auto& r : fc.rounds) {
    CHECK(r.newly_frozen >= 0);
    CHECK(r.disc_increment <= r.radius + r.slack + 1e-12 * r.radius);
  }
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("stretch_map examples") {
  const Instance h = hadamard(4);
  ShiftBounds unit{Vector::Ones(4) * -1.0, Vector::Ones(4), Vector::Ones(4)};
  CHECK(stretch_map(h, unit).a() == h.a());

  const Instance one(Matrix::Constant(1, 1, 2.0), Exponent(1.0), kInf);
  const ShiftBounds half{vec({-1.5}), vec({0.5}), vec({1.0})};
  CHECK(stretch_map(one, half).a()(0, 0) == 1.0);

  ShiftBounds flipped = unit;
  flipped.flip[0] = -1.0;
  const Matrix got = stretch_map(h, flipped).a();
  CHECK(got.col(0) == -h.a().col(0));
  CHECK(got.rightCols(3) == h.a().rightCols(3));

  ShiftBounds zero = unit;
  zero.hi[1] = 0.0;
  CHECK_THROWS_AS(stretch_map(h, zero), Error);
}

TEST_CASE("shift bounds normalize toward the nearer side") {
  const ShiftBounds b = ShiftBounds::from_shift(vec({0.0, 0.5, -0.75}));
  CHECK_NOTHROW(b.validate());
  CHECK(b.hi == vec({1.0, 0.5, 0.25}));
  CHECK(b.lo == vec({-1.0, -1.5, -1.75}));
  CHECK(b.flip == vec({1.0, 1.0, -1.0}));
  CHECK_THROWS_AS(ShiftBounds::from_shift(vec({1.0})), Error);
  ShiftBounds bad = b;
  bad.lo[0] = -2.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("partial_round on the identity freezes a coordinate almost always") {
  const Instance id = identity_instance(8, Exponent(1.0), kInf);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    try {
      const RoundOutcome r = partial_round(id, 1.0, std::nullopt, seeded(seed));
      CHECK(r.increment.cwiseAbs().maxCoeff() <= 1.0);
      CHECK(r.report.disc_increment <= 1.0 + r.report.slack);
      ok += r.frozen.size() >= 1;
    } catch (const NoProgressError&) {
    }
  }
  CHECK(ok >= 99);
}

TEST_CASE("partial_round with the whole space is a cube clamp") {
  // Each coordinate freezes iff |g_i| >= eps, probability 2 Phi(-0.1) ~ 0.9203.
  const std::size_t n = 50;
  const Instance id = identity_instance(n, Exponent(1.0), kInf);
  double frozen = 0.0;
  const int runs = 200;
  for (int s = 0; s < runs; ++s) {
    const RoundOutcome r = partial_round(id, kInfD, std::nullopt, seeded(s));
    frozen += static_cast<double>(r.frozen.size());
    CHECK(r.report.projection_iters <= 1);
    for (Eigen::Index i = 0; i < r.increment.size(); ++i) {
      const bool listed = std::find(r.frozen.begin(), r.frozen.end(), i) != r.frozen.end();
      CHECK(listed == (std::abs(r.increment[i]) == 1.0));
    }
  }
  const double rate = frozen / (runs * n);
  const double expect = std::erfc(0.1 / std::sqrt(2.0));
  CHECK(rate == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("partial_round with H = {0} reports no progress") {
  const Instance id = identity_instance(4, Exponent(1.0), kInf);
  SolverConfig cfg;
  cfg.retry_budget = 3;
  try {
    partial_round(id, 1.0, Subspace::zero(4), cfg);
    FAIL("expected no-progress");
  } catch (const NoProgressError& e) {
    CHECK(e.code() == ErrorCode::NoProgress);
    CHECK(e.best_frozen() == 0);
    REQUIRE(e.best().size() == 4);
    CHECK(e.best().norm() == 0.0);
    CHECK(e.report().retries_used == 3);
  }
}

TEST_CASE("partial_round stays inside H") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  const Instance inst = random_ball_instance(6, 8, Exponent(2.0), 5);
  Matrix span(6, 4);
  for (Eigen::Index i = 0; i < span.size(); ++i) span.data()[i] = normal(gen);
  const Subspace h = Subspace::span_of(span);
  const RoundOutcome r = partial_round(inst, 1.5, h, seeded(2));
  const Vector off = r.increment - h.basis() * (h.basis().transpose() * r.increment);
  CHECK(off.norm() < 1e-5);
}

TEST_CASE("partial_coloring examples") {
  SUBCASE("identity, zero shift") {
    const Instance id = identity_instance(4, kInf, kInf);
    const PartialColoring pc = partial_coloring(id, Vector::Zero(4), std::nullopt, seeded(1), 1.0);
    CHECK(at_boundary(pc.state.x) >= 2);
    CHECK(pc.state.x.cwiseAbs().maxCoeff() <= 1.0);
    CHECK_NOTHROW(pc.state.check());
  }
  SUBCASE("nothing active") {
    const Instance id = identity_instance(3, kInf, kInf);
    const PartialColoring pc = partial_coloring(id, Vector::Ones(3), std::nullopt, seeded(1), 1.0);
    CHECK(pc.increment.norm() == 0.0);
    CHECK(pc.rounds.empty());
    CHECK(pc.newly_frozen == 0);
  }
  SUBCASE("Hadamard, l2") {
    // C = 1 gives radius 1.67 < ||H e_i||_2 = 2, so nothing can freeze.
    const Exponent two(2.0);
    const Instance h = hadamard(4, two, two);
    const double radius = partial_bound(4, 4, two, two, 2.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const PartialColoring pc = partial_coloring(h, Vector::Zero(4), std::nullopt, seeded(seed), radius);
      CHECK(at_boundary(pc.state.x) >= 2);
      double budget = 0.0;
      for (const auto& r : pc.rounds) {
        CHECK(r.radius == radius);
        budget += r.radius + r.slack;
      }
      CHECK(lq_norm(h.a() * pc.increment, two) <= budget * (1.0 + 1e-12));
      for (const auto& r : pc.rounds) CHECK(r.slack < 1e-3 * radius);
    }
  }
}

TEST_CASE("partial_coloring respects a shift") {
  const Instance inst = random_ball_instance(10, 12, Exponent(2.0), 9);
  Vector shift(10);
  shift << 0.9, -0.9, 0.5, -0.5, 0.0, 1.0, -1.0, 0.2, -0.3, 0.99;
  const PartialColoring pc =
      partial_coloring(inst, shift, std::nullopt, seeded(4), partial_bound(8, 12, inst.p(), inst.q(), 1.0));
  CHECK_NOTHROW(pc.state.check());
  CHECK(pc.state.x[5] == 1.0);
  CHECK(pc.state.x[6] == -1.0);
  CHECK(pc.newly_frozen >= 4);  // half of the 8 active coordinates
  CHECK((pc.state.x - shift - pc.increment).norm() < 1e-15);
}

TEST_CASE("full_coloring examples") {
  const Exponent two(2.0);
  SUBCASE("identity, l2") {
    const Instance id = identity_instance(4, two, two);
    const FullColoring fc = full_coloring(id, seeded(3));
    CHECK(fc.discrepancy == doctest::Approx(2.0).epsilon(1e-15));
    check_full_run(id, fc);
  }
  SUBCASE("Hadamard n = 2") {
    const Instance h = hadamard(2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const FullColoring fc = full_coloring(h, seeded(seed));
      CHECK(fc.discrepancy == 2.0);
      check_full_run(h, fc);
    }
  }
  SUBCASE("random l2 ball, n = m = 16") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Instance inst = random_ball_instance(16, 16, two, seed);
      const FullColoring fc = full_coloring(inst, seeded(seed));
      CHECK(fc.discrepancy <= 8.0 * full_bound(16, 16, two, two, 1.0));
      check_full_run(inst, fc);
    }
  }
}

TEST_CASE("full_coloring errors") {
  const Instance bad = identity_instance(4, Exponent(2.0), kInf);
  try {
    full_coloring(bad, SolverConfig{});
    FAIL("expected unsupported-regime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedRegime);
  }
  const Instance wide(Matrix::Ones(2, 3), Exponent(2.0), Exponent(2.0));
  try {
    full_coloring(wide, SolverConfig{});
    FAIL("expected invalid-argument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("full_coloring trace: bounded states and monotone frozen sets") {
  const Exponent ps[] = {Exponent(2.0), Exponent(3.0), kInf};
  for (int k = 0; k < 9; ++k) {
    const Exponent p = ps[k % 3];
    const Instance inst = random_ball_instance(12 + 4 * (k % 3), 24, p, 100 + k);
    const FullColoring fc = full_coloring(inst, seeded(k), true);
    check_full_run(inst, fc);
    REQUIRE(fc.trace.size() >= 2);
    std::vector<std::size_t> prev;
    for (const auto& state : fc.trace) {
      CHECK(state.x.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
      CHECK_NOTHROW(state.check());
      CHECK(std::includes(state.frozen.begin(), state.frozen.end(), prev.begin(), prev.end()));
      prev = state.frozen;
    }
    CHECK(fc.trace.back().x == fc.signs);
  }
}

TEST_CASE("full_coloring is reproducible per seed") {
  const Instance inst = random_ball_instance(20, 20, Exponent(2.0), 7);
  const FullColoring a = full_coloring(inst, seeded(11));
  const FullColoring b = full_coloring(inst, seeded(11));
  CHECK(a.signs == b.signs);
  CHECK(a.discrepancy == b.discrepancy);
}

TEST_CASE("partial coloring ratio is bounded by one constant across 50 instances") {
  double worst = 0.0;
  const Exponent ps[] = {Exponent(2.0), Exponent(3.0), kInf};
  for (int k = 0; k < 50; ++k) {
    const Exponent p = ps[k % 3];
    const std::size_t n = 8 + 4 * (k % 4);
    const Instance inst = random_ball_instance(n, n, p, 500 + k);
    const double radius = partial_bound(n, n, p, p, 1.0);
    const PartialColoring pc = partial_coloring(inst, Vector::Zero(static_cast<Eigen::Index>(n)),
                                                std::nullopt, seeded(k), radius);
    CHECK(at_boundary(pc.state.x) * 2 >= n);
    worst = std::max(worst, lq_norm(inst.a() * pc.increment, p) / radius);
  }
  MESSAGE("largest discrepancy / radius over 50 partial colorings: " << worst);
  CHECK(worst <= 8.0);
}

TEST_CASE("negating the matrix leaves the discrepancy distribution unchanged") {
  const Exponent two(2.0);
  const Instance inst = random_ball_instance(16, 16, two, 42);
  const Instance neg = inst.with_matrix(-inst.a());
  std::vector<double> a, b;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    a.push_back(full_coloring(inst, seeded(seed)).discrepancy);
    const FullColoring fc = full_coloring(neg, seeded(seed));
    check_full_run(neg, fc);
    b.push_back(fc.discrepancy);
  }
  const double ks = ks_distance(a, b);
  MESSAGE("KS distance " << ks);
  CHECK(ks < 0.2);
}

TEST_CASE("Beck-Fiala exponent selection") {
  const double p = beck_fiala_exponent(1024, 4);
  CHECK(p == doctest::Approx(3.128).epsilon(1e-3));
  CHECK(0.5 - 1.0 / p == doctest::Approx(1.0 / std::log(256.0)).epsilon(1e-12));
  CHECK(beck_fiala_exponent(64, 64) == 4.0);
  CHECK(beck_fiala_exponent(100, 10) == 4.0);  // t = n/10 is the p = 4 branch
  for (std::size_t n = 2; n <= 4096; n *= 2) {
    for (std::size_t t = 1; t <= n; ++t) {
      const double pt = beck_fiala_exponent(n, t);
      CHECK(pt >= 2.0);
      CHECK(pt < 16.0);
      if (10 * t < n) {
        CHECK(std::abs((0.5 - 1.0 / pt) - 1.0 / std::log(static_cast<double>(n) / t)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("beck_fiala_color") {
  const Instance bf = beck_fiala_instance(32, 32, 8, 3);
  const BeckFialaColoring res = beck_fiala_color(bf, seeded(1));
  CHECK(res.t == 8);
  CHECK(res.p == 4.0);
  CHECK(at_boundary(res.coloring.signs) == 32);
  CHECK(res.discrepancy == lq_norm(bf.a() * res.coloring.signs, kInf));
  CHECK(res.reference == doctest::Approx(std::sqrt(8.0) * std::log(8.0)));
  CHECK(res.ratio == doctest::Approx(res.discrepancy / res.reference));

  Matrix frac = Matrix::Identity(4, 4);
  frac(0, 1) = 0.5;
  try {
    beck_fiala_color(Instance(frac, kInf, kInf), SolverConfig{});
    FAIL("expected non-binary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonBinary);
  }
}
