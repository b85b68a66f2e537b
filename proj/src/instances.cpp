#include "vbal/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

namespace vbal {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// -1 < +1, compared from index 0.
bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

Instance hadamard(std::size_t n, Exponent p, Exponent q) {
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::InvalidArgument,
                "Hadamard order must be a power of two, got " + std::to_string(n));
  }
  const auto k = static_cast<Eigen::Index>(n);
  // Sylvester: H_2k = [[H, H], [H, -H]], built in integers.
  std::vector<int> h(n * n, 0);
  h[0] = 1;
  for (std::size_t size = 1; size < n; size *= 2) {
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t j = 0; j < size; ++j) {
        const int v = h[i * n + j];
        h[i * n + j + size] = v;
        h[(i + size) * n + j] = v;
        h[(i + size) * n + j + size] = -v;
      }
    }
  }
  Matrix a(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      a(i, j) = h[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
    }
  }
  return Instance(std::move(a), p, q);
}

Instance identity_instance(std::size_t n, Exponent p, Exponent q) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "identity instance needs n >= 1");
  const auto k = static_cast<Eigen::Index>(n);
  return Instance(Matrix::Identity(k, k), p, q);
}

Instance random_ball_instance(std::size_t n, std::size_t m, Exponent p, std::uint64_t seed,
                              std::optional<Exponent> q) {
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidArgument, "random instance needs n, m >= 1");
  if (n > m) {
    throw Error(ErrorCode::InvalidArgument, "random instance needs n <= m");
  }
  std::mt19937_64 gen(derive_seed(seed, 0x62616c6cULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(gen);
      norm = lq_norm(a.col(j), p);
    }
    a.col(j) /= norm;
  }
  return Instance(std::move(a), p, q.value_or(p));
}

Instance beck_fiala_instance(std::size_t n, std::size_t m, std::size_t t, std::uint64_t seed,
                             bool binomial) {
  if (n < 1 || m < 1 || t < 1) {
    throw Error(ErrorCode::InvalidArgument, "Beck-Fiala instance needs n, m, t >= 1");
  }
  if (t > m) throw Error(ErrorCode::InvalidArgument, "Beck-Fiala instance needs t <= m");
  std::mt19937_64 gen(derive_seed(seed, 0x62666961ULL));
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> rows(m);
  std::binomial_distribution<std::size_t> count_dist(m, static_cast<double>(t) / static_cast<double>(m));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    std::size_t ones = t;
    if (binomial) ones = std::clamp<std::size_t>(count_dist(gen), 1, t);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `ones` slots become a uniform subset.
    for (std::size_t k = 0; k < ones; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, m - 1);
      std::swap(rows[k], rows[pick(gen)]);
      a(static_cast<Eigen::Index>(rows[k]), j) = 1.0;
    }
  }
  return Instance(std::move(a), Exponent::infinity(), Exponent::infinity(), static_cast<int>(t));
}

BruteForceResult brute_force_signs(const Instance& inst, Exponent q) {
  const std::size_t n = inst.cols();
  if (n > 22) {
    throw Error(ErrorCode::TooLarge, "brute force enumeration is limited to n <= 22");
  }
  const Matrix& a = inst.a();
  const std::size_t free_bits = n - 1;  // x_0 = +1
  const std::size_t prefix_bits = std::min<std::size_t>(free_bits, 6);
  const std::size_t low_bits = free_bits - prefix_bits;
  const std::size_t blocks = std::size_t{1} << prefix_bits;

  // Bit b of a mask encodes coordinate n-1-b as +1 when set, so increasing
  // masks run through sign vectors in lexicographic order.
  auto signs_from = [&](std::size_t mask) {
    Vector x(static_cast<Eigen::Index>(n));
    x[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
      x[static_cast<Eigen::Index>(i)] = (mask >> (n - 1 - i)) & 1U ? 1.0 : -1.0;
    }
    return x;
  };

  std::vector<BruteForceResult> block_best(blocks);
  auto run_block = [&](std::size_t block) {
    // Coordinates 1..prefix_bits are fixed by the block; the last low_bits
    // coordinates are walked in Gray-code order.
    const std::size_t base = block << low_bits;
    Vector x = signs_from(base);
    Vector y = a * x;
    BruteForceResult best{x, lq_norm(y, q)};
    for (std::size_t step = 1; step < (std::size_t{1} << low_bits); ++step) {
      const int bit = __builtin_ctzll(step);
      const auto coord = static_cast<Eigen::Index>(n - 1 - static_cast<std::size_t>(bit));
      x[coord] = -x[coord];
      y.noalias() += (2.0 * x[coord]) * a.col(coord);
      const double v = lq_norm(y, q);
      if (v <= best.value) {
        // Recompute exactly before comparing near-ties.
        const double exact = lq_norm(a * x, q);
        if (exact < best.value || (exact == best.value && lex_less(x, best.signs))) {
          best.signs = x;
          best.value = exact;
        }
      }
    }
    block_best[block] = std::move(best);
  };

  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  BruteForceResult best = block_best[0];
  for (std::size_t b = 1; b < blocks; ++b) {
    const auto& c = block_best[b];
    if (c.value < best.value || (c.value == best.value && lex_less(c.signs, best.signs))) best = c;
  }
  return best;
}

bool hadamard_fractional_check(std::size_t n, std::size_t samples, std::uint64_t seed) {
  const Instance h = hadamard(n);
  const double dn = static_cast<double>(n);
  const double threshold = std::sqrt(dn) * std::sqrt(dn / 2.0);
  std::mt19937_64 gen(derive_seed(seed, 0x68616461ULL));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(
      static_cast<std::size_t>(std::ceil(dn / 2.0)), n);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> idx(n);
  for (std::size_t s = 0; s < samples; ++s) {
    Vector x(static_cast<Eigen::Index>(n));
    for (auto& v : x) v = unit(gen);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), gen);
    const std::size_t k = count(gen);
    for (std::size_t i = 0; i < k; ++i) x[static_cast<Eigen::Index>(idx[i])] = coin(gen) ? 1.0 : -1.0;
    const double norm = (h.a() * x).norm();
    if (norm < threshold * (1.0 - 1e-12)) return false;
  }
  return true;
}

double ThinStrip::gaussian_measure() const {
  const double g = normal.norm();
  if (g == 0.0) return 1.0;
  return std::erf(half_width / (g * std::sqrt(2.0)));
}

bool verify_no_ternary_point(const ThinStrip& strip) {
  const std::size_t n = strip.dim();
  if (n > 16) throw Error(ErrorCode::TooLarge, "ternary verification is limited to n <= 16");
  const double threshold = std::pow(strip.scale_c, static_cast<double>(n)) * strip.half_width;
  const Vector& g = strip.normal;
  // Depth-first over coordinates; the first nonzero entry is forced to +1,
  // which covers each +-x pair once.
  bool ok = true;
  auto visit = [&](auto&& self, std::size_t i, double dot, bool nonzero) -> void {
    if (!ok) return;
    if (i == n) {
      if (nonzero && !(std::abs(dot) > threshold)) ok = false;
      return;
    }
    const double gi = g[static_cast<Eigen::Index>(i)];
    self(self, i + 1, dot, nonzero);
    self(self, i + 1, dot + gi, true);
    if (nonzero) self(self, i + 1, dot - gi, true);
  };
  visit(visit, 0, 0.0, false);
  return ok;
}

ThinStrip thin_strip_instance(std::size_t n, double c, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "thin strip needs n >= 1");
  if (!(c >= 1.0)) throw Error(ErrorCode::InvalidArgument, "thin strip needs C >= 1");
  if (n > 16) throw Error(ErrorCode::TooLarge, "thin strip verification is limited to n <= 16");
  const double dn = static_cast<double>(n);
  ThinStrip strip;
  strip.scale_c = c;
  strip.half_width = (1.0 / 16.0) * std::pow(c, -dn) * std::pow(3.0, -dn);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int draw = 0; draw < 100; ++draw) {
    std::mt19937_64 gen(derive_seed(seed, 0x73747270ULL, static_cast<std::uint64_t>(draw)));
    strip.normal.resize(static_cast<Eigen::Index>(n));
    for (auto& v : strip.normal) v = normal(gen);
    strip.draws = draw + 1;
    if (strip.normal.squaredNorm() <= 4.0 * dn && verify_no_ternary_point(strip)) return strip;
  }
  throw Error(ErrorCode::RejectionCap, "thin strip rejection sampling exceeded 100 draws");
}

}  // namespace vbal
