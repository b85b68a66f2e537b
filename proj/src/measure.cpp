#include "vbal/measure.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace vbal {

namespace {

constexpr double kZ95 = 1.959963984540054;

void require_samples(std::size_t samples, std::size_t minimum) {
  if (samples < minimum) {
    throw Error(ErrorCode::InvalidArgument,
                "need at least " + std::to_string(minimum) + " samples");
  }
}

// Runs fn(count, gen) once per chunk; results are stored per
// chunk so the reduction order never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> run_chunks(std::size_t samples, std::uint64_t seed, std::uint64_t tag, Fn fn) {
  const std::size_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<T> out(chunks);
  auto work = [&](std::size_t c) {
    const std::size_t begin = c * kMonteCarloChunk;
    const std::size_t count = std::min(kMonteCarloChunk, samples - begin);
    std::mt19937_64 gen(derive_seed(seed, tag, c));
    out[c] = fn(count, gen);
  };
  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) work(c);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

MeasureEstimate proportion(std::size_t hits, std::size_t samples, std::uint64_t seed) {
  const double n = static_cast<double>(samples);
  const double phat = static_cast<double>(hits) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = kZ95 / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  const double lo = std::max(0.0, center - half);
  const double hi = std::min(1.0, center + half);
  return {phat, samples, std::max(phat - lo, hi - phat), seed};
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t hits = 0;
};

MeasureEstimate mean_estimate(const std::vector<Moments>& parts, std::size_t samples,
                              std::uint64_t seed) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = samples > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, samples, kZ95 * std::sqrt(var / n), seed};
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double strip_measure_exact(const Vector& a) {
  const double norm = a.norm();
  if (norm == 0.0) return 1.0;
  // 2 Phi(t) - 1 = erf(t / sqrt 2), without cancellation near 0.
  return std::erf(1.0 / (norm * std::sqrt(2.0)));
}

double sidak_product_bound(const Instance& inst, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  double product = 1.0;
  for (Eigen::Index j = 0; j < inst.a().rows(); ++j) {
    product *= strip_measure_exact(inst.a().row(j).transpose() / radius);
  }
  return product;
}

MeasureEstimate mc_gaussian_measure(const DiscrepancyBody& body, std::size_t samples,
                                    std::uint64_t seed) {
  require_samples(samples, 1000);
  if (body.is_whole_space()) return proportion(samples, samples, seed);
  const Eigen::Index n = body.a.cols();
  auto parts = run_chunks<std::size_t>(samples, seed, 0x6761756dULL,
                                       [&](std::size_t count, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(n, static_cast<Eigen::Index>(count));
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      for (Eigen::Index i = 0; i < n; ++i) g(i, k) = normal(gen);
    }
    const Matrix ag = body.a * g;
    std::size_t hits = 0;
    for (Eigen::Index k = 0; k < ag.cols(); ++k) {
      if (lq_norm(ag.col(k), body.q) <= body.radius) ++hits;
    }
    return hits;
  });
  std::size_t hits = 0;
  for (auto h : parts) hits += h;
  return proportion(hits, samples, seed);
}

MeasureEstimate mc_expected_lq_norm(const Instance& inst, Exponent q, std::size_t samples,
                                    std::uint64_t seed) {
  require_samples(samples, 1000);
  const Matrix& a = inst.a();
  auto parts = run_chunks<Moments>(samples, seed, 0x6c716e6fULL,
                                   [&](std::size_t count, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(a.cols(), static_cast<Eigen::Index>(count));
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, k) = normal(gen);
    }
    const Matrix ag = a * g;
    Moments m;
    for (Eigen::Index k = 0; k < ag.cols(); ++k) {
      const double v = lq_norm(ag.col(k), q);
      m.sum += v;
      m.sum_sq += v * v;
    }
    return m;
  });
  return mean_estimate(parts, samples, seed);
}

CubeDistanceEstimate mc_distance_to_cube(std::size_t n, double eps, std::size_t samples,
                                         std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (!(eps > 0.0 && eps <= 0.2)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 0.2]");
  require_samples(samples, 100);
  CubeDistanceEstimate out;
  out.threshold = (1.0 - 5.0 * eps) * std::sqrt(static_cast<double>(n));
  auto parts = run_chunks<Moments>(samples, seed, 0x63756265ULL,
                                   [&](std::size_t count, std::mt19937_64& gen) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Moments m;
    for (std::size_t k = 0; k < count; ++k) {
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double excess = std::max(0.0, std::abs(normal(gen)) - eps);
        sq += excess * excess;
      }
      const double d = std::sqrt(sq);
      m.sum += d;
      m.sum_sq += d * d;
      if (d < out.threshold) ++m.hits;
    }
    return m;
  });
  out.mean_distance = mean_estimate(parts, samples, seed);
  std::size_t below = 0;
  for (const auto& p : parts) below += p.hits;
  out.fraction_below = proportion(below, samples, seed);
  return out;
}

MeasureBoundReport measure_bound_check(const Instance& inst, std::size_t samples,
                                       std::uint64_t seed, double c) {
  MeasureBoundReport out;
  out.radius = partial_bound(inst.cols(), inst.rows(), inst.p(), inst.q(), c);
  out.measure = mc_gaussian_measure(DiscrepancyBody(inst, out.radius), samples, seed);
  out.log2_per_n = out.measure.estimate > 0.0
                       ? std::log2(out.measure.estimate) / static_cast<double>(inst.cols())
                       : -std::numeric_limits<double>::infinity();
  if (inst.q().is_infinite()) out.sidak = sidak_product_bound(inst, out.radius);
  return out;
}

}  // namespace vbal
