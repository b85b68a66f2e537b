#include "vbal/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <thread>

namespace vbal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidExponent: return "invalid-exponent";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::UnsupportedRegime: return "unsupported-regime";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::NoProgress: return "no-progress";
    case ErrorCode::NonBinary: return "non-binary";
    case ErrorCode::TooLarge: return "too-large";
    case ErrorCode::RejectionCap: return "rejection-cap";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Exponent

Exponent::Exponent(double value) : value_(value), infinite_(false) {
  if (std::isnan(value) || value < 1.0) {
    throw Error(ErrorCode::InvalidExponent,
                "norm exponent must be >= 1, got " + std::to_string(value));
  }
  if (std::isinf(value)) {
    value_ = 0.0;
    infinite_ = true;
  }
}

Exponent Exponent::parse(const std::string& text) {
  std::string t;
  for (char ch : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (t == "inf" || t == "infinity" || t == "+inf") return infinity();
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end == nullptr || *end != '\0') {
    throw Error(ErrorCode::InvalidExponent, "cannot parse exponent '" + text + "'");
  }
  return Exponent(v);
}

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

// ---------------------------------------------------------------------------
// Instance

Instance::Instance(Matrix a, Exponent p, Exponent q, std::optional<int> sparsity_t)
    : a_(std::move(a)), p_(p), q_(q), sparsity_t_(sparsity_t) {
  if (a_.rows() < 1 || a_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "instance needs m >= 1 and n >= 1");
  }
  if (!a_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "instance has a non-finite entry");
  }
  if (!(p_ <= q_)) {
    throw Error(ErrorCode::InvalidExponent,
                "need p <= q, got p=" + p_.to_string() + " q=" + q_.to_string());
  }
  if (sparsity_t_) {
    const int t = *sparsity_t_;
    if (t < 1) throw Error(ErrorCode::InvalidArgument, "sparsity t must be positive");
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
      int nnz = 0;
      for (Eigen::Index i = 0; i < a_.rows(); ++i) {
        const double v = a_(i, j);
        if (v != 0.0 && v != 1.0) {
          throw Error(ErrorCode::NonBinary, "sparse instance must have 0/1 entries");
        }
        nnz += (v == 1.0);
      }
      if (nnz > t) {
        throw Error(ErrorCode::InvalidArgument,
                    "column " + std::to_string(j) + " has more than t ones");
      }
    }
  }
}

Instance Instance::with_matrix(Matrix a) const {
  return Instance(std::move(a), p_, q_, std::nullopt);
}

Instance Instance::with_exponents(Exponent p, Exponent q) const {
  return Instance(a_, p, q, sparsity_t_);
}

Instance Instance::select_columns(const std::vector<std::size_t>& idx) const {
  Matrix sub(a_.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    sub.col(static_cast<Eigen::Index>(k)) = a_.col(static_cast<Eigen::Index>(idx[k]));
  }
  return Instance(std::move(sub), p_, q_, std::nullopt);
}

std::uint64_t Instance::fingerprint() const {
  // FNV-1a over shape and raw entries.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t shape[2] = {a_.rows(), a_.cols()};
  eat(shape, sizeof(shape));
  eat(a_.data(), sizeof(double) * static_cast<std::size_t>(a_.size()));
  return h;
}

// ---------------------------------------------------------------------------
// DiscrepancyBody

DiscrepancyBody::DiscrepancyBody(Matrix a_in, Exponent q_in, double radius_in)
    : a(std::move(a_in)), q(q_in), radius(radius_in) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "body radius must be positive");
  }
}

double DiscrepancyBody::value(const Vector& x) const {
  if (x.size() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "body membership: length mismatch");
  }
  return lq_norm(a * x, q);
}

bool DiscrepancyBody::contains(const Vector& x, double tol) const {
  if (is_whole_space()) return true;
  return value(x) <= radius + tol;
}

// ---------------------------------------------------------------------------
// ColoringState

ColoringState ColoringState::zeros(std::size_t n) {
  ColoringState s;
  s.x = Vector::Zero(static_cast<Eigen::Index>(n));
  return s;
}

void ColoringState::refresh_frozen() {
  frozen.clear();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) == 1.0) frozen.push_back(static_cast<std::size_t>(i));
  }
}

std::vector<std::size_t> ColoringState::active() const {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) < 1.0) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

void ColoringState::check(double tol) const {
  std::size_t next = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::abs(x[i]);
    if (!(v <= 1.0 + tol)) {
      throw Error(ErrorCode::InvalidArgument,
                  "coloring coordinate " + std::to_string(i) + " outside [-1,1]");
    }
    const bool listed = next < frozen.size() && frozen[next] == static_cast<std::size_t>(i);
    if (listed) ++next;
    if (listed != (v == 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "frozen set disagrees with coordinate " + std::to_string(i));
    }
  }
  if (next != frozen.size()) {
    throw Error(ErrorCode::InvalidArgument, "frozen set not sorted or out of range");
  }
}

// ---------------------------------------------------------------------------
// Subspace

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)) {
  if (basis_.cols() > basis_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "subspace basis has more columns than rows");
  }
  if (basis_.cols() == 0) return;
  const Matrix gram = basis_.transpose() * basis_;
  const double dev = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    throw Error(ErrorCode::InvalidArgument, "subspace basis is not orthonormal");
  }
}

Subspace Subspace::span_of(const Matrix& spanning, double rank_tol) {
  const Eigen::Index n = spanning.rows();
  if (spanning.cols() == 0) return zero(static_cast<std::size_t>(n));
  Eigen::ColPivHouseholderQR<Matrix> qr(spanning);
  qr.setThreshold(rank_tol);
  const Eigen::Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(n, rank);
  return Subspace(std::move(q), 1e-10);
}

Subspace Subspace::whole(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return Subspace(Matrix::Identity(k, k));
}

Subspace Subspace::zero(std::size_t n) {
  return Subspace(Matrix(static_cast<Eigen::Index>(n), 0));
}

// ---------------------------------------------------------------------------
// SolverConfig

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail("epsilon must lie in (0,1]");
  if (!(proj_tol > 0.0)) fail("proj_tol must be positive");
  if (proj_max_iter < 0) fail("proj_max_iter must be nonnegative");
  if (!(freeze_tol > 0.0)) fail("freeze_tol must be positive");
  if (!(freeze_tol < epsilon)) fail("freeze_tol must be smaller than epsilon");
  if (retry_budget < 0) fail("retry_budget must be nonnegative");
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) fail("target_fraction must lie in (0,1]");
  if (!(radius_constant > 0.0)) fail("radius_constant must be positive");
  if (!(min_round_fraction > 0.0 && min_round_fraction <= 1.0)) fail("min_round_fraction must lie in (0,1]");
  if (max_epsilon_halvings < 0) fail("max_epsilon_halvings must be nonnegative");
}

int SolverConfig::max_iter_for(std::size_t m, std::size_t n) const {
  if (proj_max_iter > 0) return proj_max_iter;
  return static_cast<int>(50 * (m + n));
}

// ---------------------------------------------------------------------------
// Norms and bounds

double lq_norm(const Eigen::Ref<const Vector>& v, Exponent q) {
  if (v.size() == 0) return 0.0;
  const double vmax = v.cwiseAbs().maxCoeff();
  if (q.is_infinite() || vmax == 0.0) return vmax;
  const double qv = q.value();
  if (qv == 1.0) return v.cwiseAbs().sum();
  if (qv == 2.0) {
    if (vmax > 1e-150 && vmax < 1e150) return v.norm();
    return vmax * (v / vmax).norm();
  }
  // Scale by the max entry so large q cannot overflow.
  double acc = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) acc += std::pow(std::abs(v[j]) / vmax, qv);
  return vmax * std::pow(acc, 1.0 / qv);
}

double lq_norm(const Eigen::Ref<const Vector>& v, double q) {
  return lq_norm(v, Exponent(q));
}

double discrepancy(const Instance& inst, const Vector& x, Exponent q) {
  if (static_cast<std::size_t>(x.size()) != inst.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "coloring has length " + std::to_string(x.size()) + ", instance has n=" +
                    std::to_string(inst.cols()));
  }
  return lq_norm(inst.a() * x, q);
}

double bound_exponent(Exponent p, Exponent q) {
  return std::max(0.0, 0.5 - p.reciprocal()) + q.reciprocal();
}

double partial_bound(std::size_t n, std::size_t m, Exponent p, Exponent q, double c) {
  if (n < 1 || n > m) {
    throw Error(ErrorCode::InvalidArgument, "partial_bound needs 1 <= n <= m");
  }
  if (!(p <= q)) throw Error(ErrorCode::InvalidExponent, "partial_bound needs p <= q");
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "bound constant must be positive");
  const double dn = static_cast<double>(n);
  const double log_term = std::log(2.0 * static_cast<double>(m) / dn);
  const double factor = std::min(p.value(), log_term);
  return c * std::sqrt(factor) * std::pow(dn, bound_exponent(p, q));
}

double full_bound(std::size_t n, std::size_t m, Exponent p, Exponent q, double c) {
  const double e = bound_exponent(p, q);
  if (!(e > 0.0)) {
    throw Error(ErrorCode::UnsupportedRegime,
                "full coloring needs max(0,1/2-1/p)+1/q > 0 (p <= 2 with q = inf is excluded)");
  }
  return partial_bound(n, m, p, q, c) / e;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double l2_to_lq_norm_bound(const Matrix& a, Exponent q) {
  // ||v||_q <= ||v||_2 for q >= 2, and <= m^(1/q - 1/2) ||v||_2 below.
  const double s = spectral_norm(a);
  if (q.is_infinite() || q.value() >= 2.0) return s;
  return s * std::pow(static_cast<double>(a.rows()), q.reciprocal() - 0.5);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) noexcept {
  return seed ^ mix64(mix64(mix64(a) ^ b) ^ c);
}

unsigned thread_count() {
  if (const char* env = std::getenv("DISC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace vbal
