#pragma once

// Domain types and norm arithmetic for lp -> lq vector balancing.
//
// An instance is a real m x n matrix A whose columns a_1..a_n are the vectors
// to be balanced. A coloring is x in [-1,1]^n and its discrepancy in the
// lq norm is ||A x||_q.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vbal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  InvalidExponent,
  InvalidArgument,
  DimensionMismatch,
  UnsupportedRegime,
  NonConvergence,
  NoProgress,
  NonBinary,
  TooLarge,
  RejectionCap,
  Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Norm exponent in [1, inf]. Infinity is a dedicated state, never a large
/// finite number, and its reciprocal is exactly zero.
class Exponent {
 public:
  /// Throws InvalidExponent unless value >= 1 (value may be +inf).
  explicit Exponent(double value);
  static Exponent infinity() { return Exponent(Tag{}); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; +inf for the infinite exponent.
  double value() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }
  /// 1/p with 1/inf := 0.
  double reciprocal() const noexcept { return infinite_ ? 0.0 : 1.0 / value_; }

  /// Accepts "inf", "infinity" or a decimal >= 1.
  static Exponent parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const Exponent& a, const Exponent& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend bool operator<=(const Exponent& a, const Exponent& b) {
    return b.infinite_ || (!a.infinite_ && a.value_ <= b.value_);
  }

 private:
  struct Tag {};
  explicit Exponent(Tag) : value_(0.0), infinite_(true) {}
  double value_;
  bool infinite_;
};

/// The columns of `a` are the vectors a_1..a_n; p is the declared column
/// norm, q the target norm.
class Instance {
 public:
  Instance(Matrix a, Exponent p, Exponent q,
           std::optional<int> sparsity_t = std::nullopt);

  const Matrix& a() const noexcept { return a_; }
  Exponent p() const noexcept { return p_; }
  Exponent q() const noexcept { return q_; }
  std::optional<int> sparsity_t() const noexcept { return sparsity_t_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(a_.cols()); }

  /// Same p, q and sparsity with a different matrix of the same shape
  /// class; used by the column-stretching and submatrix operations.
  Instance with_matrix(Matrix a) const;
  Instance with_exponents(Exponent p, Exponent q) const;
  /// Columns restricted to `idx`, in that order. Sparsity is dropped.
  Instance select_columns(const std::vector<std::size_t>& idx) const;

  /// 64-bit content hash, used to derive reproducible RNG streams.
  std::uint64_t fingerprint() const;

 private:
  Matrix a_;
  Exponent p_;
  Exponent q_;
  std::optional<int> sparsity_t_;
};

/// {x : ||A x||_q <= radius}. A radius of +inf denotes the whole space.
struct DiscrepancyBody {
  Matrix a;
  Exponent q{Exponent::infinity()};
  double radius = 1.0;

  DiscrepancyBody(Matrix a_in, Exponent q_in, double radius_in);
  DiscrepancyBody(const Instance& inst, double radius_in)
      : DiscrepancyBody(inst.a(), inst.q(), radius_in) {}

  bool is_whole_space() const noexcept {
    return radius == std::numeric_limits<double>::infinity();
  }
  double value(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const;
};

/// A fractional coloring x in [-1,1]^n together with the coordinates that
/// sit exactly at +-1.
struct ColoringState {
  Vector x;
  std::vector<std::size_t> frozen;
  int round = 0;

  static ColoringState zeros(std::size_t n);
  /// Recomputes `frozen` from |x_i| == 1.
  void refresh_frozen();
  std::vector<std::size_t> active() const;
  /// Throws InvalidArgument if |x_i| > 1 + tol or frozen disagrees with x.
  void check(double tol = 1e-9) const;
};

/// Linear subspace H given by an orthonormal basis (n x k, k may be 0).
class Subspace {
 public:
  /// Throws InvalidArgument if basis^T basis deviates from I by more than tol.
  explicit Subspace(Matrix basis, double tol = 1e-10);
  /// Orthonormalizes the column span of `spanning` (rank-revealing QR).
  static Subspace span_of(const Matrix& spanning, double rank_tol = 1e-10);
  static Subspace whole(std::size_t n);
  static Subspace zero(std::size_t n);

  const Matrix& basis() const noexcept { return basis_; }
  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }

 private:
  Matrix basis_;
};

struct SolverConfig {
  double epsilon = 0.1;           // cube half-width
  double proj_tol = 1e-7;
  int proj_max_iter = 0;          // 0: use 50 * (m + n)
  double freeze_tol = 1e-6;
  int retry_budget = 8;
  double target_fraction = 0.5;
  double radius_constant = 1.0;
  std::uint64_t seed = 0;
  double min_round_fraction = 0.05;  // per-round freeze quota of active coords
  int max_epsilon_halvings = 3;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
  int max_iter_for(std::size_t m, std::size_t n) const;
};

double lq_norm(const Eigen::Ref<const Vector>& v, Exponent q);
double lq_norm(const Eigen::Ref<const Vector>& v, double q);

/// ||A x||_q.
double discrepancy(const Instance& inst, const Vector& x, Exponent q);

/// max(0, 1/2 - 1/p) + 1/q.
double bound_exponent(Exponent p, Exponent q);

/// C * sqrt(min(p, ln(2m/n))) * n^(max(0, 1/2 - 1/p) + 1/q).
double partial_bound(std::size_t n, std::size_t m, Exponent p, Exponent q,
                     double c);

/// partial_bound / (max(0, 1/2 - 1/p) + 1/q). Throws UnsupportedRegime when
/// the exponent vanishes (p <= 2 and q = inf).
double full_bound(std::size_t n, std::size_t m, Exponent p, Exponent q,
                  double c);

/// Largest singular value of `a`.
double spectral_norm(const Matrix& a);

/// A constant L with ||A v||_q <= L ||v||_2 for all v.
double l2_to_lq_norm_bound(const Matrix& a, Exponent q);

/// SplitMix64 finalizer; the building block for all derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0) noexcept;

/// Worker count: DISC_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

}  // namespace vbal
