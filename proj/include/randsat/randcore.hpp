#pragma once

// Seeded Gaussian / Haar sampling and the small dense linear algebra shared by
// every other module.  Everything here is a pure function of its inputs.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace randsat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

/// A caller broke an operation's stated precondition (e.g. non-orthogonal u).
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A random instance landed on a probability-zero degenerate configuration.
class DegenerateInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Should be unreachable for valid inputs; indicates a bug or a broken invariant.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

/// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t x);

/// Counter-style stream identifier.  Identical (master_seed, stream_index)
/// pairs produce identical engines.
struct SeedStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// Child stream; children with distinct `sub` never share engine state.
  [[nodiscard]] SeedStream derive(std::uint64_t sub) const;
  [[nodiscard]] std::mt19937_64 engine() const;

  friend bool operator==(const SeedStream&, const SeedStream&) = default;
};

// ---------------------------------------------------------------------------
// Linear maps and subspaces
// ---------------------------------------------------------------------------

enum class Provenance { gaussian, orthogonal, derived };

/// Dense real matrix tagged with where it came from.
class LinearMap {
 public:
  LinearMap() = default;
  explicit LinearMap(Matrix entries, Provenance provenance = Provenance::derived);

  [[nodiscard]] Eigen::Index rows() const { return entries_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return entries_.cols(); }
  [[nodiscard]] const Matrix& matrix() const { return entries_; }
  [[nodiscard]] Provenance provenance() const { return provenance_; }

 private:
  Matrix entries_;
  Provenance provenance_ = Provenance::derived;
};

/// Orthonormal frame (columns) in R^ambient_dim.
class Subspace {
 public:
  Subspace() = default;

  /// Takes a frame that is already orthonormal; checked to 1e-10.
  static Subspace from_orthonormal(Matrix frame);
  /// Orthonormal basis of the column span of `spanning`, dropping directions
  /// with relative pivot below `rank_tol`.
  static Subspace span_of(const Matrix& spanning, double rank_tol = 1e-10);
  /// span(e_i : i in indices) in R^ambient.
  static Subspace coordinate(Eigen::Index ambient, const std::vector<Eigen::Index>& indices);

  [[nodiscard]] Eigen::Index ambient_dim() const { return frame_.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return frame_.cols(); }
  [[nodiscard]] const Matrix& frame() const { return frame_; }
  /// Matrix of the orthogonal projection P_S.
  [[nodiscard]] Matrix projector() const { return frame_ * frame_.transpose(); }
  /// u(S) for an orthogonal u.
  [[nodiscard]] Subspace rotated(const Matrix& u) const;

 private:
  explicit Subspace(Matrix frame) : frame_(std::move(frame)) {}
  Matrix frame_;
};

struct RotationStats {
  double alpha = 0.0;                ///< (n - tr u)/n after sign normalization, in [0,1]
  double hs_dist_to_identity = 0.0;  ///< ||Id - u||_HS after sign normalization
  double trace = 0.0;                ///< tr u after sign normalization
  bool sign_flipped = false;         ///< true when the stats describe -u
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// i.i.d. N(0, variance) entries, filled column by column from one stream.
LinearMap sample_gaussian(Eigen::Index rows, Eigen::Index cols, double variance, const SeedStream& seed);

/// Haar-distributed element of O(n): QR of a standard Gaussian matrix with the
/// diagonal of R made positive.
LinearMap haar_rotation(Eigen::Index n, const SeedStream& seed);

/// Random m-dimensional subspace of R^n (first m columns of a Haar rotation).
Subspace haar_subspace(Eigen::Index n, Eigen::Index m, const SeedStream& seed);

/// alpha = tr(Id - u)/n with the u -> -u normalization when tr u < 0.
RotationStats rotation_stats(const Matrix& u);

/// Descending singular values, length min(rows, cols).
std::vector<double> singular_values(const Matrix& a);
inline std::vector<double> singular_values(const LinearMap& a) { return singular_values(a.matrix()); }

double min_singular_value(const Matrix& a);
double operator_norm(const Matrix& a);

/// P_S x.
Vector project(const Subspace& s, const Vector& x);

/// Orthonormal frame of span(S1 u S2).
Subspace subspace_sum(const Subspace& s1, const Subspace& s2);

/// max_ij |(A^T A - I)_ij|.
double orthogonality_residual(const Matrix& a);

/// Uniform point on S^{d-1} (normalized Gaussian).
Vector random_unit_vector(Eigen::Index d, std::mt19937_64& rng);

/// exp(t * S) for a random skew-symmetric S with ||S||_op = 1, composed with u;
/// gives a rotation at operator distance <= t from u.
Matrix perturb_rotation(const Matrix& u, double t, const SeedStream& seed);

}  // namespace randsat
