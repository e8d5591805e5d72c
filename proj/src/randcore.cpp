#include "randsat/randcore.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace randsat {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeedStream SeedStream::derive(std::uint64_t sub) const {
  return SeedStream{master_seed, mix64(stream_index * 0x100000001b3ULL ^ mix64(sub + 1))};
}

std::mt19937_64 SeedStream::engine() const {
  const std::uint64_t a = mix64(master_seed);
  const std::uint64_t b = mix64(a ^ mix64(stream_index));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

LinearMap::LinearMap(Matrix entries, Provenance provenance)
    : entries_(std::move(entries)), provenance_(provenance) {
  if (!entries_.allFinite()) throw std::invalid_argument("LinearMap: non-finite entry");
}

Subspace Subspace::from_orthonormal(Matrix frame) {
  if (frame.cols() > frame.rows()) throw std::invalid_argument("Subspace: more columns than ambient dimension");
  if (orthogonality_residual(frame) > 1e-10) throw PreconditionViolation("Subspace: frame is not orthonormal");
  return Subspace(std::move(frame));
}

Subspace Subspace::span_of(const Matrix& spanning, double rank_tol) {
  if (spanning.cols() == 0) return Subspace(Matrix(spanning.rows(), 0));
  Eigen::ColPivHouseholderQR<Matrix> qr(spanning);
  qr.setThreshold(rank_tol);
  const Eigen::Index r = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(spanning.rows(), r);
  return Subspace(std::move(q));
}

Subspace Subspace::coordinate(Eigen::Index ambient, const std::vector<Eigen::Index>& indices) {
  Matrix f = Matrix::Zero(ambient, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (indices[c] < 0 || indices[c] >= ambient) throw std::invalid_argument("Subspace::coordinate: index out of range");
    f(indices[c], static_cast<Eigen::Index>(c)) = 1.0;
  }
  return from_orthonormal(std::move(f));
}

Subspace Subspace::rotated(const Matrix& u) const {
  if (u.cols() != ambient_dim()) throw std::invalid_argument("Subspace::rotated: dimension mismatch");
  return Subspace(u * frame_);
}

LinearMap sample_gaussian(Eigen::Index rows, Eigen::Index cols, double variance, const SeedStream& seed) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("sample_gaussian: zero dimension");
  if (!(variance > 0.0)) throw std::invalid_argument("sample_gaussian: variance must be positive");
  auto rng = seed.engine();
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  return LinearMap(std::move(m), Provenance::gaussian);
}

LinearMap haar_rotation(Eigen::Index n, const SeedStream& seed) {
  if (n <= 0) throw std::invalid_argument("haar_rotation: n must be positive");
  const Matrix g = sample_gaussian(n, n, 1.0, seed).matrix();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return LinearMap(std::move(q), Provenance::orthogonal);
}

Subspace haar_subspace(Eigen::Index n, Eigen::Index m, const SeedStream& seed) {
  if (m <= 0 || m > n) throw std::invalid_argument("haar_subspace: need 1 <= m <= n");
  const Matrix u = haar_rotation(n, seed).matrix();
  return Subspace::from_orthonormal(u.leftCols(m));
}

RotationStats rotation_stats(const Matrix& u) {
  if (u.rows() != u.cols() || u.rows() == 0) throw std::invalid_argument("rotation_stats: u must be square");
  if (orthogonality_residual(u) > 1e-8) throw PreconditionViolation("rotation_stats: u is not orthogonal");
  const double n = static_cast<double>(u.rows());
  RotationStats s;
  s.trace = u.trace();
  if (s.trace < 0.0) {
    s.trace = -s.trace;
    s.sign_flipped = true;
  }
  s.alpha = std::clamp((n - s.trace) / n, 0.0, 1.0);
  s.hs_dist_to_identity = std::sqrt(std::max(0.0, 2.0 * (n - s.trace)));
  return s;
}

std::vector<double> singular_values(const Matrix& a) {
  if (a.size() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

double min_singular_value(const Matrix& a) {
  const auto s = singular_values(a);
  return s.empty() ? 0.0 : s.back();
}

double operator_norm(const Matrix& a) {
  const auto s = singular_values(a);
  return s.empty() ? 0.0 : s.front();
}

Vector project(const Subspace& s, const Vector& x) {
  if (x.size() != s.ambient_dim()) throw std::invalid_argument("project: dimension mismatch");
  return s.frame() * (s.frame().transpose() * x);
}

Subspace subspace_sum(const Subspace& s1, const Subspace& s2) {
  if (s1.ambient_dim() != s2.ambient_dim()) throw std::invalid_argument("subspace_sum: ambient dimension mismatch");
  Matrix both(s1.ambient_dim(), s1.dim() + s2.dim());
  both << s1.frame(), s2.frame();
  return Subspace::span_of(both);
}

double orthogonality_residual(const Matrix& a) {
  if (a.cols() == 0) return 0.0;
  return (a.transpose() * a - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
}

Vector random_unit_vector(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  double norm = 0.0;
  while (norm < 1e-300) {
    for (Eigen::Index i = 0; i < d; ++i) v(i) = normal(rng);
    norm = v.norm();
  }
  return v / norm;
}

Matrix perturb_rotation(const Matrix& u, double t, const SeedStream& seed) {
  const Eigen::Index n = u.rows();
  const Matrix g = sample_gaussian(n, n, 1.0, seed).matrix();
  Matrix skew = g - g.transpose();
  const double norm = operator_norm(skew);
  if (norm > 0.0) skew *= t / norm;
  const Matrix step = skew.exp();
  return u * step;
}

}  // namespace randsat
