#include "randsat/lp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace randsat::lp {

Result maximize(const Vector& c, const Matrix& a, const Vector& b, int max_pivots) {
  const Eigen::Index m = a.rows();
  const Eigen::Index nv = a.cols();
  if (c.size() != nv || b.size() != m) throw std::invalid_argument("lp::maximize: dimension mismatch");
  if (m > 0 && b.minCoeff() < 0.0) throw std::invalid_argument("lp::maximize: b must be non-negative");

  constexpr double eps = 1e-11;
  const Eigen::Index width = nv + m + 1;
  Matrix t = Matrix::Zero(m + 1, width);
  t.topLeftCorner(m, nv) = a;
  t.block(0, nv, m, m).setIdentity();
  t.col(width - 1).head(m) = b;
  t.row(m).head(nv) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = nv + i;

  Result res;
  bool bland = false;
  int degenerate_run = 0;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    Eigen::Index enter = -1;
    double best = -eps;
    for (Eigen::Index j = 0; j < width - 1; ++j) {
      const double rc = t(m, j);
      if (bland) {
        if (rc < -eps) {
          enter = j;
          break;
        }
      } else if (rc < best) {
        best = rc;
        enter = j;
      }
    }
    if (enter < 0) {
      res.status = Status::optimal;
      break;
    }
    Eigen::Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double piv = t(i, enter);
      if (piv <= eps) continue;
      const double r = t(i, width - 1) / piv;
      if (r < ratio - 1e-14 ||
          (r <= ratio + 1e-14 && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave < 0) {
      res.status = Status::unbounded;
      break;
    }
    if (ratio <= 1e-14) {
      if (++degenerate_run > 50) bland = true;
    } else {
      degenerate_run = 0;
    }
    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  res.z = Vector::Zero(nv);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index v = basis[static_cast<std::size_t>(i)];
    if (v < nv) res.z(v) = t(i, width - 1);
  }
  res.value = c.dot(res.z);
  if (res.status == Status::optimal && m > 0) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if ((a * res.z - b).maxCoeff() > 1e-9 * scale || res.z.minCoeff() < -1e-9 * scale) res.status = Status::numerical_failure;
  }
  return res;
}

}  // namespace randsat::lp
