#pragma once

// Brute-force reference computations used by the tests.  They only use plain
// Eigen arithmetic, never the Body evaluator.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// max over sampled unit w of <M w, y>, for M with 1 or 2 columns.
inline double sampled_ellipse_support(const Matrix& m, const Vector& y) {
  if (m.cols() == 1) return std::abs(m.col(0).dot(y));
  const int count = 4000;
  double best = 0.0;
  const Vector z = m.transpose() * y;
  for (int i = 0; i < count; ++i) {
    const double t = 2 * std::numbers::pi * i / count;
    best = std::max(best, z(0) * std::cos(t) + z(1) * std::sin(t));
  }
  return best;
}

/// sup of <sum t_i z_i, y> over z_i in M_i(B_2) and t >= 0 with sum t_i^p = 1,
/// for one to three parts, by gridding the p-sphere.
inline double pconv_support(double p, const std::vector<Matrix>& parts, const Vector& y) {
  std::vector<double> h;
  for (const auto& m : parts) h.push_back(sampled_ellipse_support(m, y));
  auto tp = [p](double c) { return std::pow(std::abs(c), 2.0 / p); };
  double best = 0.0;
  if (h.size() == 1) return h[0];
  if (h.size() == 2) {
    const int count = 20000;
    for (int i = 0; i <= count; ++i) {
      const double a = (std::numbers::pi / 2) * i / count;
      best = std::max(best, tp(std::cos(a)) * h[0] + tp(std::sin(a)) * h[1]);
    }
    return best;
  }
  const int count = 600;
  for (int i = 0; i <= count; ++i) {
    const double a = (std::numbers::pi / 2) * i / count;
    for (int j = 0; j <= count; ++j) {
      const double b = (std::numbers::pi / 2) * j / count;
      const double c0 = std::sin(a) * std::cos(b), c1 = std::sin(a) * std::sin(b), c2 = std::cos(a);
      best = std::max(best, tp(c0) * h[0] + tp(c1) * h[1] + tp(c2) * h[2]);
    }
  }
  return best;
}

/// max of f over `count` unit directions frame * (cos t, sin t), t in [0, pi).
inline double plane_grid_max(const std::function<double(const Vector&)>& f, const Matrix& frame, int count) {
  double best = -1.0;
  for (int i = 0; i < count; ++i) {
    const double t = std::numbers::pi * i / count;
    const Vector y = frame.col(0) * std::cos(t) + frame.col(1) * std::sin(t);
    best = std::max(best, f(y));
  }
  return best;
}

}  // namespace oracle
