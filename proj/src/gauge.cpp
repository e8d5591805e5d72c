#include "randsat/inclusion.hpp"
#include "randsat/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace randsat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DualObjective {
  const Body& body;
  const Vector& x;
  double radius;

  double operator()(const Vector& y) const {
    const double h = body.support(y);
    const double ip = x.dot(y);
    if (h <= 1e-13 * radius) return ip > 1e-13 * x.norm() ? kInf : 0.0;
    return ip / h;
  }
};

double ascend(const DualObjective& f, Vector& y, int iterations) {
  double val = f(y);
  if (std::isinf(val)) return val;
  double step = 0.5;
  for (int it = 0; it < iterations && step > 1e-12; ++it) {
    const double h = f.body.support(y);
    if (h <= 0.0) break;
    Vector g = (f.x - val * f.body.support_point(y)) / h;
    g -= g.dot(y) * y;
    const double gn = g.norm();
    if (gn < 1e-15) break;
    bool improved = false;
    while (step > 1e-12) {
      Vector cand = y + (step / gn) * g;
      cand.normalize();
      const double vc = f(cand);
      if (vc > val) {
        y = cand;
        val = vc;
        improved = true;
        step = std::min(step * 1.5, 2.0);
        break;
      }
      step *= 0.5;
    }
    if (!improved || std::isinf(val)) break;
  }
  return val;
}

// max <x,y> s.t. |<v,y>| <= 1 for v in cuts, |y_i| <= box.
lp::Result relaxed_polar_lp(const Vector& x, const std::vector<Vector>& cuts, double box) {
  const Eigen::Index d = x.size();
  const auto nc = static_cast<Eigen::Index>(cuts.size());
  Matrix a = Matrix::Zero(2 * nc + 2 * d, 2 * d);
  Vector b(2 * nc + 2 * d);
  for (Eigen::Index i = 0; i < nc; ++i) {
    const Vector& v = cuts[static_cast<std::size_t>(i)];
    a.block(2 * i, 0, 1, d) = v.transpose();
    a.block(2 * i, d, 1, d) = -v.transpose();
    a.block(2 * i + 1, 0, 1, d) = -v.transpose();
    a.block(2 * i + 1, d, 1, d) = v.transpose();
    b(2 * i) = 1.0;
    b(2 * i + 1) = 1.0;
  }
  for (Eigen::Index i = 0; i < 2 * d; ++i) {
    a(2 * nc + i, i) = 1.0;
    b(2 * nc + i) = box;
  }
  Vector c(2 * d);
  c << x, -x;
  return lp::maximize(c, a, b);
}

// Near-duplicate rows make the tableau ill-conditioned; they never tighten
// the relaxation, so they are dropped.
bool add_cut(std::vector<Vector>& cuts, Vector v) {
  const double tol = 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff());
  for (const auto& c : cuts)
    if ((c - v).cwiseAbs().maxCoeff() <= tol || (c + v).cwiseAbs().maxCoeff() <= tol) return false;
  cuts.push_back(std::move(v));
  return true;
}

}  // namespace

GaugeInterval gauge(const Body& body, const Vector& x, double tol, const Budget& budget) {
  const Eigen::Index d = body.dim();
  if (x.size() != d) throw std::invalid_argument("gauge: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("gauge: tol must be positive");
  GaugeInterval out;
  const double xn = x.norm();
  if (xn == 0.0) {
    out.maximizer = Vector::Zero(d);
    return out;
  }
  const double radius = body.circumradius_bound();
  if (radius <= 0.0) {
    out.lower = out.upper = kInf;
    out.infinite = true;
    return out;
  }
  DualObjective f{body, x, radius};

  // Lower end: ascent from x/|x| plus random restarts.
  auto rng = budget.seed.engine();
  std::vector<Vector> starts{x / xn};
  const int restarts = d <= 3 ? std::min(budget.starts, 8) : std::min(budget.starts, 6);
  for (int s = 0; s < restarts; ++s) starts.push_back(random_unit_vector(d, rng));
  double lower = -kInf;
  Vector best = x / xn;
  std::vector<Vector> cuts;
  for (auto y : starts) {
    const double v = ascend(f, y, budget.ascent_iterations);
    if (v > lower) {
      lower = v;
      best = y;
    }
    add_cut(cuts, body.support_point(y));
  }
  if (std::isinf(lower)) {
    out.lower = out.upper = kInf;
    out.infinite = true;
    out.maximizer = best;
    return out;
  }
  for (Eigen::Index i = 0; i < d; ++i) add_cut(cuts, body.support_point(Vector::Unit(d, i)));

  // Upper end: Kelley cutting planes on the polar body.
  const double box = 1e7 / radius;
  const int max_iter = d <= 3 ? 400 : 60;
  double upper = kInf;
  Vector y_lp;
  int it = 0;
  for (; it < max_iter; ++it) {
    const lp::Result r = relaxed_polar_lp(x, cuts, box);
    if (r.status != lp::Status::optimal) break;
    y_lp = r.z.head(d) - r.z.tail(d);
    upper = std::min(upper, r.value);
    const double h = body.support(y_lp);
    const double ip = x.dot(y_lp);
    if (h <= 1e-13 * radius * std::max(1.0, y_lp.norm())) {
      if (y_lp.cwiseAbs().maxCoeff() >= 0.99 * box && ip > 0.0) {
        out.lower = out.upper = kInf;
        out.infinite = true;
        out.maximizer = y_lp.normalized();
        out.iterations = it + 1;
        return out;
      }
    } else if (ip / h > lower) {
      lower = ip / h;
      best = y_lp.normalized();
    }
    if (upper <= lower * (1.0 + tol)) break;
    if (!add_cut(cuts, body.support_point(y_lp))) break;
  }
  // A relaxation value pinned at the box means some direction is unconstrained.
  if (y_lp.size() == d && y_lp.cwiseAbs().maxCoeff() >= 0.99 * box && upper > 1e6 * lower) {
    Vector probe = y_lp.normalized();
    if (body.support(probe) <= 1e-9 * radius && x.dot(probe) > 0.0) {
      out.lower = out.upper = kInf;
      out.infinite = true;
      out.maximizer = probe;
      out.iterations = it;
      return out;
    }
  }
  out.lower = lower;
  out.upper = std::max(upper, lower);
  out.maximizer = best;
  out.iterations = it;
  return out;
}

}  // namespace randsat
