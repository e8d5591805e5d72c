#include "randsat/inclusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace randsat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenerate = 1e-13;

struct RatioEval {
  const Body& a;
  const Body& b;
  double ra;
  double rb;
  int count = 0;

  RatioEval(const Body& a_, const Body& b_) : a(a_), b(b_), ra(a_.circumradius_bound()), rb(b_.circumradius_bound()) {}

  double operator()(const Vector& y) {
    ++count;
    const double ha = a.support(y);
    const double hb = b.support(y);
    if (hb <= kDegenerate * std::max(rb, 1e-300)) return ha > kDegenerate * std::max(ra, 1e-300) ? kInf : 0.0;
    return ha / hb;
  }
};

// Projected gradient ascent of h_A/h_B on the unit sphere.
double ascend(RatioEval& f, Vector& y, int iterations) {
  double r = f(y);
  if (std::isinf(r)) return r;
  double step = 0.5;
  for (int it = 0; it < iterations && step > 1e-10; ++it) {
    const double hb = f.b.support(y);
    if (hb <= 0.0) break;
    Vector g = (f.a.support_point(y) - r * f.b.support_point(y)) / hb;
    g -= g.dot(y) * y;
    const double gn = g.norm();
    if (gn < 1e-14) break;
    bool improved = false;
    while (step > 1e-10) {
      Vector cand = y + (step / gn) * g;
      cand.normalize();
      const double rc = f(cand);
      if (rc > r) {
        y = cand;
        r = rc;
        improved = true;
        step = std::min(step * 1.5, 2.0);
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    if (std::isinf(r)) break;
  }
  return r;
}

}  // namespace

std::string to_string(Certification c) {
  return c == Certification::grid_exhaustive ? "grid-exhaustive" : "multistart-heuristic";
}

Matrix polar_grid(Eigen::Index d, double pitch) {
  if (!(pitch > 0.0)) throw std::invalid_argument("polar_grid: pitch must be positive");
  if (d == 1) return Matrix::Ones(1, 1);
  if (d == 2) {
    const auto count = static_cast<Eigen::Index>(std::ceil(std::numbers::pi / pitch));
    Matrix g(2, count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const double t = std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      g(0, i) = std::cos(t);
      g(1, i) = std::sin(t);
    }
    return g;
  }
  if (d == 3) {
    std::vector<Eigen::Vector3d> pts;
    const auto rings = static_cast<int>(std::ceil((std::numbers::pi / 2) / pitch));
    for (int i = 0; i <= rings; ++i) {
      const double phi = (std::numbers::pi / 2) * static_cast<double>(i) / rings;
      const int around = std::max(1, static_cast<int>(std::ceil(2 * std::numbers::pi * std::sin(phi) / pitch)));
      for (int k = 0; k < around; ++k) {
        const double th = 2 * std::numbers::pi * static_cast<double>(k) / around;
        pts.emplace_back(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi));
      }
    }
    Matrix g(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) g.col(static_cast<Eigen::Index>(i)) = pts[i];
    return g;
  }
  throw std::invalid_argument("polar_grid: only dimensions 1..3 are gridded");
}

RatioMaximum maximize_support_ratio(const Body& a, const Body& b, const Budget& budget, bool exhaustive_grid,
                                    const std::vector<Vector>& hints) {
  const Eigen::Index d = a.dim();
  if (b.dim() != d) throw std::invalid_argument("maximize_support_ratio: dimension mismatch");
  RatioEval f(a, b);
  RatioMaximum best;
  best.ratio = -1.0;

  auto consider = [&](const Vector& y, double r) {
    if (r > best.ratio) {
      best.ratio = r;
      best.direction = y;
    }
  };

  std::vector<Vector> starts;
  if (exhaustive_grid) {
    const Matrix grid = polar_grid(d, d == 3 ? budget.grid_pitch_3d : budget.grid_pitch);
    std::vector<std::pair<double, Eigen::Index>> scored;
    scored.reserve(static_cast<std::size_t>(grid.cols()));
    for (Eigen::Index i = 0; i < grid.cols(); ++i) {
      const Vector y = grid.col(i);
      const double r = f(y);
      consider(y, r);
      scored.emplace_back(r, i);
    }
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(std::max(budget.refine_top, 0)), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top), scored.end(),
                      [](const auto& l, const auto& r) { return l.first > r.first; });
    for (std::size_t i = 0; i < top; ++i) starts.push_back(grid.col(scored[i].second));
  } else {
    auto rng = budget.seed.engine();
    for (int s = 0; s < budget.starts; ++s) starts.push_back(random_unit_vector(d, rng));
  }
  for (const auto& h : hints) {
    if (h.size() == d && h.norm() > 0.0) starts.push_back(h.normalized());
  }
  if (d > 1) {
    for (auto y : starts) {
      if (std::isinf(best.ratio)) break;
      const double r = ascend(f, y, budget.ascent_iterations);
      consider(y, r);
    }
  } else if (starts.empty()) {
    const Vector y = Vector::Ones(1);
    consider(y, f(y));
  }
  best.ratio = std::max(best.ratio, 0.0);
  best.evaluations = f.count;
  return best;
}

InclusionReport check_inclusion(const Body& a, const Body& b, const std::optional<Subspace>& restrict_to,
                                double scale, const Budget& budget) {
  if (!(scale > 0.0)) throw std::invalid_argument("check_inclusion: scale must be positive");
  if (a.dim() != b.dim()) throw std::invalid_argument("check_inclusion: dimension mismatch");
  InclusionReport rep;
  if (restrict_to && restrict_to->dim() == 0) {
    rep.holds = true;
    rep.certification = Certification::grid_exhaustive;
    return rep;
  }
  const Body ra = restrict_to ? a.restricted(*restrict_to) : a;
  const Body rb = restrict_to ? b.restricted(*restrict_to) : b;
  const Eigen::Index d = ra.dim();
  const bool grid = d <= 3;
  const RatioMaximum m = maximize_support_ratio(ra, rb, budget, grid);
  rep.measured_ratio = m.ratio / scale;
  rep.holds = rep.measured_ratio <= 1.0 + budget.tol;
  rep.certification = grid ? Certification::grid_exhaustive : Certification::multistart_heuristic;
  rep.directions_used = m.evaluations;
  rep.pitch = grid ? (d == 3 ? budget.grid_pitch_3d : (d == 2 ? budget.grid_pitch : 0.0)) : 0.0;
  rep.argmax = restrict_to ? Vector(restrict_to->frame() * m.direction) : m.direction;
  return rep;
}

SectionConstant section_isomorphism_constant(const Body& body, const Subspace& s, const Body& reference,
                                             const Budget& budget) {
  if (body.dim() != s.ambient_dim() || reference.dim() != s.ambient_dim())
    throw std::invalid_argument("section_isomorphism_constant: dimension mismatch");
  SectionConstant out;
  out.outer = check_inclusion(body, reference, s, 1.0, budget);
  Budget inner_budget = budget;
  inner_budget.seed = budget.seed.derive(1);
  out.inner = check_inclusion(reference, body, std::nullopt, 1.0, inner_budget);
  out.lower = 1.0;
  out.upper = std::max(1.0, out.outer.measured_ratio * std::max(1.0, out.inner.measured_ratio));
  return out;
}

}  // namespace randsat
