#include "randsat/body.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randsat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_dim(const Vector& y, Eigen::Index d) {
  if (y.size() != d) throw std::invalid_argument("support: dimension mismatch");
}

// |M^T y| without a temporary.
double ellipsoid_support(const Matrix& m, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double t = m.col(c).dot(y);
    s += t * t;
  }
  return std::sqrt(s);
}

double dual_lr_norm(const Vector& z, double r) {
  const double rp = conjugate_exponent(r);
  return lq_norm(z.cwiseAbs(), rp);
}

Vector dual_lr_gradient(const Vector& z, double r) {
  const Eigen::Index d = z.size();
  Vector x = Vector::Zero(d);
  if (std::isinf(r)) {
    for (Eigen::Index i = 0; i < d; ++i) x(i) = z(i) > 0 ? 1.0 : (z(i) < 0 ? -1.0 : 0.0);
    return x;
  }
  if (r == 1.0) {
    Eigen::Index imax = 0;
    z.cwiseAbs().maxCoeff(&imax);
    x(imax) = z(imax) >= 0 ? 1.0 : -1.0;
    return x;
  }
  const double rp = conjugate_exponent(r);
  const double nrm = lq_norm(z.cwiseAbs(), rp);
  if (nrm == 0.0) return x;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double a = std::abs(z(i)) / nrm;
    x(i) = (z(i) >= 0 ? 1.0 : -1.0) * std::pow(a, rp - 1.0);
  }
  return x;
}

}  // namespace

double conjugate_exponent(double p) {
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double lq_norm(const Vector& v, double q) {
  if (v.size() == 0) return 0.0;
  const double m = v.maxCoeff();
  if (std::isinf(q) || m == 0.0) return m;
  if (q == 1.0) return v.sum();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(v(i) / m, q);
  return m * std::pow(s, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

Body Body::euclidean_ball(Eigen::Index dim, double radius) {
  if (dim <= 0 || !(radius >= 0.0)) throw std::invalid_argument("euclidean_ball: bad dimension or radius");
  return Body(std::make_shared<BodyNode>(BodyNode{EuclideanBallNode{radius, dim, std::nullopt}}));
}

Body Body::euclidean_ball(const Subspace& s, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("euclidean_ball: bad radius");
  return Body(std::make_shared<BodyNode>(BodyNode{EuclideanBallNode{radius, s.ambient_dim(), s}}));
}

Body Body::ellipsoid_image(Matrix map) {
  if (map.rows() == 0) throw std::invalid_argument("ellipsoid_image: empty map");
  return Body(std::make_shared<BodyNode>(BodyNode{EllipsoidImageNode{std::move(map)}}));
}

Body Body::lr_ball(Eigen::Index dim, double r) {
  if (dim <= 0 || !(r >= 1.0)) throw std::invalid_argument("lr_ball: need dim >= 1 and r >= 1");
  return Body(std::make_shared<BodyNode>(BodyNode{BaseNormNode{BaseKind::lr_ball, dim, r, Matrix()}}));
}

Body Body::polytope(Matrix vertices) {
  if (vertices.rows() == 0 || vertices.cols() == 0) throw std::invalid_argument("polytope: empty vertex list");
  const Eigen::Index d = vertices.rows();
  return Body(std::make_shared<BodyNode>(BodyNode{BaseNormNode{BaseKind::polytope, d, 0.0, std::move(vertices)}}));
}

Body Body::p_convex_hull(double p, std::vector<Body> parts, Eigen::Index dim) {
  if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("p_convex_hull: p must lie in [1, inf)");
  for (const auto& b : parts)
    if (b.dim() != dim) throw std::invalid_argument("p_convex_hull: part dimension mismatch");
  return Body(std::make_shared<BodyNode>(BodyNode{PConvexHullNode{p, std::move(parts), dim}}));
}

Body Body::minkowski_sum(std::vector<Body> parts) {
  if (parts.empty()) throw std::invalid_argument("minkowski_sum: no parts");
  const Eigen::Index d = parts.front().dim();
  for (const auto& b : parts)
    if (b.dim() != d) throw std::invalid_argument("minkowski_sum: part dimension mismatch");
  return Body(std::make_shared<BodyNode>(BodyNode{MinkowskiSumNode{std::move(parts), d}}));
}

Body Body::linear_image(Matrix map, Body inner) {
  if (map.cols() != inner.dim()) throw std::invalid_argument("linear_image: dimension mismatch");
  return Body(std::make_shared<BodyNode>(BodyNode{LinearImageNode{std::move(map), std::move(inner)}}));
}

Body Body::rotated(Matrix u, Body inner) {
  if (u.rows() != u.cols() || u.cols() != inner.dim()) throw std::invalid_argument("rotated: dimension mismatch");
  return Body(std::make_shared<BodyNode>(BodyNode{RotatedNode{std::move(u), std::move(inner)}}));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Eigen::Index Body::dim() const {
  return std::visit(overloaded{
                        [](const EuclideanBallNode& n) { return n.dim; },
                        [](const EllipsoidImageNode& n) { return n.map.rows(); },
                        [](const BaseNormNode& n) { return n.dim; },
                        [](const PConvexHullNode& n) { return n.dim; },
                        [](const MinkowskiSumNode& n) { return n.dim; },
                        [](const LinearImageNode& n) { return n.map.rows(); },
                        [](const RotatedNode& n) { return n.u.rows(); },
                    },
                    node_->value);
}

double Body::support(const Vector& y) const {
  require_dim(y, dim());
  return std::visit(
      overloaded{
          [&](const EuclideanBallNode& n) {
            if (!n.subspace) return n.radius * y.norm();
            return n.radius * (n.subspace->frame().transpose() * y).norm();
          },
          [&](const EllipsoidImageNode& n) { return ellipsoid_support(n.map, y); },
          [&](const BaseNormNode& n) {
            if (n.kind == BaseKind::lr_ball) return dual_lr_norm(y, n.r);
            return (n.vertices.transpose() * y).cwiseAbs().maxCoeff();
          },
          [&](const PConvexHullNode& n) {
            if (n.parts.empty()) return 0.0;
            Vector h(static_cast<Eigen::Index>(n.parts.size()));
            for (std::size_t i = 0; i < n.parts.size(); ++i) h(static_cast<Eigen::Index>(i)) = n.parts[i].support(y);
            return lq_norm(h, conjugate_exponent(n.p));
          },
          [&](const MinkowskiSumNode& n) {
            double s = 0.0;
            for (const auto& b : n.parts) s += b.support(y);
            return s;
          },
          [&](const LinearImageNode& n) { return n.inner.support(n.map.transpose() * y); },
          [&](const RotatedNode& n) { return n.inner.support(n.u.transpose() * y); },
      },
      node_->value);
}

Vector Body::support_point(const Vector& y) const {
  require_dim(y, dim());
  return std::visit(
      overloaded{
          [&](const EuclideanBallNode& n) -> Vector {
            Vector py = n.subspace ? Vector(n.subspace->frame() * (n.subspace->frame().transpose() * y)) : y;
            const double nrm = py.norm();
            if (nrm == 0.0) return Vector::Zero(n.dim);
            return n.radius * py / nrm;
          },
          [&](const EllipsoidImageNode& n) -> Vector {
            const Vector z = n.map.transpose() * y;
            const double nrm = z.norm();
            if (nrm == 0.0) return Vector::Zero(n.map.rows());
            return n.map * z / nrm;
          },
          [&](const BaseNormNode& n) -> Vector {
            if (n.kind == BaseKind::lr_ball) return dual_lr_gradient(y, n.r);
            const Vector z = n.vertices.transpose() * y;
            Eigen::Index imax = 0;
            z.cwiseAbs().maxCoeff(&imax);
            return (z(imax) >= 0 ? 1.0 : -1.0) * n.vertices.col(imax);
          },
          [&](const PConvexHullNode& n) -> Vector {
            Vector x = Vector::Zero(n.dim);
            if (n.parts.empty()) return x;
            const auto m = static_cast<Eigen::Index>(n.parts.size());
            Vector h(m);
            for (Eigen::Index i = 0; i < m; ++i) h(i) = n.parts[static_cast<std::size_t>(i)].support(y);
            const double q = conjugate_exponent(n.p);
            if (std::isinf(q)) {
              Eigen::Index imax = 0;
              h.maxCoeff(&imax);
              return n.parts[static_cast<std::size_t>(imax)].support_point(y);
            }
            const double total = lq_norm(h, q);
            if (total == 0.0) return x;
            for (Eigen::Index i = 0; i < m; ++i) {
              if (h(i) == 0.0) continue;
              const double t = std::pow(h(i) / total, q - 1.0);
              x += t * n.parts[static_cast<std::size_t>(i)].support_point(y);
            }
            return x;
          },
          [&](const MinkowskiSumNode& n) -> Vector {
            Vector x = Vector::Zero(n.dim);
            for (const auto& b : n.parts) x += b.support_point(y);
            return x;
          },
          [&](const LinearImageNode& n) -> Vector {
            return n.map * n.inner.support_point(n.map.transpose() * y);
          },
          [&](const RotatedNode& n) -> Vector { return n.u * n.inner.support_point(n.u.transpose() * y); },
      },
      node_->value);
}

double Body::circumradius_bound() const {
  return std::visit(overloaded{
                        [](const EuclideanBallNode& n) { return n.radius; },
                        [](const EllipsoidImageNode& n) { return operator_norm(n.map); },
                        [](const BaseNormNode& n) {
                          if (n.kind == BaseKind::polytope) return n.vertices.colwise().norm().maxCoeff();
                          if (n.r <= 2.0) return 1.0;
                          const double inv = std::isinf(n.r) ? 0.0 : 1.0 / n.r;
                          return std::pow(static_cast<double>(n.dim), 0.5 - inv);
                        },
                        [](const PConvexHullNode& n) {
                          if (n.parts.empty()) return 0.0;
                          Vector r(static_cast<Eigen::Index>(n.parts.size()));
                          for (std::size_t i = 0; i < n.parts.size(); ++i)
                            r(static_cast<Eigen::Index>(i)) = n.parts[i].circumradius_bound();
                          return lq_norm(r, conjugate_exponent(n.p));
                        },
                        [](const MinkowskiSumNode& n) {
                          double s = 0.0;
                          for (const auto& b : n.parts) s += b.circumradius_bound();
                          return s;
                        },
                        [](const LinearImageNode& n) { return operator_norm(n.map) * n.inner.circumradius_bound(); },
                        [](const RotatedNode& n) { return n.inner.circumradius_bound(); },
                    },
                    node_->value);
}

// ---------------------------------------------------------------------------
// Transformations
// ---------------------------------------------------------------------------

Body Body::image(const Matrix& m) const {
  if (m.cols() != dim()) throw std::invalid_argument("image: dimension mismatch");
  return std::visit(
      overloaded{
          [&](const EuclideanBallNode& n) {
            if (!n.subspace) return ellipsoid_image(n.radius * m);
            return ellipsoid_image(n.radius * m * n.subspace->frame());
          },
          [&](const EllipsoidImageNode& n) { return ellipsoid_image(m * n.map); },
          [&](const BaseNormNode&) { return linear_image(m, *this); },
          [&](const PConvexHullNode& n) {
            std::vector<Body> parts;
            parts.reserve(n.parts.size());
            for (const auto& b : n.parts) parts.push_back(b.image(m));
            return p_convex_hull(n.p, std::move(parts), m.rows());
          },
          [&](const MinkowskiSumNode& n) {
            std::vector<Body> parts;
            parts.reserve(n.parts.size());
            for (const auto& b : n.parts) parts.push_back(b.image(m));
            return minkowski_sum(std::move(parts));
          },
          [&](const LinearImageNode& n) { return n.inner.image(m * n.map); },
          [&](const RotatedNode& n) { return n.inner.image(m * n.u); },
      },
      node_->value);
}

Body Body::scaled(double c) const {
  if (!(c >= 0.0)) throw std::invalid_argument("scaled: factor must be non-negative");
  return std::visit(
      overloaded{
          [&](const EuclideanBallNode& n) {
            auto copy = n;
            copy.radius *= c;
            return Body(std::make_shared<BodyNode>(BodyNode{copy}));
          },
          [&](const EllipsoidImageNode& n) { return ellipsoid_image(c * n.map); },
          [&](const BaseNormNode& n) { return linear_image(c * Matrix::Identity(n.dim, n.dim), *this); },
          [&](const PConvexHullNode& n) {
            std::vector<Body> parts;
            for (const auto& b : n.parts) parts.push_back(b.scaled(c));
            return p_convex_hull(n.p, std::move(parts), n.dim);
          },
          [&](const MinkowskiSumNode& n) {
            std::vector<Body> parts;
            for (const auto& b : n.parts) parts.push_back(b.scaled(c));
            return minkowski_sum(std::move(parts));
          },
          [&](const LinearImageNode& n) { return linear_image(c * n.map, n.inner); },
          [&](const RotatedNode& n) { return rotated(n.u, n.inner.scaled(c)); },
      },
      node_->value);
}

Body Body::restricted(const Subspace& s) const {
  if (s.ambient_dim() != dim()) throw std::invalid_argument("restricted: dimension mismatch");
  return image(s.frame().transpose());
}

std::string Body::kind_name() const {
  return std::visit(overloaded{
                        [](const EuclideanBallNode&) { return std::string("euclidean_ball"); },
                        [](const EllipsoidImageNode&) { return std::string("ellipsoid_image"); },
                        [](const BaseNormNode&) { return std::string("base_norm"); },
                        [](const PConvexHullNode&) { return std::string("p_convex_hull"); },
                        [](const MinkowskiSumNode&) { return std::string("minkowski_sum"); },
                        [](const LinearImageNode&) { return std::string("linear_image"); },
                        [](const RotatedNode&) { return std::string("rotated"); },
                    },
                    node_->value);
}

}  // namespace randsat
