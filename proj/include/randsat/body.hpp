#pragma once

// Origin-symmetric convex bodies represented as expression trees and evaluated
// only through their support functions h_K(y) = sup_{x in K} <x, y>.

#include "randsat/randcore.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace randsat {

struct BodyNode;

class Body {
 public:
  /// radius * B_2^dim.
  static Body euclidean_ball(Eigen::Index dim, double radius = 1.0);
  /// radius * (B_2^n ∩ S).
  static Body euclidean_ball(const Subspace& s, double radius = 1.0);
  /// map(B_2^cols).
  static Body ellipsoid_image(Matrix map);
  /// Unit ball of l_r^dim, r in [1, inf] (use infinity() for the cube).
  static Body lr_ball(Eigen::Index dim, double r);
  /// Absolute convex hull of the columns of `vertices`.
  static Body polytope(Matrix vertices);
  /// conv_p(parts), p in [1, inf).  An empty part list gives {0} in R^dim.
  static Body p_convex_hull(double p, std::vector<Body> parts, Eigen::Index dim);
  static Body minkowski_sum(std::vector<Body> parts);
  static Body linear_image(Matrix map, Body inner);
  static Body rotated(Matrix u, Body inner);

  [[nodiscard]] Eigen::Index dim() const;
  [[nodiscard]] double support(const Vector& y) const;
  /// A point x of the body with <x, y> = h(y); a subgradient of h at y.
  [[nodiscard]] Vector support_point(const Vector& y) const;
  /// Upper bound on max_{|y| = 1} h(y), from the tree structure.
  [[nodiscard]] double circumradius_bound() const;

  /// m(K) with the map pushed into the leaves where possible.
  [[nodiscard]] Body image(const Matrix& m) const;
  [[nodiscard]] Body scaled(double c) const;
  /// P_S(K) written in the coordinates of S's frame (a body in R^{dim S}).
  [[nodiscard]] Body restricted(const Subspace& s) const;

  [[nodiscard]] const BodyNode& node() const { return *node_; }
  [[nodiscard]] std::string kind_name() const;

 private:
  explicit Body(std::shared_ptr<const BodyNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const BodyNode> node_;
};

struct EuclideanBallNode {
  double radius = 1.0;
  Eigen::Index dim = 0;
  std::optional<Subspace> subspace;
};

struct EllipsoidImageNode {
  Matrix map;
};

enum class BaseKind { lr_ball, polytope };

struct BaseNormNode {
  BaseKind kind = BaseKind::lr_ball;
  Eigen::Index dim = 0;
  double r = 2.0;   ///< lr_ball exponent
  Matrix vertices;  ///< polytope generators (columns)
};

struct PConvexHullNode {
  double p = 1.0;
  std::vector<Body> parts;
  Eigen::Index dim = 0;
};

struct MinkowskiSumNode {
  std::vector<Body> parts;
  Eigen::Index dim = 0;
};

struct LinearImageNode {
  Matrix map;
  Body inner;
};

struct RotatedNode {
  Matrix u;
  Body inner;
};

struct BodyNode {
  std::variant<EuclideanBallNode, EllipsoidImageNode, BaseNormNode, PConvexHullNode, MinkowskiSumNode,
               LinearImageNode, RotatedNode>
      value;
};

/// Conjugate exponent p/(p-1); infinity for p = 1.
double conjugate_exponent(double p);

/// l_q norm of a non-negative vector, q in [1, inf].
double lq_norm(const Vector& v, double q);

}  // namespace randsat
