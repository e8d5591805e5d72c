#include "randsat/body_json.hpp"

#include <cmath>
#include <stdexcept>

namespace randsat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

nlohmann::json exponent_to_json(double r) {
  if (std::isinf(r)) return "inf";
  return r;
}

double exponent_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("body json: bad exponent");
  }
  return j.get<double>();
}

}  // namespace

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix json: entry count does not match rows x cols");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  return m;
}

nlohmann::json body_to_json(const Body& body) {
  return std::visit(
      overloaded{
          [](const EuclideanBallNode& n) {
            nlohmann::json j{{"type", "euclidean_ball"}, {"radius", n.radius}, {"dim", n.dim}};
            if (n.subspace) j["subspace"] = matrix_to_json(n.subspace->frame());
            return j;
          },
          [](const EllipsoidImageNode& n) {
            return nlohmann::json{{"type", "ellipsoid_image"}, {"map", matrix_to_json(n.map)}};
          },
          [](const BaseNormNode& n) {
            if (n.kind == BaseKind::lr_ball)
              return nlohmann::json{{"type", "base_norm"}, {"kind", "lr_ball"}, {"dim", n.dim}, {"r", exponent_to_json(n.r)}};
            return nlohmann::json{
                {"type", "base_norm"}, {"kind", "polytope"}, {"dim", n.dim}, {"vertices", matrix_to_json(n.vertices)}};
          },
          [](const PConvexHullNode& n) {
            nlohmann::json parts = nlohmann::json::array();
            for (const auto& b : n.parts) parts.push_back(body_to_json(b));
            return nlohmann::json{{"type", "p_convex_hull"}, {"p", n.p}, {"dim", n.dim}, {"parts", std::move(parts)}};
          },
          [](const MinkowskiSumNode& n) {
            nlohmann::json parts = nlohmann::json::array();
            for (const auto& b : n.parts) parts.push_back(body_to_json(b));
            return nlohmann::json{{"type", "minkowski_sum"}, {"parts", std::move(parts)}};
          },
          [](const LinearImageNode& n) {
            return nlohmann::json{
                {"type", "linear_image"}, {"map", matrix_to_json(n.map)}, {"inner", body_to_json(n.inner)}};
          },
          [](const RotatedNode& n) {
            return nlohmann::json{{"type", "rotated"}, {"u", matrix_to_json(n.u)}, {"inner", body_to_json(n.inner)}};
          },
      },
      body.node().value);
}

Body body_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "euclidean_ball") {
    const double radius = j.at("radius").get<double>();
    if (j.contains("subspace")) return Body::euclidean_ball(Subspace::from_orthonormal(matrix_from_json(j["subspace"])), radius);
    return Body::euclidean_ball(j.at("dim").get<Eigen::Index>(), radius);
  }
  if (type == "ellipsoid_image") return Body::ellipsoid_image(matrix_from_json(j.at("map")));
  if (type == "base_norm") {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "lr_ball") return Body::lr_ball(j.at("dim").get<Eigen::Index>(), exponent_from_json(j.at("r")));
    if (kind == "polytope") return Body::polytope(matrix_from_json(j.at("vertices")));
    throw std::invalid_argument("body json: unknown base_norm kind '" + kind + "'");
  }
  if (type == "p_convex_hull") {
    std::vector<Body> parts;
    for (const auto& pj : j.at("parts")) parts.push_back(body_from_json(pj));
    return Body::p_convex_hull(j.at("p").get<double>(), std::move(parts), j.at("dim").get<Eigen::Index>());
  }
  if (type == "minkowski_sum") {
    std::vector<Body> parts;
    for (const auto& pj : j.at("parts")) parts.push_back(body_from_json(pj));
    return Body::minkowski_sum(std::move(parts));
  }
  if (type == "linear_image") return Body::linear_image(matrix_from_json(j.at("map")), body_from_json(j.at("inner")));
  if (type == "rotated") return Body::rotated(matrix_from_json(j.at("u")), body_from_json(j.at("inner")));
  throw std::invalid_argument("body json: unknown type '" + type + "'");
}

}  // namespace randsat
