#include <doctest.h>

#include "randsat/meanwidth.hpp"

#include <cmath>
#include <numbers>

using namespace randsat;

namespace {

// E|g| for g ~ N(0, I_s) by Simpson integration of the chi density.
double chi_mean_by_quadrature(long s) {
  const double hi = std::sqrt(double(s)) + 12.0;
  const int steps = 20000;
  const double h = hi / steps;
  auto f = [s](double r) {
    if (r == 0.0) return 0.0;
    return std::exp(double(s) * std::log(r) - r * r / 2 - (s / 2.0 - 1) * std::log(2.0) - std::lgamma(s / 2.0));
  };
  double acc = f(0) + f(hi);
  for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4 : 2) * f(i * h);
  return acc * h / 3;
}

Body segment(long d) { return Body::ellipsoid_image(Matrix(Vector::Unit(d, 0))); }

}  // namespace

TEST_CASE("gaussian_norm_constant: closed forms") {
  CHECK(gaussian_norm_constant(1) == doctest::Approx(0.7978845608).epsilon(1e-9));
  CHECK(gaussian_norm_constant(2) == doctest::Approx(1.2533141373).epsilon(1e-9));
  for (long s : {3L, 7L, 20L, 55L}) CHECK(gaussian_norm_constant(s) == doctest::Approx(chi_mean_by_quadrature(s)));
}

TEST_CASE("gaussian_norm_constant: c_s c_{s+1} = s and c_s <= sqrt(s) with ratio increasing to 1") {
  double prev = 0.0;
  for (long s : {1L, 2L, 5L, 10L, 100L, 1000L, 10000L}) {
    const double c = gaussian_norm_constant(s);
    CHECK(c * gaussian_norm_constant(s + 1) == doctest::Approx(double(s)).epsilon(1e-10));
    CHECK(c <= std::sqrt(double(s)));
    CHECK(c / std::sqrt(double(s)) > prev);
    prev = c / std::sqrt(double(s));
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mstar: ball, scaling and segment") {
  for (long d : {2L, 10L, 50L}) {
    const auto e = mstar(Body::euclidean_ball(d), 2000, SeedStream{5, std::uint64_t(d)});
    CHECK(std::abs(e.value - 1.0) <= 3 * e.std_error + 1e-12);
    const auto a = mstar(Body::euclidean_ball(d).scaled(2.5), 2000, SeedStream{5, std::uint64_t(d)});
    CHECK(a.value == doctest::Approx(2.5));
  }
  const double expected = gaussian_norm_constant(1) / gaussian_norm_constant(10);
  const auto e = mstar(segment(10), 20000, SeedStream{6, 0});
  CHECK(std::abs(e.value - expected) <= 3 * e.std_error);
}

TEST_CASE("mstar: homogeneity and monotonicity on nested pairs") {
  const SeedStream seed{7, 1};
  const Body cube = Body::lr_ball(6, std::numeric_limits<double>::infinity());
  const Body cross = Body::lr_ball(6, 1.0);
  const auto c = mstar(cube, 4096, seed);
  const auto x = mstar(cross, 4096, seed.derive(1));
  const auto b = mstar(Body::euclidean_ball(6), 4096, seed.derive(2));
  CHECK(x.value <= b.value + 3 * b.std_error);
  CHECK(b.value <= c.value + 3 * c.std_error);
  CHECK(mstar(cube.scaled(0.3), 4096, seed).value == doctest::Approx(0.3 * c.value));
}

TEST_CASE("mstar: projection comparison c_m M*(QS) <= c_n M*(S)") {
  const long n = 30, m = 8;
  const Body s = Body::lr_ball(n, std::numeric_limits<double>::infinity());
  for (std::uint64_t t = 0; t < 3; ++t) {
    const Subspace q = haar_subspace(n, m, SeedStream{8, t});
    const Body qs = s.image(Matrix(q.frame().transpose()));
    const auto lhs = mstar(qs, 4096, SeedStream{9, t});
    const auto rhs = mstar(s, 4096, SeedStream{10, t});
    CHECK(gaussian_norm_constant(m) * lhs.value <= gaussian_norm_constant(n) * rhs.value * 1.03);
    CHECK(gaussian_norm_constant(n) / gaussian_norm_constant(m) <= 2 / std::sqrt(std::numbers::pi) * std::sqrt(double(n) / m));
  }
}

TEST_CASE("check_mean_width_image: acceptance configuration") {
  const auto r = check_mean_width_image(Body::euclidean_ball(20), 1.0, 5, 0.3, 2000, SeedStream{11, 0});
  CHECK(r.trials == 2000);
  CHECK(r.empirical_mean == doctest::Approx(gaussian_norm_constant(20) * 0.3).epsilon(0.02));
  CHECK(r.details.at("tail_frequency") <= r.details.at("tail_bound") + 0.05);
}

TEST_CASE("check_mean_width_image: tiny sigma and missing radius") {
  const auto r = check_mean_width_image(Body::euclidean_ball(10), 1.0, 3, 1e-9, 50, SeedStream{12, 0});
  CHECK(r.empirical_mean < 1e-7);
  CHECK_THROWS_AS((void)check_mean_width_image(Body::euclidean_ball(10), std::nullopt, 3, 0.3, 10, SeedStream{}),
                  PreconditionViolation);
}

TEST_CASE("check_shrinking: trivial cases") {
  const Body point = Body::ellipsoid_image(Matrix::Zero(12, 1));
  const auto z = check_shrinking(point, 1.0, 3, 0.1, ShrinkMode::projection, 40, SeedStream{13, 0});
  CHECK(z.successes == z.trials);
  const auto full = check_shrinking(Body::euclidean_ball(8), 1.0, 8, 0.1, ShrinkMode::projection, 40, SeedStream{14, 0});
  CHECK(full.successes == full.trials);
}

TEST_CASE("check_shrinking: thirty segments in R^40") {
  std::vector<Body> parts;
  auto rng = SeedStream{15, 0}.engine();
  for (int i = 0; i < 30; ++i) parts.push_back(Body::ellipsoid_image(Matrix(random_unit_vector(40, rng))));
  const Body s = Body::p_convex_hull(1.0, std::move(parts), 40);
  const double t = 0.4;
  const auto r = check_shrinking(s, 1.0, 5, t, ShrinkMode::projection, 300, SeedStream{16, 0});
  const double bound = 1 - std::exp(-t * t * 40 / 2 + 1);
  CHECK(r.success_frequency() >= bound - 0.05);
}

TEST_CASE("cp_mean_width_bound: single block, p = 2 and the C = 4 bound") {
  const auto one = cp_mean_width_bound(1, 3, 1.5, 4.0, 2048, SeedStream{17, 0});
  CHECK(one.estimate == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(one.bound >= 1.0);
  const auto two = cp_mean_width_bound(6, 2, 2.0, 4.0, 2048, SeedStream{17, 1});
  CHECK(two.estimate == doctest::Approx(1.0).epsilon(1e-9));
  for (long n : {4L, 16L})
    for (long k : {1L, 3L})
      for (double p : {1.1, 1.5, 1.9}) CHECK(cp_mean_width_bound(n, k, p, 4.0, 2048, SeedStream{18, 0}).holds);
}

TEST_CASE("cp_mean_width_bound: near p = 1 matches the dual l_inf mean") {
  // p -> 1, k = 1: the body approaches the cross-polytope, whose support is max |y_i|.
  const long n = 16;
  auto rng = SeedStream{19, 0}.engine();
  double acc = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) acc += random_unit_vector(n, rng).cwiseAbs().maxCoeff();
  const double direct = acc / count;
  const auto e = cp_mean_width_bound(n, 1, 1.0001, 4.0, 8192, SeedStream{19, 1});
  CHECK(e.estimate == doctest::Approx(direct).epsilon(0.02));
}
