#include <doctest.h>

#include "randsat/decouple.hpp"

#include <random>

using namespace randsat;

namespace {

// Plain subset scan: does some J of size ceil(n/3) keep outside mass >= 1/3?
bool brute_force_exists(const Matrix& l) {
  const int n = int(l.cols());
  const int ell = (n + 2) / 3;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != ell) continue;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      if (!(mask >> j & 1)) continue;
      double out = 0.0;
      for (int i = 0; i < n; ++i)
        if (!(mask >> i & 1)) out += l(i, j);
      ok = out >= 1.0 / 3.0 - 1e-12;
    }
    if (ok) return true;
  }
  return false;
}

Matrix random_column_stochastic(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Matrix l = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i)
      if (i != j) l(i, j) = e(rng);
    l.col(j) /= l.col(j).sum();
  }
  return l;
}

}  // namespace

TEST_CASE("decoupling: two and three points") {
  Matrix l2(2, 2);
  l2 << 0, 1, 1, 0;
  const auto r2 = find_decoupling_set({2, l2});
  CHECK(r2.j_set.size() == 1);
  CHECK(r2.min_outside_mass == doctest::Approx(1.0));

  Matrix l3 = Matrix::Zero(3, 3);
  l3(1, 0) = l3(2, 1) = l3(0, 2) = 1;
  const auto r3 = find_decoupling_set({3, l3});
  REQUIRE(r3.j_set.size() == 1);
  CHECK(r3.min_outside_mass == doctest::Approx(1.0));
  CHECK(exhaustive_oracle({3, l3}).j_set == std::vector<int>{0});
}

TEST_CASE("decoupling: uniform off-diagonal weights") {
  Matrix l = Matrix::Constant(6, 6, 0.2);
  l.diagonal().setZero();
  const auto r = find_decoupling_set({6, l});
  CHECK(r.j_set.size() == 2);
  CHECK(r.min_outside_mass == doctest::Approx(0.8));
  CHECK(min_outside_mass({6, l}, {0, 5}) == doctest::Approx(0.8));
}

TEST_CASE("decoupling: permutation matrices") {
  std::mt19937_64 rng(21);
  for (int n = 2; n <= 9; ++n) {
    // a derangement: cyclic shift composed with a random relabelling
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix l = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) l(perm[(i + 1) % n], perm[i]) = 1;
    const auto r = find_decoupling_set({n, l});
    CHECK(int(r.j_set.size()) == (n + 2) / 3);
    CHECK(r.min_outside_mass >= 1.0 / 3.0);
  }
}

TEST_CASE("decoupling: search agrees with both oracles on 200 random instances") {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> pick(3, 9);
  for (int t = 0; t < 200; ++t) {
    const int n = pick(rng);
    const DecouplingInstance inst{n, random_column_stochastic(n, rng)};
    const auto r = find_decoupling_set(inst, SeedStream{23, std::uint64_t(t)});
    const auto o = exhaustive_oracle(inst);
    CHECK(brute_force_exists(inst.lambda));
    CHECK(int(r.j_set.size()) >= (n + 2) / 3);
    CHECK(r.min_outside_mass >= 1.0 / 3.0);
    CHECK(min_outside_mass(inst, r.j_set) == doctest::Approx(r.min_outside_mass));
    CHECK(o.min_outside_mass >= 1.0 / 3.0);
    CHECK(o.j_set.size() == r.j_set.size());
  }
}

TEST_CASE("decoupling: result is reproducible for a fixed seed") {
  std::mt19937_64 rng(24);
  const DecouplingInstance inst{12, random_column_stochastic(12, rng)};
  CHECK(find_decoupling_set(inst, SeedStream{1, 2}).j_set == find_decoupling_set(inst, SeedStream{1, 2}).j_set);
}

TEST_CASE("decoupling: instance validation") {
  Matrix bad_diag = Matrix::Constant(3, 3, 0.5);
  CHECK_THROWS_AS(validate({3, bad_diag}), std::invalid_argument);
  Matrix bad_sum = Matrix::Zero(3, 3);
  bad_sum(1, 0) = bad_sum(2, 1) = 1;
  bad_sum(0, 2) = 0.9;
  CHECK_THROWS_AS(validate({3, bad_sum}), std::invalid_argument);
  Matrix neg = Matrix::Zero(2, 2);
  neg(1, 0) = 1;
  neg(0, 1) = 1;
  validate({2, neg});
  neg(0, 1) = -1;
  CHECK_THROWS_AS(validate({2, neg}), std::invalid_argument);
}

TEST_CASE("witnesses: equal contributions and sign precondition") {
  const std::vector<double> kappa{1.0, 1.0, 1.0};
  const std::vector<Witness> w{{1, 0, 0.5}, {2, 0, 0.5}, {0, 1, 1.0}, {0, 2, 1.0}};
  const auto inst = build_lambda_from_witnesses(3, kappa, w);
  CHECK(inst.lambda(0, 0) == 0.0);
  CHECK(inst.lambda(1, 0) == doctest::Approx(0.5));
  CHECK(inst.lambda(2, 0) == doctest::Approx(0.5));

  const std::vector<Witness> negative{{1, 0, -1.0}, {0, 1, 1.0}};
  CHECK_THROWS_AS(build_lambda_from_witnesses(2, {1.0, 1.0}, negative), InvalidWitness);
  const std::vector<Witness> short_col{{1, 0, 0.7}, {0, 1, 1.0}};
  CHECK_THROWS_AS(build_lambda_from_witnesses(2, {1.0, 1.0}, short_col), InvalidWitness);
}
