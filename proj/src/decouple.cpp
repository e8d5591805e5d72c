#include "randsat/decouple.hpp"

#include "randsat/body_json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace randsat {

namespace {

constexpr double kValidSlack = 1e-9;

int ceil_third(int n) { return (n + 2) / 3; }

// Index vector of size n with in_set flags, for O(N^2) mass evaluation.
double mass_of(const Matrix& lam, const std::vector<char>& in_set, const std::vector<int>& members) {
  double worst = std::numeric_limits<double>::infinity();
  for (int j : members) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lam.rows(); ++i)
      if (!in_set[static_cast<std::size_t>(i)]) s += lam(i, j);
    worst = std::min(worst, s);
  }
  return worst;
}

bool better(double mass, const std::vector<int>& j_set, double best_mass, const std::vector<int>& best) {
  if (mass > best_mass + 1e-15) return true;
  if (mass < best_mass - 1e-15) return false;
  return best.empty() || j_set < best;
}

// Visits every size-r subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int r, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    int pos = r - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - r + pos) --pos;
    if (pos < 0) return;
    ++idx[static_cast<std::size_t>(pos)];
    for (int t = pos + 1; t < r; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
}

DecouplingResult best_of_size(const DecouplingInstance& inst, int r) {
  DecouplingResult res;
  res.min_outside_mass = -1.0;
  std::vector<char> flag(static_cast<std::size_t>(inst.n), 0);
  for_each_subset(inst.n, r, [&](const std::vector<int>& s) {
    std::fill(flag.begin(), flag.end(), 0);
    for (int j : s) flag[static_cast<std::size_t>(j)] = 1;
    const double m = mass_of(inst.lambda, flag, s);
    if (better(m, s, res.min_outside_mass, res.j_set)) {
      res.min_outside_mass = m;
      res.j_set = s;
    }
  });
  return res;
}

void local_search(const Matrix& lam, std::vector<int>& j_set, double& mass) {
  const int n = static_cast<int>(lam.rows());
  std::vector<char> flag(static_cast<std::size_t>(n), 0);
  for (int j : j_set) flag[static_cast<std::size_t>(j)] = 1;
  mass = mass_of(lam, flag, j_set);
  while (true) {
    double best_mass = mass;
    std::vector<int> best_set;
    for (std::size_t a = 0; a < j_set.size(); ++a) {
      for (int b = 0; b < n; ++b) {
        if (flag[static_cast<std::size_t>(b)]) continue;
        std::vector<int> cand = j_set;
        cand[a] = b;
        std::sort(cand.begin(), cand.end());
        flag[static_cast<std::size_t>(j_set[a])] = 0;
        flag[static_cast<std::size_t>(b)] = 1;
        const double m = mass_of(lam, flag, cand);
        flag[static_cast<std::size_t>(b)] = 0;
        flag[static_cast<std::size_t>(j_set[a])] = 1;
        if (m > best_mass + 1e-15 || (m >= best_mass - 1e-15 && !best_set.empty() && cand < best_set)) {
          best_mass = m;
          best_set = std::move(cand);
        }
      }
    }
    if (best_set.empty() || best_mass <= mass + 1e-15) return;
    for (int j : j_set) flag[static_cast<std::size_t>(j)] = 0;
    j_set = std::move(best_set);
    for (int j : j_set) flag[static_cast<std::size_t>(j)] = 1;
    mass = best_mass;
  }
}

}  // namespace

void validate(const DecouplingInstance& inst) {
  if (inst.n < 1) throw std::invalid_argument("decoupling instance: N must be positive");
  if (inst.lambda.rows() != inst.n || inst.lambda.cols() != inst.n)
    throw std::invalid_argument("decoupling instance: lambda must be N x N");
  for (int j = 0; j < inst.n; ++j) {
    if (inst.lambda(j, j) != 0.0) throw std::invalid_argument("decoupling instance: nonzero diagonal at " + std::to_string(j));
    double s = 0.0;
    for (int i = 0; i < inst.n; ++i) {
      const double v = inst.lambda(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("decoupling instance: entry outside [0,1]");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("decoupling instance: column " + std::to_string(j) + " does not sum to 1");
  }
}

double min_outside_mass(const DecouplingInstance& inst, const std::vector<int>& j_set) {
  std::vector<char> flag(static_cast<std::size_t>(inst.n), 0);
  for (int j : j_set) flag[static_cast<std::size_t>(j)] = 1;
  return mass_of(inst.lambda, flag, j_set);
}

DecouplingResult exhaustive_oracle(const DecouplingInstance& inst) {
  validate(inst);
  if (inst.n > 15) throw std::invalid_argument("exhaustive_oracle: N must be at most 15");
  const int ell = ceil_third(inst.n);
  for (int r = ell; r <= inst.n; ++r) {
    DecouplingResult res = best_of_size(inst, r);
    if (res.min_outside_mass >= 1.0 / 3.0 - kValidSlack) {
      res.ell = ell;
      return res;
    }
  }
  throw InternalError("exhaustive_oracle: no valid set; the instance violates the lemma's hypotheses");
}

DecouplingResult find_decoupling_set(const DecouplingInstance& inst, const SeedStream& seed) {
  validate(inst);
  const int n = inst.n;
  const int ell = ceil_third(n);
  std::vector<int> best;
  double best_mass = -1.0;
  auto rng = seed.engine();
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int restart = 0; restart < 50; ++restart) {
    std::iota(perm.begin(), perm.end(), 0);
    if (restart > 0) std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> j_set(perm.begin(), perm.begin() + ell);
    std::sort(j_set.begin(), j_set.end());
    double mass = 0.0;
    local_search(inst.lambda, j_set, mass);
    if (better(mass, j_set, best_mass, best)) {
      best_mass = mass;
      best = j_set;
    }
  }
  DecouplingResult res;
  res.ell = ell;
  if (best_mass < 1.0 / 3.0 - kValidSlack) {
    if (n > 15) {
      res.status = DecouplingStatus::heuristic_miss;
      res.j_set = best;
      res.min_outside_mass = best_mass;
      return res;
    }
    const DecouplingResult ex = best_of_size(inst, ell);
    best = ex.j_set;
    best_mass = ex.min_outside_mass;
    if (best_mass < 1.0 / 3.0 - kValidSlack)
      throw InternalError("find_decoupling_set: no valid set of size ceil(N/3); input violates the lemma's hypotheses");
  }
  res.j_set = best;
  res.min_outside_mass = min_outside_mass(inst, best);
  if (static_cast<int>(res.j_set.size()) < ell || res.min_outside_mass < 1.0 / 3.0 - kValidSlack)
    throw InternalError("find_decoupling_set: produced an invalid set");
  return res;
}

DecouplingInstance build_lambda_from_witnesses(int n, const std::vector<double>& kappa,
                                               const std::vector<Witness>& witnesses) {
  if (n < 1 || static_cast<int>(kappa.size()) != n) throw InvalidWitness("witnesses: need one kappa per column");
  DecouplingInstance inst;
  inst.n = n;
  inst.lambda = Matrix::Zero(n, n);
  for (const auto& w : witnesses) {
    if (w.i < 0 || w.i >= n || w.j < 0 || w.j >= n) throw InvalidWitness("witnesses: index out of range");
    if (w.i == w.j) throw InvalidWitness("witnesses: diagonal contribution");
    if (!(w.inner_product >= 0.0)) throw InvalidWitness("witnesses: negative inner product (sign fix missing)");
    const double kj = kappa[static_cast<std::size_t>(w.j)];
    if (!(kj > 0.0)) throw InvalidWitness("witnesses: kappa must be positive");
    inst.lambda(w.i, w.j) += w.inner_product / kj;
  }
  for (int j = 0; j < n; ++j) {
    const double s = inst.lambda.col(j).sum();
    if (std::abs(s - 1.0) > 1e-6) throw InvalidWitness("witnesses: column " + std::to_string(j) + " sums to " + std::to_string(s));
    inst.lambda.col(j) /= s;
    for (int i = 0; i < n; ++i) inst.lambda(i, j) = std::min(inst.lambda(i, j), 1.0);
  }
  return inst;
}

nlohmann::json to_json(const DecouplingInstance& inst) {
  return {{"N", inst.n}, {"lambda", matrix_to_json(inst.lambda)}};
}

nlohmann::json to_json(const DecouplingResult& res) {
  return {{"J", res.j_set},
          {"ell", res.ell},
          {"min_outside_mass", res.min_outside_mass},
          {"status", res.status == DecouplingStatus::found ? "found" : "heuristic-miss"}};
}

}  // namespace randsat
