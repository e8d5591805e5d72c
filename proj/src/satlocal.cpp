#include "randsat/satlocal.hpp"

#include "randsat/body_json.hpp"
#include "randsat/meanwidth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace randsat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------
// Base norm
// ---------------------------------------------------------------------------

Body make_base_norm(const BaseNormSpec& spec, long k) {
  if (k < 1) throw std::invalid_argument("base norm: k must be positive");
  const double kd = static_cast<double>(k);
  if (spec.kind == "l1") return Body::lr_ball(k, 1.0);
  if (spec.kind == "l2") return Body::euclidean_ball(k);
  if (spec.kind == "linf") return Body::lr_ball(k, kInf).scaled(1.0 / std::sqrt(kd));
  if (spec.kind == "lr") {
    if (!(spec.r >= 1.0)) throw std::invalid_argument("base norm: r must be at least 1");
    if (std::isinf(spec.r)) return Body::lr_ball(k, kInf).scaled(1.0 / std::sqrt(kd));
    const Body b = Body::lr_ball(k, spec.r);
    return spec.r >= 2.0 ? b.scaled(std::pow(kd, -(0.5 - 1.0 / spec.r))) : b;
  }
  if (spec.kind == "polytope") {
    if (spec.vertices.rows() != k || spec.vertices.cols() == 0)
      throw std::invalid_argument("base norm: polytope vertices must be k x v");
    const double r = spec.vertices.colwise().norm().maxCoeff();
    if (!(r > 0.0)) throw std::invalid_argument("base norm: zero polytope");
    const Body b = Body::polytope(spec.vertices / r);
    const InclusionReport inner = check_inclusion(Body::euclidean_ball(k, 1.0 / std::sqrt(kd)), b, std::nullopt, 1.0);
    if (!inner.holds) throw PreconditionViolation("base norm: polytope does not contain the ball of radius 1/sqrt(k)");
    return b;
  }
  throw std::invalid_argument("base norm: unknown kind '" + spec.kind + "'");
}

void validate_base_norm(const BaseNormSpec& spec, long k) {
  const Body w = make_base_norm(spec, k);
  const Body ball = Body::euclidean_ball(k);
  if (!check_inclusion(w, ball, std::nullopt, 1.0).holds)
    throw std::invalid_argument("base norm: B_W is not inside B_2^k");
  if (!check_inclusion(ball, w, std::nullopt, std::sqrt(static_cast<double>(k))).holds)
    throw std::invalid_argument("base norm: B_W does not contain B_2^k / sqrt(k)");
}

nlohmann::json to_json(const BaseNormSpec& spec) {
  nlohmann::json j{{"kind", spec.kind}};
  if (spec.kind == "lr") j["r"] = std::isinf(spec.r) ? nlohmann::json("inf") : nlohmann::json(spec.r);
  if (spec.kind == "polytope") j["vertices"] = matrix_to_json(spec.vertices);
  return j;
}

BaseNormSpec base_norm_from_json(const nlohmann::json& j) {
  BaseNormSpec s;
  if (j.is_string()) {
    s.kind = j.get<std::string>();
    return s;
  }
  s.kind = j.at("kind").get<std::string>();
  if (j.contains("r")) s.r = j.at("r").is_string() ? kInf : j.at("r").get<double>();
  if (j.contains("vertices")) s.vertices = matrix_from_json(j.at("vertices"));
  return s;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

Constraint make_constraint(std::string name, double lhs, double rhs) {
  Constraint c{std::move(name), lhs, rhs, false};
  c.satisfied = lhs <= rhs + 1e-12 * std::max(std::abs(rhs), 1e-300);
  return c;
}

nlohmann::json to_json(const Constraint& c) {
  return {{"name", c.name}, {"lhs", finite_or_null(c.lhs)}, {"rhs", finite_or_null(c.rhs)}, {"satisfied", c.satisfied}};
}

double LocalConfig::p() const { return std::isinf(q) ? 1.0 : q / (q - 1.0); }

double LocalConfig::brutal_target() const {
  return epsilon.value_or(1.0) / std::sqrt(static_cast<double>(k));
}

double LocalConfig::certificate_bound() const {
  if (epsilon) return 1.0 + *epsilon;
  return std::isinf(q) ? 1.0 : std::pow(2.0, 1.0 / q);
}

void validate(const LocalConfig& cfg) {
  if (!(cfg.q > 2.0)) throw std::invalid_argument("local config: q must exceed 2");
  if (!(cfg.k >= 1 && cfg.k <= cfg.m0 && cfg.m0 <= cfg.m && cfg.m <= cfg.n && cfg.n <= cfg.k * cfg.N))
    throw std::invalid_argument("local config: need 1 <= k <= m0 <= m <= n <= kN");
  if (!(cfg.kappa > 0.0 && cfg.kappa <= 1.0)) throw std::invalid_argument("local config: kappa must lie in (0, 1]");
  if (cfg.epsilon && !(*cfg.epsilon > 0.0)) throw std::invalid_argument("local config: epsilon must be positive");
  validate_base_norm(cfg.base_norm, cfg.k);
}

nlohmann::json to_json(const LocalConfig& cfg) {
  nlohmann::json j{{"q", std::isinf(cfg.q) ? nlohmann::json("inf") : nlohmann::json(cfg.q)},
                   {"p", cfg.p()},
                   {"n", cfg.n},
                   {"m", cfg.m},
                   {"m0", cfg.m0},
                   {"k", cfg.k},
                   {"N", cfg.N},
                   {"kappa", cfg.kappa},
                   {"base_norm", to_json(cfg.base_norm)},
                   {"seed", cfg.master_seed}};
  if (cfg.epsilon) j["epsilon"] = *cfg.epsilon;
  return j;
}

LocalConfig local_config_from_json(const nlohmann::json& j) {
  LocalConfig c;
  if (j.contains("q")) c.q = j.at("q").is_string() ? kInf : j.at("q").get<double>();
  c.n = j.value("n", c.n);
  c.m = j.value("m", c.m);
  c.m0 = j.value("m0", c.m);
  c.k = j.value("k", c.k);
  c.N = j.value("N", c.N);
  if (j.contains("kappa")) {
    c.kappa = j.at("kappa").get<double>();
  } else {
    c.kappa = 0.125 * std::sqrt(double(c.m0) / (double(c.n) * double(c.k)));
  }
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("base_norm")) c.base_norm = base_norm_from_json(j.at("base_norm"));
  c.master_seed = j.value("seed", std::uint64_t{0});
  return c;
}

double alpha_exponent(double q) {
  if (std::isinf(q)) return 0.5;
  return (q - 2.0) / (2.0 * q + 2.0);
}

PlanReport plan(double q, long n, long m0, std::optional<double> epsilon, const Constants& constants,
                std::optional<long> k_override) {
  if (!(q > 2.0)) throw std::invalid_argument("plan: q must exceed 2");
  if (n < 4) throw std::invalid_argument("plan: n must be at least 4");
  if (m0 < 1 || m0 > n) throw std::invalid_argument("plan: need 1 <= m0 <= n");
  if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("plan: epsilon must be positive");
  PlanReport r;
  r.q = q;
  r.n = n;
  r.m0 = m0;
  r.alpha_exponent = alpha_exponent(q);
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m0);
  const double logn = std::log(nd);
  const double a = r.alpha_exponent;
  const double c1 = constants.get("c1");
  const double big_c = constants.get("C");
  const double c_prime = constants.get("c_prime");
  const double sq = std::sqrt(q);
  r.k_bound = c1 * md / (sq * std::pow(nd, 1.0 - a) * std::pow(logn, (1.0 - 2.0 * a) / 3.0));
  r.k_max = std::isfinite(r.k_bound) ? static_cast<long>(std::floor(r.k_bound)) : 0;
  r.k_used = k_override.value_or(std::max<long>(r.k_max, 1));
  if (r.k_used < 1) throw std::invalid_argument("plan: k must be positive");
  const double kd = static_cast<double>(r.k_used);
  const double eps = epsilon.value_or(1.0);
  r.kappa_chosen = eps / 8.0 * std::sqrt(md / (nd * kd));
  const double kappa = r.kappa_chosen;
  const double n_lo = std::ceil(256.0 * nd * logn / (kappa * kappa));
  r.N_chosen = static_cast<long>(std::min(n_lo, 9.0e18));
  const double nn = static_cast<double>(r.N_chosen);
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double cp = big_c * sq;
  const double mw = 4.0 / std::sqrt(std::numbers::pi);

  auto& cs = r.constraints;
  cs.push_back(make_constraint("kappa_window", kappa, 0.5 / std::sqrt(kd) * std::sqrt(md / nd)));
  cs.push_back(make_constraint("kappa_window_perturbed", 2.0 * kappa, eps * 0.25 / std::sqrt(kd) * std::sqrt(md / nd)));
  cs.push_back(make_constraint("kappa_lower", cp * mw * std::sqrt(kd / md) * std::pow(nn, inv_q), kappa / 12.0));
  cs.push_back(make_constraint("dp_diameter", 4.0 * cp * cp * std::pow(nn, 2.0 * inv_q) * kd, nd));
  cs.push_back(make_constraint("mean_width_budget", big_c * sq * mw * std::sqrt(kd / md) * std::pow(nn, inv_q),
                               kappa / 12.0));
  cs.push_back(make_constraint("net_union_bound", 256.0 * md * nd * logn, kappa * kappa * md * nn));
  cs.push_back(make_constraint(
      "k_vs_N", kd,
      c_prime * std::min(md / (std::sqrt(q * nd) * std::pow(nn, inv_q)), md * nn / (nd * nd * logn))));
  cs.push_back(make_constraint("k_final", kd,
                               c1 * md /
                                   (sq * std::pow(nd, (4.0 + q) / (2.0 + 2.0 * q)) * std::pow(logn, 1.0 / (1.0 + q)))));
  cs.push_back(make_constraint("k_at_most_m0", kd, md));
  r.feasible = r.k_max >= 1;
  for (const auto& c : cs) r.feasible = r.feasible && c.satisfied;
  r.constants = constants.to_json();
  return r;
}

nlohmann::json to_json(const PlanReport& r) {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : r.constraints) cs.push_back(to_json(c));
  return {{"q", r.q},
          {"n", r.n},
          {"m0", r.m0},
          {"alpha_exponent", r.alpha_exponent},
          {"k_bound", finite_or_null(r.k_bound)},
          {"k_max", r.k_max},
          {"k_used", r.k_used},
          {"feasible", r.feasible},
          {"N_chosen", r.N_chosen},
          {"kappa_chosen", r.kappa_chosen},
          {"constraints", cs},
          {"constants", r.constants}};
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

BodyFamily::BodyFamily(Matrix g, long k, long n_blocks, double p, Body w)
    : g_(std::move(g)), k_(k), n_blocks_(n_blocks), p_(p), w_(std::move(w)) {
  if (k < 1 || n_blocks < 1 || g_.cols() != k * n_blocks) throw std::invalid_argument("BodyFamily: shape mismatch");
  if (w_.dim() != k) throw std::invalid_argument("BodyFamily: base norm dimension differs from k");
  for (long j = 0; j < n_blocks; ++j) {
    const Matrix b = block(j);
    k_parts_.push_back(w_.image(b));
    d_parts_.push_back(Body::ellipsoid_image(b));
  }
}

Matrix BodyFamily::block(long j) const {
  if (j < 0 || j >= n_blocks_) throw std::out_of_range("BodyFamily: block index");
  return g_.middleCols(j * k_, k_);
}

Body BodyFamily::k_p() const { return Body::p_convex_hull(p_, k_parts_, g_.rows()); }

Body BodyFamily::k_prime(long j) const {
  std::vector<Body> parts;
  for (long i = 0; i < n_blocks_; ++i)
    if (i != j) parts.push_back(k_parts_[static_cast<std::size_t>(i)]);
  return Body::p_convex_hull(p_, std::move(parts), g_.rows());
}

Body BodyFamily::d_p() const { return Body::p_convex_hull(p_, d_parts_, g_.rows()); }

Body BodyFamily::d_prime(long j) const {
  std::vector<Body> parts;
  for (long i = 0; i < n_blocks_; ++i)
    if (i != j) parts.push_back(d_parts_[static_cast<std::size_t>(i)]);
  return Body::p_convex_hull(p_, std::move(parts), g_.rows());
}

Body BodyFamily::d_set(const std::vector<int>& indices) const {
  std::vector<Body> parts;
  for (int i : indices) {
    if (i < 0 || i >= n_blocks_) throw std::out_of_range("BodyFamily: block index");
    parts.push_back(d_parts_[static_cast<std::size_t>(i)]);
  }
  return Body::p_convex_hull(p_, std::move(parts), g_.rows());
}

Subspace BodyFamily::e_j(long j) const {
  const Matrix b = block(j);
  const Subspace s = Subspace::span_of(b);
  if (s.dim() < k_) throw DegenerateInstance("block " + std::to_string(j) + " is rank deficient");
  return s;
}

Matrix sample_block_gaussian(long rows, long k, long n_blocks, double variance, const SeedStream& seed) {
  Matrix g(rows, k * n_blocks);
  for (long j = 0; j < n_blocks; ++j)
    g.middleCols(j * k, k) = sample_gaussian(rows, k, variance, seed.derive(static_cast<std::uint64_t>(j))).matrix();
  return g;
}

LocalInstance build_instance(const LocalConfig& cfg) {
  validate(cfg);
  Matrix g = sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), SeedStream{cfg.master_seed, 0}.derive(0));
  BodyFamily fam(g, cfg.k, cfg.N, cfg.p(), make_base_norm(cfg.base_norm, cfg.k));
  for (long j = 0; j < cfg.N; ++j) (void)fam.e_j(j);
  return LocalInstance{LinearMap(std::move(g), Provenance::gaussian), std::move(fam)};
}

BodyFamily quotient_family(const LocalConfig& cfg, const Matrix& g, const Subspace& quotient) {
  if (quotient.ambient_dim() != g.rows()) throw std::invalid_argument("quotient_family: dimension mismatch");
  return BodyFamily(quotient.frame().transpose() * g, cfg.k, cfg.N, cfg.p(), make_base_norm(cfg.base_norm, cfg.k));
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

SeedStream trial_stream(std::uint64_t master_seed, std::uint64_t index) {
  return SeedStream{master_seed, 0}.derive(1000 + index);
}

namespace {

// Witness weights of the l_q maximizer: t_i = (h_i/|h|_q)^{q-1}, so that
// sum t_i^p = 1 and sum t_i h_i = |h|_q.
std::vector<double> lq_weights(const std::vector<double>& h, double q) {
  std::vector<double> t(h.size(), 0.0);
  if (h.empty()) return t;
  if (std::isinf(q)) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.size(); ++i)
      if (h[i] > h[best]) best = i;
    t[best] = 1.0;
    return t;
  }
  Vector hv(static_cast<Eigen::Index>(h.size()));
  for (std::size_t i = 0; i < h.size(); ++i) hv(static_cast<Eigen::Index>(i)) = h[i];
  const double nrm = lq_norm(hv, q);
  if (nrm == 0.0) return t;
  for (std::size_t i = 0; i < h.size(); ++i) t[i] = std::pow(h[i] / nrm, q - 1.0);
  return t;
}

DecouplingWitness decouple_trial(const LocalConfig& cfg, const BodyFamily& qf, const std::vector<Vector>& z,
                                 const SeedStream& seed) {
  const int n_blocks = static_cast<int>(cfg.N);
  DecouplingWitness out;
  std::vector<Witness> ws;
  out.kappa_j.assign(static_cast<std::size_t>(n_blocks), 0.0);
  for (int j = 0; j < n_blocks; ++j) {
    const Vector& zj = z[static_cast<std::size_t>(j)];
    std::vector<double> h;
    std::vector<int> idx;
    for (int i = 0; i < n_blocks; ++i) {
      if (i == j) continue;
      h.push_back((qf.block(i).transpose() * zj).norm());
      idx.push_back(i);
    }
    const std::vector<double> t = lq_weights(h, cfg.q);
    double kj = 0.0;
    for (std::size_t a = 0; a < h.size(); ++a) kj += t[a] * h[a];
    out.kappa_j[static_cast<std::size_t>(j)] = kj;
    for (std::size_t a = 0; a < h.size(); ++a)
      if (t[a] * h[a] > 0.0) ws.push_back(Witness{idx[a], j, t[a] * h[a]});
  }
  out.instance = build_lambda_from_witnesses(n_blocks, out.kappa_j, ws);
  out.result = find_decoupling_set(out.instance, seed);
  if (out.result.status != DecouplingStatus::found) return out;
  std::vector<int> jc;
  for (int i = 0; i < n_blocks; ++i)
    if (!std::binary_search(out.result.j_set.begin(), out.result.j_set.end(), i)) jc.push_back(i);
  const Body djc = qf.d_set(jc);
  out.verified = true;
  for (int j : out.result.j_set) {
    const double r = djc.support(z[static_cast<std::size_t>(j)]) / (cfg.kappa / 3.0);
    out.jc_ratio.push_back(r);
    out.verified = out.verified && r > 1.0;
  }
  return out;
}

}  // namespace

TrialOutcome run_trial(const LocalConfig& cfg, const Matrix& g, const Subspace& quotient, const SeedStream& seed,
                       const TrialOptions& opt) {
  if (g.rows() != cfg.n || g.cols() != cfg.k * cfg.N) throw std::invalid_argument("run_trial: G has the wrong shape");
  if (quotient.ambient_dim() != cfg.n || quotient.dim() != cfg.m)
    throw std::invalid_argument("run_trial: quotient must have rank m in R^n");
  TrialOutcome out;
  out.seed = seed;
  out.q_descriptor = "haar-frame(m=" + std::to_string(cfg.m) + ",n=" + std::to_string(cfg.n) + ",stream=" +
                     hex64(seed.stream_index) + ")";
  const BodyFamily qf = quotient_family(cfg, g, quotient);
  const double ratio = std::sqrt(double(cfg.m) / double(cfg.n));
  const double lo = 0.5 * ratio;
  const double hi = 2.0 * ratio;
  const Body ball_m = Body::euclidean_ball(cfg.m);
  std::vector<Vector> z(static_cast<std::size_t>(cfg.N));

  for (long j = 0; j < cfg.N; ++j) {
    BlockEvents ev;
    const Matrix gj = qf.block(j);
    const std::vector<double> sv = singular_values(gj);
    ev.sv_max = sv.front();
    ev.sv_min = sv.back();
    ev.theta_prime0 = ev.sv_min >= lo && ev.sv_max <= hi;
    Subspace ej;
    bool degenerate = false;
    try {
      ej = qf.e_j(j);
    } catch (const DegenerateInstance&) {
      degenerate = true;
    }
    if (degenerate) {
      ev.theta_prime0 = false;
      ev.theta_prime_ratio = kInf;
      ev.brutal_ratio = kInf;
      z[static_cast<std::size_t>(j)] = Vector::Zero(cfg.m);
      out.blocks.push_back(ev);
      continue;
    }
    Budget b = opt.budget;
    b.seed = seed.derive(100 + static_cast<std::uint64_t>(j));
    const Body dprime = qf.d_prime(j);
    const InclusionReport tp = check_inclusion(dprime, ball_m, ej, cfg.kappa, b);
    ev.theta_prime = tp.holds;
    ev.theta_prime_ratio = tp.measured_ratio;
    ev.certification = tp.certification;
    z[static_cast<std::size_t>(j)] = tp.argmax;
    const InclusionReport br = check_inclusion(dprime, qf.d_j(j), ej, cfg.brutal_target(), b);
    ev.brutal = br.holds;
    ev.brutal_ratio = br.measured_ratio;
    if (ev.brutal && !out.winner_j) out.winner_j = static_cast<int>(j);
    out.blocks.push_back(ev);
  }

  if (opt.evaluate_exceptional) {
    const BodyFamily full(g, cfg.k, cfg.N, cfg.p(), make_base_norm(cfg.base_norm, cfg.k));
    const Body dp = full.d_p();
    Budget b = opt.budget;
    b.seed = seed.derive(1);
    const InclusionReport r = check_inclusion(dp, Body::euclidean_ball(cfg.n), std::nullopt, 2.0, b);
    out.theta1 = !r.holds;
    out.theta1_ratio = r.measured_ratio;
    out.mstar_dp = mstar(dp, opt.mstar_directions, seed.derive(2)).value;
    const double cp = cfg.constants.get("C") * std::sqrt(cfg.q);
    const double nq = std::isinf(cfg.q) ? 1.0 : std::pow(double(cfg.N), 1.0 / cfg.q);
    out.thetabar1_threshold = 2.0 * cp * std::sqrt(double(cfg.k) / double(cfg.n)) * nq;
    out.thetabar1 = out.mstar_dp > out.thetabar1_threshold;
  }

  bool all_fail = true;
  for (const auto& ev : out.blocks) all_fail = all_fail && !ev.theta_prime && std::isfinite(ev.theta_prime_ratio);
  if (opt.decouple_when_all_fail && all_fail) out.decoupling = decouple_trial(cfg, qf, z, seed.derive(3));
  return out;
}

TrialOutcome run_seeded_trial(const LocalConfig& cfg, std::uint64_t trial_index, const TrialOptions& opt) {
  const SeedStream ts = trial_stream(cfg.master_seed, trial_index);
  const Matrix g = sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0));
  const Subspace q = haar_subspace(cfg.n, cfg.m, ts.derive(1));
  TrialOutcome t = run_trial(cfg, g, q, ts.derive(2), opt);
  t.trial_index = trial_index;
  t.seed = ts;
  return t;
}

nlohmann::json to_json(const TrialOutcome& t) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : t.blocks)
    blocks.push_back({{"theta_prime", b.theta_prime},
                      {"theta_prime_ratio", finite_or_null(b.theta_prime_ratio)},
                      {"theta_prime0", b.theta_prime0},
                      {"sv_min", b.sv_min},
                      {"sv_max", b.sv_max},
                      {"brutal", b.brutal},
                      {"brutal_ratio", finite_or_null(b.brutal_ratio)},
                      {"certification", to_string(b.certification)}});
  nlohmann::json j{{"trial", t.trial_index},
                   {"seed", {{"master", t.seed.master_seed}, {"stream", hex64(t.seed.stream_index)}}},
                   {"quotient", t.q_descriptor},
                   {"blocks", blocks},
                   {"theta1", t.theta1},
                   {"theta1_ratio", finite_or_null(t.theta1_ratio)},
                   {"thetabar1", t.thetabar1},
                   {"mstar_dp", t.mstar_dp},
                   {"thetabar1_threshold", finite_or_null(t.thetabar1_threshold)},
                   {"winner_j", t.winner_j ? nlohmann::json(*t.winner_j) : nlohmann::json(nullptr)}};
  if (t.decoupling) {
    j["decoupling"] = {{"J", t.decoupling->result.j_set},
                       {"status", t.decoupling->result.status == DecouplingStatus::found ? "found" : "heuristic-miss"},
                       {"min_outside_mass", t.decoupling->result.min_outside_mass},
                       {"jc_ratio", t.decoupling->jc_ratio},
                       {"verified", t.decoupling->verified}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

SaturationCertificate certify_section(const Body& body, const Subspace& s, const Body& reference, double bound, int j,
                                      const Budget& budget) {
  const SectionConstant sc = section_isomorphism_constant(body, s, reference, budget);
  SaturationCertificate c;
  c.j = j;
  c.isomorphism_bound = sc.upper;
  c.complementation_bound = std::max(1.0, sc.outer.measured_ratio);
  c.bound = bound;
  c.method = sc.outer.certification;
  if (c.isomorphism_bound > bound + 1e-3 || c.complementation_bound > bound + 1e-3)
    throw CertificateRefused("certificate refused for block " + std::to_string(j) + ": measured " +
                                 std::to_string(c.isomorphism_bound) + " / " + std::to_string(c.complementation_bound) +
                                 " above " + std::to_string(bound),
                             c.isomorphism_bound, c.complementation_bound, bound);
  return c;
}

SaturationCertificate certify(const LocalConfig& cfg, const BodyFamily& quotient, int j, const Budget& budget) {
  return certify_section(quotient.k_p(), quotient.e_j(j), quotient.k_j(j), cfg.certificate_bound(), j, budget);
}

nlohmann::json to_json(const SaturationCertificate& c) {
  return {{"j", c.j},
          {"isomorphism_bound", c.isomorphism_bound},
          {"complementation_bound", c.complementation_bound},
          {"bound", c.bound},
          {"method", c.method == Certification::grid_exhaustive ? "grid" : "heuristic"}};
}

// ---------------------------------------------------------------------------
// Perturbation and cotype
// ---------------------------------------------------------------------------

PerturbationReport perturbation_margin(const LocalConfig& cfg) {
  PerturbationReport r;
  const double n = static_cast<double>(cfg.n);
  const double m = static_cast<double>(cfg.m);
  r.delta = 1.0 / (8.0 * std::sqrt(n));
  r.delta1 = 4.0 * r.delta * std::sqrt(n / m);
  r.conditions.push_back(make_constraint("delta_vs_window", r.delta, 0.125 * std::sqrt(m / n)));
  r.conditions.push_back(make_constraint("delta1_vs_kappa", r.delta1, cfg.kappa / 4.0));
  r.net_log_cardinality = m * (n - m) * std::log(cfg.constants.get("C2") / r.delta);
  r.crude_log_bound = m * n * std::log(n);
  r.conditions.push_back(make_constraint("net_vs_crude", r.net_log_cardinality, r.crude_log_bound));
  return r;
}

nlohmann::json to_json(const PerturbationReport& r) {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : r.conditions) cs.push_back(to_json(c));
  return {{"delta", r.delta},
          {"delta1", r.delta1},
          {"conditions", cs},
          {"net_log_cardinality", r.net_log_cardinality},
          {"crude_log_bound", r.crude_log_bound}};
}

namespace {

double cotype_ratio_split(const NormFn& upper_norm, const NormFn& lower_norm, const std::vector<Vector>& tuple,
                          double q, const SeedStream& seed) {
  if (tuple.empty()) throw std::invalid_argument("cotype_ratio: empty tuple");
  Vector norms(static_cast<Eigen::Index>(tuple.size()));
  for (std::size_t i = 0; i < tuple.size(); ++i) norms(static_cast<Eigen::Index>(i)) = lower_norm(tuple[i]);
  const double num = lq_norm(norms, q);
  const std::size_t v = tuple.size();
  double sum_sq = 0.0;
  long count = 0;
  auto add_pattern = [&](auto sign_of) {
    Vector s = tuple[0];
    for (std::size_t i = 1; i < v; ++i) s += sign_of(i) * tuple[i];
    const double nv = upper_norm(s);
    sum_sq += nv * nv;
    ++count;
  };
  if (v <= 12) {
    // The first sign is fixed to +1; the norm is even.
    const unsigned long patterns = 1UL << (v - 1);
    for (unsigned long mask = 0; mask < patterns; ++mask)
      add_pattern([mask](std::size_t i) { return (mask >> (i - 1)) & 1UL ? -1.0 : 1.0; });
  } else {
    auto rng = seed.engine();
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < 4096; ++s) {
      std::vector<double> signs(v, 1.0);
      for (std::size_t i = 1; i < v; ++i) signs[i] = coin(rng) ? -1.0 : 1.0;
      add_pattern([&signs](std::size_t i) { return signs[i]; });
    }
  }
  const double den = std::sqrt(sum_sq / static_cast<double>(count));
  return den > 0.0 ? num / den : kInf;
}

template <class RatioFn>
CotypeEstimate best_ratio(Eigen::Index dim, int vector_count, int trials, const SeedStream& seed, RatioFn ratio) {
  if (vector_count < 1 || trials < 0) throw std::invalid_argument("estimate_cotype_lower: bad counts");
  CotypeEstimate best;
  std::vector<Vector> coord;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(vector_count, dim); ++i) coord.push_back(Vector::Unit(dim, i));
  best.value = ratio(coord, seed.derive(0));
  best.best_trial = -1;
  for (int t = 0; t < trials; ++t) {
    const Matrix g = sample_gaussian(dim, vector_count, 1.0, seed.derive(1 + static_cast<std::uint64_t>(t))).matrix();
    std::vector<Vector> tuple;
    for (int i = 0; i < vector_count; ++i) tuple.push_back(g.col(i));
    const double r = ratio(tuple, seed.derive(100000 + static_cast<std::uint64_t>(t)));
    if (r > best.value) {
      best.value = r;
      best.best_trial = t;
    }
  }
  return best;
}

}  // namespace

double cotype_ratio(const NormFn& norm, const std::vector<Vector>& tuple, double q, const SeedStream& seed) {
  return cotype_ratio_split(norm, norm, tuple, q, seed);
}

CotypeEstimate estimate_cotype_lower(const NormFn& norm, Eigen::Index dim, double q, int vector_count, int trials,
                                     const SeedStream& seed) {
  return best_ratio(dim, vector_count, trials, seed, [&](const std::vector<Vector>& t, const SeedStream& s) {
    return cotype_ratio(norm, t, q, s);
  });
}

CotypeEstimate estimate_cotype_lower(const Body& unit_ball, double q, int vector_count, int trials,
                                     const SeedStream& seed) {
  const NormFn upper = [&](const Vector& x) { return gauge(unit_ball, x).upper; };
  const NormFn lower = [&](const Vector& x) { return gauge(unit_ball, x).lower; };
  return best_ratio(unit_ball.dim(), vector_count, trials, seed, [&](const std::vector<Vector>& t, const SeedStream& s) {
    return cotype_ratio_split(upper, lower, t, q, s);
  });
}

}  // namespace randsat
