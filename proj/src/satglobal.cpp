#include "randsat/satglobal.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace randsat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// Fixed test vectors for the second-moment identities; <xi, zeta> != 0 when k >= 2.
Vector moment_xi(long k) { return Vector::Unit(k, 0); }
Vector moment_zeta(long k) {
  if (k == 1) return Vector::Ones(1);
  Vector z = Vector::Zero(k);
  z(0) = 0.6;
  z(1) = 0.8;
  return z;
}

}  // namespace

std::string to_string(RotationMode m) {
  switch (m) {
    case RotationMode::haar: return "haar";
    case RotationMode::neg_haar: return "neg_haar";
    case RotationMode::identity: return "identity";
    case RotationMode::near_identity: return "near_identity";
  }
  return "unknown";
}

RotationMode rotation_mode_from_string(const std::string& s) {
  if (s == "haar") return RotationMode::haar;
  if (s == "neg_haar") return RotationMode::neg_haar;
  if (s == "identity") return RotationMode::identity;
  if (s == "near_identity") return RotationMode::near_identity;
  throw std::invalid_argument("unknown rotation mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

GlobalConfig auto_plan_global(long n, long k, long N, const Constants& constants) {
  if (k < 1) throw std::invalid_argument("auto_plan_global: k must be positive");
  GlobalConfig c;
  c.n = n;
  c.k = k;
  c.N = N;
  c.constants = constants;
  const double s = constants.get("c_prime") / std::sqrt(static_cast<double>(k));
  c.kappa = s * s * s;
  c.alpha0 = s * s;
  c.gamma = s;
  c.delta = c.kappa / 6.0;
  return c;
}

std::vector<Constraint> global_constraints(const GlobalConfig& cfg) {
  const double n = static_cast<double>(cfg.n);
  const double k = static_cast<double>(cfg.k);
  const double logN = std::log(static_cast<double>(cfg.N));
  const double c = cfg.c_case1();
  const double ck = cfg.constants.get("c_k");
  std::vector<Constraint> out;
  out.push_back(
      make_constraint("kappa_lower", cfg.constants.get("C_prime") * std::sqrt(std::max(k, logN) / n), cfg.kappa));
  out.push_back(make_constraint("case1_margin", (2.0 * std::sqrt(2.0) / c) / std::sqrt(cfg.alpha0) * cfg.kappa,
                                c * std::sqrt(cfg.alpha0) / std::sqrt(k)));
  out.push_back(make_constraint("case2_margin",
                                2.0 * (cfg.kappa + 2.0 * std::sqrt(2.0 * cfg.alpha0) + 2.0 * cfg.gamma),
                                1.0 / std::sqrt(k)));
  const double third = logN > 0.0 ? std::cbrt(n / logN) : kInf;
  out.push_back(make_constraint("k_vs_n", k, ck * std::min(std::pow(n, 0.25), third)));
  out.push_back(make_constraint("k_vs_case1_measure", k, ck * std::sqrt(n / (1.0 + std::log(n)))));
  return out;
}

void validate(const GlobalConfig& cfg) {
  if (!(cfg.k >= 1 && cfg.N >= 1 && 2 * cfg.k <= cfg.n))
    throw std::invalid_argument("global config: need k >= 1, N >= 1 and 2k <= n");
  if (!(cfg.kappa > 0.0 && cfg.kappa <= 1.0)) throw std::invalid_argument("global config: kappa must lie in (0, 1]");
  if (!(cfg.alpha0 > 0.0 && cfg.alpha0 <= 1.0)) throw std::invalid_argument("global config: alpha0 must lie in (0, 1]");
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("global config: gamma must be positive");
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("global config: delta must be positive");
  if (cfg.rotation == RotationMode::near_identity && !(cfg.rotation_scale > 0.0))
    throw std::invalid_argument("global config: rotation_scale must be positive");
  validate_base_norm(cfg.base_norm, cfg.k);
}

nlohmann::json to_json(const GlobalConfig& cfg) {
  nlohmann::json j{{"n", cfg.n},
                   {"k", cfg.k},
                   {"N", cfg.N},
                   {"kappa", cfg.kappa},
                   {"alpha0", cfg.alpha0},
                   {"gamma", cfg.gamma},
                   {"delta", cfg.delta},
                   {"base_norm", to_json(cfg.base_norm)},
                   {"seed", cfg.master_seed},
                   {"rotation", to_string(cfg.rotation)}};
  if (cfg.rotation == RotationMode::near_identity) j["rotation_scale"] = cfg.rotation_scale;
  return j;
}

GlobalConfig global_config_from_json(const nlohmann::json& j, const Constants& constants) {
  GlobalConfig c = auto_plan_global(j.value("n", 48L), j.value("k", 2L), j.value("N", 24L), constants);
  if (j.contains("kappa")) {
    c.kappa = j.at("kappa").get<double>();
    c.delta = c.kappa / 6.0;
  }
  c.alpha0 = j.value("alpha0", c.alpha0);
  c.gamma = j.value("gamma", c.gamma);
  c.delta = j.value("delta", c.delta);
  if (j.contains("base_norm")) c.base_norm = base_norm_from_json(j.at("base_norm"));
  c.master_seed = j.value("seed", std::uint64_t{0});
  if (j.contains("rotation")) c.rotation = rotation_mode_from_string(j.at("rotation").get<std::string>());
  c.rotation_scale = j.value("rotation_scale", c.rotation_scale);
  return c;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

GlobalInstance build_global_instance(const GlobalConfig& cfg, const Matrix& g, const Matrix& u) {
  if (g.rows() != cfg.n || g.cols() != cfg.k * cfg.N) throw std::invalid_argument("global instance: G has the wrong shape");
  if (u.rows() != cfg.n || u.cols() != cfg.n) throw std::invalid_argument("global instance: u must be n x n");
  (void)rotation_stats(u);  // rejects non-orthogonal u
  BodyFamily fam(g, cfg.k, cfg.N, 1.0, make_base_norm(cfg.base_norm, cfg.k));
  for (long j = 0; j < cfg.N; ++j) (void)fam.e_j(j);
  Body k_body = fam.k_p();
  Body k_sum = Body::minkowski_sum({k_body, Body::rotated(u, k_body)});
  return GlobalInstance{g, u, std::move(fam), std::move(k_body), std::move(k_sum)};
}

Matrix sample_rotation(const GlobalConfig& cfg, const SeedStream& seed) {
  switch (cfg.rotation) {
    case RotationMode::haar: return haar_rotation(cfg.n, seed).matrix();
    case RotationMode::neg_haar: return -haar_rotation(cfg.n, seed).matrix();
    case RotationMode::identity: return Matrix::Identity(cfg.n, cfg.n);
    case RotationMode::near_identity:
      return perturb_rotation(Matrix::Identity(cfg.n, cfg.n), cfg.rotation_scale, seed);
  }
  throw std::invalid_argument("sample_rotation: unknown mode");
}

SeedStream global_trial_stream(std::uint64_t master_seed, std::uint64_t index) {
  return SeedStream{master_seed, 1}.derive(1000 + index);
}

GlobalInstance build_global_instance(const GlobalConfig& cfg) {
  validate(cfg);
  const SeedStream ts = global_trial_stream(cfg.master_seed, 0);
  return build_global_instance(cfg, sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0)),
                               sample_rotation(cfg, ts.derive(1)));
}

// ---------------------------------------------------------------------------
// Lemma checkers
// ---------------------------------------------------------------------------

MomentRatio gaussian_moment_ratio(long n, long k, const Matrix& u, const Vector& xi, const Vector& zeta, int samples,
                                  const SeedStream& seed) {
  if (samples < 2) throw std::invalid_argument("gaussian_moment_ratio: need at least two samples");
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Matrix a = sample_gaussian(n, k, 1.0 / double(n), seed.derive(static_cast<std::uint64_t>(i))).matrix();
    const double f = (a * xi + u * (a * zeta)).norm();
    s1 += f;
    s2 += f * f;
    s4 += f * f * f * f;
  }
  MomentRatio r;
  r.first = s1 / samples;
  r.second = s2 / samples;
  r.ratio = r.first / std::sqrt(r.second);
  const double var2 = std::max(0.0, s4 / samples - r.second * r.second);
  r.std_error = std::sqrt(var2 / samples) / r.second;  // relative error of the second moment
  return r;
}

LemmaCheckReport check_case1_lemma(long n, long k, const Matrix& u, double c, int trials, const SeedStream& seed,
                                   const CaseLemmaOptions& opt) {
  if (n < 2 * k || k < 1 || trials < 1) throw std::invalid_argument("check_case1_lemma: need 1 <= k, 2k <= n");
  const RotationStats st = rotation_stats(u);
  if (st.sign_flipped) throw PreconditionViolation("check_case1_lemma: tr u must be non-negative");
  const double alpha = st.alpha;
  const double threshold = c * std::sqrt(alpha);
  LemmaCheckReport r;
  r.lemma_id = LemmaId::case1;
  r.trials = trials;
  int first_ok = 0, second_ok = 0;
  double sum_min = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Matrix a = sample_gaussian(n, k, 1.0 / double(n), seed.derive(static_cast<std::uint64_t>(t))).matrix();
    Matrix pair(n, 2 * k);
    pair << a, u * a;
    const double smin = min_singular_value(pair);
    sum_min += smin;
    const bool first = smin >= threshold;
    const bool second = operator_norm(a) <= 2.0;
    first_ok += first;
    second_ok += second;
    r.successes += first && second;
  }
  r.empirical_mean = sum_min / trials;
  r.predicted_bound =
      alpha > 0.0 ? std::max(0.0, 1.0 - std::exp(-c * alpha * double(n) + double(k) * std::log(2.0 / alpha) / c)) : 0.0;

  const Vector xi = moment_xi(k), zeta = moment_zeta(k);
  const MomentRatio m = gaussian_moment_ratio(n, k, u, xi, zeta, opt.moment_samples, seed.derive(1u << 30));
  const double predicted = xi.squaredNorm() + zeta.squaredNorm() + 2.0 * xi.dot(zeta) * u.trace() / double(n);
  r.details = {{"alpha", alpha},
               {"threshold", threshold},
               {"first_inequality_frequency", double(first_ok) / trials},
               {"second_inequality_frequency", double(second_ok) / trials},
               {"second_moment", m.second},
               {"second_moment_predicted", predicted},
               {"second_moment_rel_error", std::abs(m.second - predicted) / predicted},
               {"moment_ratio", m.ratio}};
  return r;
}

LemmaCheckReport check_case2_lemma(long n, long k, const Matrix& t, double gamma, int trials, const SeedStream& seed,
                                   const CaseLemmaOptions& opt) {
  if (k < 1 || trials < 1 || t.rows() != n || t.cols() != n)
    throw std::invalid_argument("check_case2_lemma: T must be n x n, k >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("check_case2_lemma: gamma must be positive");
  const double hs = t.norm();
  const double op = operator_norm(t);
  const double threshold = 2.0 * (hs / std::sqrt(double(n)) + gamma);
  LemmaCheckReport r;
  r.lemma_id = LemmaId::case2;
  r.trials = trials;
  double sum_norm = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Matrix a = sample_gaussian(n, k, 1.0 / double(n), seed.derive(static_cast<std::uint64_t>(i))).matrix();
    const double v = operator_norm(Matrix(t * a));
    sum_norm += v;
    r.successes += v <= threshold;
  }
  r.empirical_mean = sum_norm / trials;
  r.predicted_bound =
      op > 0.0 ? std::max(0.0, 1.0 - std::exp(-gamma * gamma * double(n) / (2.0 * op * op) + 2.0 * double(k))) : 1.0;

  const Vector xi = moment_xi(k);
  double s2 = 0.0;
  for (int i = 0; i < opt.moment_samples; ++i) {
    const Matrix a =
        sample_gaussian(n, k, 1.0 / double(n), seed.derive((1u << 30) + static_cast<std::uint64_t>(i))).matrix();
    s2 += (t * (a * xi)).squaredNorm();
  }
  const double empirical = s2 / opt.moment_samples;
  const double predicted = hs * hs / double(n) * xi.squaredNorm();
  r.details = {{"threshold", threshold},
               {"hs_norm", hs},
               {"operator_norm", op},
               {"second_moment", empirical},
               {"second_moment_predicted", predicted},
               {"second_moment_rel_error", predicted > 0.0 ? std::abs(empirical - predicted) / predicted : empirical}};
  return r;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

namespace {

struct PairGeometry {
  double t_inverse_svd = kInf;
  double t_inverse_direct = kInf;
};

// T*(x, y) = x + y on E ⊕ u(E); |T^{-1}| = 1/sigma_min[F | uF].
PairGeometry pair_geometry(const Subspace& e, const Matrix& u) {
  const Matrix f = e.frame();
  Matrix tstar(f.rows(), 2 * f.cols());
  tstar << f, u * f;
  PairGeometry g;
  const double smin = min_singular_value(tstar);
  g.t_inverse_svd = smin > 0.0 ? 1.0 / smin : kInf;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(tstar.transpose() * tstar);
  const double lmin = eig.eigenvalues().minCoeff();
  g.t_inverse_direct = lmin > 0.0 ? 1.0 / std::sqrt(lmin) : kInf;
  return g;
}

Body rotation_sum(const Body& b, const Matrix& u) { return Body::minkowski_sum({b, Body::rotated(u, b)}); }

}  // namespace

GlobalTrialOutcome run_global_trial(const GlobalConfig& cfg, const GlobalInstance& inst, const SeedStream& seed,
                                    const Budget& budget) {
  GlobalTrialOutcome out;
  out.seed = seed;
  const RotationStats st = rotation_stats(inst.u);
  out.alpha = st.alpha;
  out.sign_flipped = st.sign_flipped;
  out.case_id = st.alpha >= cfg.alpha0 ? 1 : 2;
  out.u_descriptor = to_string(cfg.rotation) + "(n=" + std::to_string(cfg.n) + ",stream=" + hex64(seed.stream_index) +
                     (st.sign_flipped ? ",negated" : "") + ")";
  const Matrix u = st.sign_flipped ? Matrix(-inst.u) : inst.u;
  const BodyFamily& fam = inst.family;
  const double rk = 1.0 / std::sqrt(static_cast<double>(cfg.k));
  const double c = cfg.c_case1();
  const Body ball = Body::euclidean_ball(cfg.n);
  const Matrix id_minus_u = Matrix::Identity(cfg.n, cfg.n) - u;

  for (long j = 0; j < cfg.N; ++j) {
    GlobalBlockEvents ev;
    const Matrix a = fam.block(j);
    const Subspace e = fam.e_j(j);
    Budget b = budget;
    b.seed = seed.derive(100 + static_cast<std::uint64_t>(j));

    const Body dsum_prime = rotation_sum(fam.d_prime(j), u);
    const InclusionReport xp = check_inclusion(dsum_prime, ball, e, cfg.kappa, b);
    ev.xi_prime_radius = xp.measured_ratio * cfg.kappa;
    ev.xi_prime = xp.holds;
    ev.sv_min = singular_values(a).back();
    ev.xi0_prime = ev.sv_min >= 0.5;
    ev.id_minus_u_norm = operator_norm(Matrix(id_minus_u * a));
    ev.xi0_second = ev.id_minus_u_norm <= 2.0 * (std::sqrt(2.0 * out.alpha) + cfg.gamma);

    if (out.case_id == 2) {
      ev.chain_value = (ev.xi_prime_radius + ev.id_minus_u_norm) / ev.sv_min;
      ev.chain = ev.chain_value <= rk;
      if (!out.winner_j && ev.xi_prime && ev.xi0_prime && ev.xi0_second && ev.chain) out.winner_j = int(j);
    } else {
      const Subspace ue = e.rotated(u);
      const InclusionReport xs = check_inclusion(dsum_prime, ball, ue, cfg.kappa, b);
      ev.xi_second_radius = xs.measured_ratio * cfg.kappa;
      ev.xi_second = xs.holds;
      Matrix pair(cfg.n, 2 * cfg.k);
      pair << a, u * a;
      ev.sigma_min_pair = min_singular_value(pair);
      ev.block_norm = operator_norm(a);
      ev.xi0 = ev.sigma_min_pair >= c * std::sqrt(out.alpha) && ev.block_norm <= 2.0;
      const Subspace h = subspace_sum(e, ue);
      ev.h_dim = h.dim();
      const PairGeometry pg = pair_geometry(e, u);
      ev.t_inverse_norm_svd = pg.t_inverse_svd;
      ev.t_inverse_norm_direct = pg.t_inverse_direct;
      ev.hj_projection = pg.t_inverse_svd <= (2.0 / c) / std::sqrt(out.alpha);
      if (ev.h_dim == 2 * cfg.k) {
        const Body dsum_j = rotation_sum(fam.d_j(j), u);
        const InclusionReport dr =
            check_inclusion(Body::euclidean_ball(h, c * std::sqrt(out.alpha)), dsum_j, h, 1.0, b);
        ev.delta_ratio = dr.measured_ratio;
        ev.delta = dr.holds;
        const InclusionReport ch = check_inclusion(dsum_prime, dsum_j, h, rk, b);
        ev.chain_value = ch.measured_ratio;
        ev.chain = ch.holds;
      } else {
        ev.delta_ratio = kInf;
        ev.chain_value = kInf;
      }
      if (!out.winner_j && ev.xi0 && ev.xi_prime && ev.xi_second && ev.delta && ev.chain) out.winner_j = int(j);
    }
    out.blocks.push_back(ev);
  }

  Budget b = budget;
  b.seed = seed.derive(1);
  const InclusionReport o1 = check_inclusion(fam.d_p(), ball, std::nullopt, 2.0, b);
  out.omega1 = !o1.holds;
  out.omega1_ratio = o1.measured_ratio;
  return out;
}

GlobalTrialOutcome run_seeded_global_trial(const GlobalConfig& cfg, std::uint64_t trial_index, const Budget& budget) {
  const SeedStream ts = global_trial_stream(cfg.master_seed, trial_index);
  const GlobalInstance inst =
      build_global_instance(cfg, sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0)),
                            sample_rotation(cfg, ts.derive(1)));
  GlobalTrialOutcome t = run_global_trial(cfg, inst, ts.derive(2), budget);
  t.trial_index = trial_index;
  t.seed = ts;
  return t;
}

nlohmann::json to_json(const GlobalTrialOutcome& t) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : t.blocks) {
    nlohmann::json e{{"xi_prime", b.xi_prime},
                     {"xi_prime_radius", b.xi_prime_radius},
                     {"xi0_prime", b.xi0_prime},
                     {"sv_min", b.sv_min},
                     {"xi0_second", b.xi0_second},
                     {"id_minus_u_norm", b.id_minus_u_norm},
                     {"chain", b.chain},
                     {"chain_value", finite_or_null(b.chain_value)}};
    if (t.case_id == 1) {
      e["xi_second"] = b.xi_second;
      e["xi_second_radius"] = b.xi_second_radius;
      e["xi0"] = b.xi0;
      e["sigma_min_pair"] = b.sigma_min_pair;
      e["block_norm"] = b.block_norm;
      e["delta"] = b.delta;
      e["h_dim"] = b.h_dim;
      e["delta_ratio"] = finite_or_null(b.delta_ratio);
      e["hj_projection"] = b.hj_projection;
      e["t_inverse_norm"] = finite_or_null(b.t_inverse_norm_svd);
    }
    blocks.push_back(e);
  }
  return {{"trial", t.trial_index},
          {"seed", {{"master", t.seed.master_seed}, {"stream", hex64(t.seed.stream_index)}}},
          {"rotation", t.u_descriptor},
          {"alpha", t.alpha},
          {"case", t.case_id},
          {"blocks", blocks},
          {"omega1", t.omega1},
          {"omega1_ratio", t.omega1_ratio},
          {"winner_j", t.winner_j ? nlohmann::json(*t.winner_j) : nlohmann::json(nullptr)}};
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

GlobalCertificate certify_global(const GlobalConfig& cfg, const GlobalInstance& inst, const GlobalTrialOutcome& outcome,
                                 const Budget& budget, int oplus_points) {
  if (!outcome.winner_j) throw PreconditionViolation("certify_global: the trial has no winner");
  const int j = *outcome.winner_j;
  const Matrix u = outcome.sign_flipped ? Matrix(-inst.u) : inst.u;
  const BodyFamily& fam = inst.family;
  GlobalCertificate c;
  c.j = j;
  c.case_id = outcome.case_id;
  const Subspace e = fam.e_j(j);
  if (outcome.case_id == 2) {
    c.section = e;
    c.bound = 3.0;
    const SectionConstant sc = section_isomorphism_constant(inst.k_sum, e, fam.k_j(j), budget);
    c.isomorphism_bound = sc.upper;
    c.complementation_bound = std::max(1.0, sc.outer.measured_ratio);
    c.method = sc.outer.certification;
  } else {
    const Subspace h = subspace_sum(e, e.rotated(u));
    c.section = h;
    // x + uy with x = sum t_i a_i, y = sum s_i c_i projects into
    // t_j K_j + s_j u(K_j) + max(1 - t_j, 1 - s_j) rho (K_j + u(K_j)).
    c.bound = 1.0 + outcome.blocks[static_cast<std::size_t>(j)].chain_value;
    const Body ref = rotation_sum(fam.k_j(j), u);
    const SectionConstant sc = section_isomorphism_constant(inst.k_sum, h, ref, budget);
    c.isomorphism_bound = sc.upper;
    c.complementation_bound = std::max(1.0, sc.outer.measured_ratio);
    c.method = sc.outer.certification;
    c.summand_complementation = check_inclusion(inst.k_sum, fam.k_j(j), e, 1.0, budget).measured_ratio;

    // The section K_j + u(K_j) = [A | uA](B_W ⊕_∞ B_W): compare its gauge with
    // the max of the two W-gauges at sampled points.
    const Matrix a = fam.block(j);
    const Body ref_h = ref.restricted(h);
    const Body& w = fam.w();
    auto rng = budget.seed.derive(77).engine();
    std::normal_distribution<double> normal;
    double dev = 0.0;
    for (int i = 0; i < oplus_points; ++i) {
      Vector w1(cfg.k), w2(cfg.k);
      for (long t = 0; t < cfg.k; ++t) w1(t) = normal(rng);
      for (long t = 0; t < cfg.k; ++t) w2(t) = normal(rng);
      const Vector x = h.frame().transpose() * (a * w1 + u * (a * w2));
      const GaugeInterval g1 = gauge(w, w1), g2 = gauge(w, w2);
      const double expect = std::max(0.5 * (g1.lower + g1.upper), 0.5 * (g2.lower + g2.upper));
      const GaugeInterval gx = gauge(ref_h, x);
      dev = std::max({dev, std::abs(gx.lower / expect - 1.0), std::abs(gx.upper / expect - 1.0)});
    }
    c.oplus_inf_deviation = dev;
    c.unit_bound_met = c.isomorphism_bound <= 1.0 + 1e-3 && c.complementation_bound <= 1.0 + 1e-3;
  }
  if (c.isomorphism_bound > c.bound + 1e-3 || c.complementation_bound > c.bound + 1e-3)
    throw CertificateRefused("global certificate refused for block " + std::to_string(j) + " (case " +
                                 std::to_string(c.case_id) + "): measured " + std::to_string(c.isomorphism_bound) +
                                 " / " + std::to_string(c.complementation_bound) + " above " + std::to_string(c.bound),
                             c.isomorphism_bound, c.complementation_bound, c.bound);
  return c;
}

nlohmann::json to_json(const GlobalCertificate& c) {
  nlohmann::json j{{"j", c.j},
                   {"case", c.case_id},
                   {"section_dim", c.section.dim()},
                   {"isomorphism_bound", c.isomorphism_bound},
                   {"complementation_bound", c.complementation_bound},
                   {"bound", c.bound},
                   {"method", c.method == Certification::grid_exhaustive ? "grid" : "heuristic"}};
  if (c.oplus_inf_deviation) j["oplus_inf_deviation"] = *c.oplus_inf_deviation;
  if (c.summand_complementation) j["summand_complementation"] = *c.summand_complementation;
  if (c.unit_bound_met) j["unit_bound_met"] = *c.unit_bound_met;
  return j;
}

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

double orthogonal_net_log_cardinality(long n, double delta, const Constants& constants) {
  if (n < 1 || !(delta > 0.0)) throw std::invalid_argument("orthogonal_net_log_cardinality: bad arguments");
  const double dim = 0.5 * double(n) * double(n - 1);
  return dim * std::log(constants.get("C_net") / delta);
}

GlobalPerturbationReport perturb_and_replan(const GlobalConfig& cfg) {
  GlobalPerturbationReport r;
  const double n = static_cast<double>(cfg.n);
  const double k = static_cast<double>(cfg.k);
  const double c = cfg.c_case1();
  r.delta = cfg.kappa / 6.0;
  r.delta_scale = std::pow(n, -3.0 / 8.0);
  r.conditions.push_back(make_constraint("delta_vs_kappa_half", r.delta, cfg.kappa / 2.0));
  r.conditions.push_back(make_constraint("delta_vs_gamma", r.delta, cfg.gamma));
  r.conditions.push_back(make_constraint("delta_vs_case1", r.delta, c * std::sqrt(cfg.alpha0) / 4.0));
  r.conditions.push_back(make_constraint("delta_vs_kappa_sixth", r.delta, cfg.kappa / 6.0));
  r.conditions.push_back(make_constraint("delta_vs_alpha0_half", r.delta, cfg.alpha0 / 2.0));
  const double beta = cfg.constants.get("beta");
  const double c5 = cfg.constants.get("c5");
  r.conditions.push_back(
      make_constraint("net_vs_N", beta * n * n * (1.0 + std::log(n)), c5 * double(cfg.N) / (k * k * k)));
  r.net_log_cardinality = orthogonal_net_log_cardinality(cfg.n, r.delta, cfg.constants);
  r.sphere_net_log_cardinality = 2.0 * k * std::log(1.0 + 2.0 / (c * std::sqrt(cfg.alpha0) / 4.0));
  r.N_required = beta * n * n * (1.0 + std::log(n)) * k * k * k / c5;
  return r;
}

nlohmann::json to_json(const GlobalPerturbationReport& r) {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : r.conditions) cs.push_back(to_json(c));
  return {{"delta", r.delta},
          {"delta_scale", r.delta_scale},
          {"conditions", cs},
          {"net_log_cardinality", r.net_log_cardinality},
          {"sphere_net_log_cardinality", r.sphere_net_log_cardinality},
          {"N_required", r.N_required}};
}

bool StabilityReport::all_hold() const {
  if (!alpha_lipschitz) return false;
  for (const auto& i : items)
    if (!i.implication_holds()) return false;
  return true;
}

StabilityReport perturbation_stability_check(const GlobalConfig& cfg, const Matrix& g, const Matrix& u,
                                             const Matrix& u_prime, const Budget& budget,
                                             const std::vector<int>& blocks) {
  StabilityReport r;
  r.distance = operator_norm(Matrix(u - u_prime));
  if (r.distance > cfg.delta * (1.0 + 1e-12))
    throw PreconditionViolation("perturbation_stability_check: |u - u'| exceeds delta");
  const RotationStats st = rotation_stats(u);
  const RotationStats st2 = rotation_stats(u_prime);
  r.alpha_before = st.alpha;
  r.alpha_after = st2.alpha;
  r.alpha_lipschitz = std::abs(st.alpha - st2.alpha) <= r.distance + 1e-12;
  // Both rotations use the sign normalization of u.
  const double sign = st.sign_flipped ? -1.0 : 1.0;
  const Matrix ue = sign * u;
  const Matrix ue2 = sign * u_prime;
  const double alpha = st.alpha;

  BodyFamily fam(g, cfg.k, cfg.N, 1.0, make_base_norm(cfg.base_norm, cfg.k));
  const Body ball = Body::euclidean_ball(cfg.n);
  {
    Budget b = budget;
    b.seed = budget.seed.derive(1);
    if (!check_inclusion(fam.d_p(), ball, std::nullopt, 2.0, b).holds)
      throw PreconditionViolation("perturbation_stability_check: D is not inside 2 B_2^n");
  }
  std::vector<int> js = blocks;
  if (js.empty())
    for (int j = 0; j < cfg.N; ++j) js.push_back(j);
  const double c = cfg.c_case1();
  const double cap = std::sqrt(2.0 * alpha) + cfg.gamma;
  for (int j : js) {
    const Matrix a = fam.block(j);
    const Subspace e = fam.e_j(j);
    Budget b = budget;
    b.seed = budget.seed.derive(100 + static_cast<std::uint64_t>(j));
    const Body dprime = fam.d_prime(j);

    const double sv = singular_values(a).back();
    r.items.push_back({"xi0_prime", j, sv >= 0.5, sv >= 0.5, sv, sv});

    const double xp1 = check_inclusion(rotation_sum(dprime, ue), ball, e, 1.0, b).measured_ratio;
    const double xp2 = check_inclusion(rotation_sum(dprime, ue2), ball, e, 1.0, b).measured_ratio;
    r.items.push_back({"xi_prime", j, xp1 <= cfg.kappa, xp2 <= 2.0 * cfg.kappa, xp1, xp2});

    const double xs1 = check_inclusion(rotation_sum(dprime, ue), ball, e.rotated(ue), 1.0, b).measured_ratio;
    const double xs2 = check_inclusion(rotation_sum(dprime, ue2), ball, e.rotated(ue2), 1.0, b).measured_ratio;
    r.items.push_back({"xi_second", j, xs1 <= cfg.kappa, xs2 <= 2.0 * cfg.kappa, xs1, xs2});

    const Matrix id = Matrix::Identity(cfg.n, cfg.n);
    const double b1 = operator_norm(Matrix((id - ue) * a));
    const double b2 = operator_norm(Matrix((id - ue2) * a));
    r.items.push_back({"xi0_second", j, b1 <= 2.0 * cap, b2 <= 3.0 * cap, b1, b2});

    Matrix p1(cfg.n, 2 * cfg.k), p2(cfg.n, 2 * cfg.k);
    p1 << a, ue * a;
    p2 << a, ue2 * a;
    const double s1 = min_singular_value(p1);
    const double s2 = min_singular_value(p2);
    r.items.push_back({"xi0", j, s1 >= c * std::sqrt(alpha), s2 >= 0.5 * c * std::sqrt(alpha), s1, s2});
  }
  return r;
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& i : r.items)
    items.push_back({{"name", i.name},
                     {"j", i.j},
                     {"premise", i.premise},
                     {"conclusion", i.conclusion},
                     {"before", i.before},
                     {"after", i.after},
                     {"implication_holds", i.implication_holds()}});
  return {{"distance", r.distance},
          {"alpha_before", r.alpha_before},
          {"alpha_after", r.alpha_after},
          {"alpha_lipschitz", r.alpha_lipschitz},
          {"items", items},
          {"all_hold", r.all_hold()}};
}

}  // namespace randsat
