#pragma once

// Rotation sums K + u(K) of a random body K = G(B_Z), Z = l_1^N(W): the
// alpha-based case split, the two concentration lemmas, per-block events,
// certificates and the perturbation calculators.

#include "randsat/meanwidth.hpp"
#include "randsat/satlocal.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace randsat {

enum class RotationMode { haar, neg_haar, identity, near_identity };
std::string to_string(RotationMode m);
RotationMode rotation_mode_from_string(const std::string& s);

struct GlobalConfig {
  long n = 48;
  long k = 2;
  long N = 24;
  double kappa = 0.0;
  double alpha0 = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  BaseNormSpec base_norm;
  std::uint64_t master_seed = 0;
  Constants constants = Constants::defaults();
  RotationMode rotation = RotationMode::haar;
  double rotation_scale = 0.05;  ///< operator distance from Id in near_identity mode

  [[nodiscard]] double c_case1() const { return constants.get("c_case1"); }
};

/// kappa^{1/3} = sqrt(alpha0) = gamma = c'/sqrt(k), delta = kappa/6.
GlobalConfig auto_plan_global(long n, long k, long N, const Constants& constants = Constants::defaults());

/// The parameter restrictions as recomputable inequalities (reported, not enforced).
std::vector<Constraint> global_constraints(const GlobalConfig& cfg);

void validate(const GlobalConfig& cfg);
nlohmann::json to_json(const GlobalConfig& cfg);
/// Missing kappa/alpha0/gamma/delta are filled from auto_plan_global.
GlobalConfig global_config_from_json(const nlohmann::json& j, const Constants& constants = Constants::defaults());

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

struct GlobalInstance {
  Matrix g;  ///< n x Nk, variance 1/n
  Matrix u;  ///< as sampled, before sign normalization
  BodyFamily family;
  Body k_body;  ///< K = conv(K_j)
  Body k_sum;   ///< K + u(K)
};

GlobalInstance build_global_instance(const GlobalConfig& cfg, const Matrix& g, const Matrix& u);

Matrix sample_rotation(const GlobalConfig& cfg, const SeedStream& seed);

/// Stream of trial `index`: G from derive(0), u from derive(1).
SeedStream global_trial_stream(std::uint64_t master_seed, std::uint64_t index);

/// Instance of trial 0.
GlobalInstance build_global_instance(const GlobalConfig& cfg);

// ---------------------------------------------------------------------------
// Lemma checkers
// ---------------------------------------------------------------------------

struct CaseLemmaOptions {
  int moment_samples = 4000;  ///< samples for the second-moment identity
};

/// Per trial: sigma_min[A | uA] >= c alpha^{1/2} and |A| <= 2 (the second
/// inequality).  Requires tr u >= 0.
LemmaCheckReport check_case1_lemma(long n, long k, const Matrix& u, double c, int trials, const SeedStream& seed,
                                   const CaseLemmaOptions& opt = {});

/// Per trial: |TA| <= 2(|T|_HS/sqrt(n) + gamma).
LemmaCheckReport check_case2_lemma(long n, long k, const Matrix& t, double gamma, int trials, const SeedStream& seed,
                                   const CaseLemmaOptions& opt = {});

struct MomentRatio {
  double first = 0.0;   ///< E f
  double second = 0.0;  ///< E f^2
  double ratio = 0.0;   ///< E f / sqrt(E f^2)
  double std_error = 0.0;
};

/// f = |A xi + u A zeta| for Gaussian A (n x k, variance 1/n).
MomentRatio gaussian_moment_ratio(long n, long k, const Matrix& u, const Vector& xi, const Vector& zeta, int samples,
                                  const SeedStream& seed);

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct GlobalBlockEvents {
  // both cases
  bool xi_prime = false;  ///< P_{E_j}(D'_j + u D'_j) ⊂ kappa B
  double xi_prime_radius = 0.0;
  bool xi0_prime = false;  ///< (1/2)(B ∩ E_j) ⊂ D_j
  double sv_min = 0.0;
  bool xi0_second = false;  ///< (Id - u) D_j ⊂ 2(sqrt(2 alpha) + gamma) B
  double id_minus_u_norm = 0.0;
  // case 1
  bool xi_second = false;  ///< P_{u(E_j)}(D'_j + u D'_j) ⊂ kappa B
  double xi_second_radius = 0.0;
  bool xi0 = false;  ///< sigma_min[A | uA] >= c alpha^{1/2} and |A| <= 2
  double sigma_min_pair = 0.0;
  double block_norm = 0.0;
  bool delta = false;  ///< c alpha^{1/2}(B ∩ H_j) ⊂ D_j + u D_j and dim H_j = 2k
  long h_dim = 0;
  double delta_ratio = 0.0;
  bool hj_projection = false;  ///< |T^{-1}| <= (2/c) alpha^{-1/2}
  double t_inverse_norm_svd = 0.0;
  double t_inverse_norm_direct = 0.0;
  // case 2: (r + beta)/sv_min <= 1/sqrt k;  case 1: P_H(D' + uD') ⊂ (D_j + uD_j)/sqrt k
  bool chain = false;
  double chain_value = 0.0;
};

struct GlobalTrialOutcome {
  std::uint64_t trial_index = 0;
  SeedStream seed;
  std::string u_descriptor;
  double alpha = 0.0;
  bool sign_flipped = false;
  int case_id = 2;  ///< 1 iff alpha >= alpha0
  std::vector<GlobalBlockEvents> blocks;
  bool omega1 = false;  ///< D ⊄ 2 B_2^n
  double omega1_ratio = 0.0;
  std::optional<int> winner_j;
};

/// The events of the case selected by alpha(u); winner_j is the first j for
/// which that case's events and chain all hold.
GlobalTrialOutcome run_global_trial(const GlobalConfig& cfg, const GlobalInstance& inst, const SeedStream& seed,
                                    const Budget& budget = {});

GlobalTrialOutcome run_seeded_global_trial(const GlobalConfig& cfg, std::uint64_t trial_index,
                                           const Budget& budget = {});

nlohmann::json to_json(const GlobalTrialOutcome& t);

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct GlobalCertificate {
  int j = 0;
  int case_id = 2;
  Subspace section;  ///< E_j (case 2) or H_j (case 1)
  double isomorphism_bound = 1.0;
  double complementation_bound = 1.0;
  double bound = 3.0;
  Certification method = Certification::grid_exhaustive;
  /// case 1: max |gauge in the section / max of the two W-gauges - 1| over sampled points
  std::optional<double> oplus_inf_deviation;
  /// case 1: measured P_{E_j}(K + uK) ⊂ lambda K_j, the restriction to one summand
  std::optional<double> summand_complementation;
  /// case 1: whether both measured constants are within 1 + 1e-3
  std::optional<bool> unit_bound_met;
};

/// Case 2: K_j ⊂ P_{E_j}(K + uK) ⊂ 3 K_j.  Case 1: the H_j-section against
/// K_j + u(K_j) with bound 1 + rho, rho the winner's chain ratio; the mixed
/// terms K_j + u(K'_j) keep the constant above 1 in general.  Throws
/// CertificateRefused above bound + 1e-3.
GlobalCertificate certify_global(const GlobalConfig& cfg, const GlobalInstance& inst, const GlobalTrialOutcome& outcome,
                                 const Budget& budget = {}, int oplus_points = 1000);

nlohmann::json to_json(const GlobalCertificate& c);

// ---------------------------------------------------------------------------
// Perturbation
// ---------------------------------------------------------------------------

/// dim O(n) * log(C_net / delta).
double orthogonal_net_log_cardinality(long n, double delta, const Constants& constants);

struct GlobalPerturbationReport {
  double delta = 0.0;         ///< kappa/6
  double delta_scale = 0.0;   ///< n^{-3/8}
  std::vector<Constraint> conditions;
  double net_log_cardinality = 0.0;
  double sphere_net_log_cardinality = 0.0;  ///< 2k log(1 + 2/eps) at eps = c alpha0^{1/2}/4
  double N_required = 0.0;                  ///< beta n^2 (1 + log n) k^3 / c5
};

GlobalPerturbationReport perturb_and_replan(const GlobalConfig& cfg);
nlohmann::json to_json(const GlobalPerturbationReport& r);

struct StabilityItem {
  std::string name;
  int j = -1;
  bool premise = false;
  bool conclusion = false;
  double before = 0.0;
  double after = 0.0;
  [[nodiscard]] bool implication_holds() const { return !premise || conclusion; }
};

struct StabilityReport {
  double distance = 0.0;  ///< |u - u'|
  double alpha_before = 0.0;
  double alpha_after = 0.0;
  bool alpha_lipschitz = false;
  std::vector<StabilityItem> items;
  [[nodiscard]] bool all_hold() const;
};

/// Re-checks each event for u' with doubled constants.  Requires |u - u'| <=
/// cfg.delta and D ⊂ 2 B_2^n.  `blocks` limits the checked j (all when empty).
StabilityReport perturbation_stability_check(const GlobalConfig& cfg, const Matrix& g, const Matrix& u,
                                             const Matrix& u_prime, const Budget& budget = {},
                                             const std::vector<int>& blocks = {});

nlohmann::json to_json(const StabilityReport& r);

}  // namespace randsat
