#pragma once

// Random quotient bodies K_p = G(B_{Z_p}) of l_p-sums, Z_p = l_p^N(W), and the
// machinery around them: parameter planning, the per-block events of a
// sampled quotient map, certificates for saturated subspaces, perturbation
// constants and a cotype lower-bound estimator.

#include "randsat/body.hpp"
#include "randsat/constants.hpp"
#include "randsat/decouple.hpp"
#include "randsat/inclusion.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace randsat {

// ---------------------------------------------------------------------------
// Base norm W
// ---------------------------------------------------------------------------

/// kind: "l1", "l2", "linf", "lr" (with r) or "polytope" (with vertices, k x v).
struct BaseNormSpec {
  std::string kind = "linf";
  double r = 2.0;
  Matrix vertices;
};

/// B_W in R^k scaled so that (1/sqrt k) B_2^k ⊂ B_W ⊂ B_2^k.  Polytopes are
/// scaled to circumradius 1; if the inner ball then fails the call throws
/// PreconditionViolation.
Body make_base_norm(const BaseNormSpec& spec, long k);

/// Throws std::invalid_argument unless (1/sqrt k) B_2^k ⊂ B_W ⊂ B_2^k numerically.
void validate_base_norm(const BaseNormSpec& spec, long k);

nlohmann::json to_json(const BaseNormSpec& spec);
BaseNormSpec base_norm_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Configuration and planning
// ---------------------------------------------------------------------------

struct Constraint {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;  ///< lhs <= rhs (with 1e-12 relative slack)
};

Constraint make_constraint(std::string name, double lhs, double rhs);
nlohmann::json to_json(const Constraint& c);

struct LocalConfig {
  double q = 4.0;  ///< > 2; infinity selects p = 1
  long n = 64;
  long m = 32;
  long m0 = 32;
  long k = 2;
  long N = 40;
  double kappa = 1.0 / 16.0;
  std::optional<double> epsilon;
  BaseNormSpec base_norm;
  std::uint64_t master_seed = 0;
  Constants constants = Constants::defaults();

  [[nodiscard]] double p() const;
  /// 1/sqrt(k), times epsilon in epsilon mode.
  [[nodiscard]] double brutal_target() const;
  /// 2^{1/q}, or 1 + epsilon in epsilon mode.
  [[nodiscard]] double certificate_bound() const;
};

/// Throws std::invalid_argument naming the violated invariant.
void validate(const LocalConfig& cfg);
nlohmann::json to_json(const LocalConfig& cfg);
LocalConfig local_config_from_json(const nlohmann::json& j);

/// (q - 2)/(2q + 2); 1/2 for q = infinity.
double alpha_exponent(double q);

struct PlanReport {
  double q = 4.0;
  long n = 0;
  long m0 = 0;
  double alpha_exponent = 0.0;
  double k_bound = 0.0;  ///< c1 m0 / (sqrt q n^{1-a} (log n)^{(1-2a)/3})
  long k_max = 0;
  long k_used = 1;
  bool feasible = false;  ///< k_max >= 1 and every constraint holds
  long N_chosen = 0;
  double kappa_chosen = 0.0;
  std::vector<Constraint> constraints;
  nlohmann::json constants;
};

/// Plans k, kappa and N for given (q, n, m0).  `k_override` replaces k_max for
/// the constraint arithmetic (desk presets).  Infeasibility is reported.
PlanReport plan(double q, long n, long m0, std::optional<double> epsilon, const Constants& constants,
                std::optional<long> k_override = std::nullopt);
nlohmann::json to_json(const PlanReport& r);

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

/// The K- and D-type sets generated by a matrix whose N column blocks of
/// width k are the images of the coordinate blocks F_j.
class BodyFamily {
 public:
  BodyFamily(Matrix g, long k, long n_blocks, double p, Body w);

  [[nodiscard]] const Matrix& matrix() const { return g_; }
  [[nodiscard]] long k() const { return k_; }
  [[nodiscard]] long blocks() const { return n_blocks_; }
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] const Body& w() const { return w_; }
  [[nodiscard]] Matrix block(long j) const;

  [[nodiscard]] const Body& k_j(long j) const { return k_parts_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] const Body& d_j(long j) const { return d_parts_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] Body k_p() const;
  [[nodiscard]] Body k_prime(long j) const;
  [[nodiscard]] Body d_p() const;
  [[nodiscard]] Body d_prime(long j) const;
  /// D_{I,p} = conv_p(D_i : i in I).
  [[nodiscard]] Body d_set(const std::vector<int>& indices) const;
  /// E_j = span of block j; DegenerateInstance when the block is rank deficient.
  [[nodiscard]] Subspace e_j(long j) const;

 private:
  Matrix g_;
  long k_;
  long n_blocks_;
  double p_;
  Body w_;
  std::vector<Body> k_parts_;
  std::vector<Body> d_parts_;
};

/// rows x (N k) Gaussian matrix; column block j comes from seed.derive(j), so
/// disjoint blocks use disjoint streams.
Matrix sample_block_gaussian(long rows, long k, long n_blocks, double variance, const SeedStream& seed);

struct LocalInstance {
  LinearMap g;  ///< n x Nk, variance 1/n
  BodyFamily family;
};

LocalInstance build_instance(const LocalConfig& cfg);

/// G~ = F^T G for the frame F of the quotient subspace.
BodyFamily quotient_family(const LocalConfig& cfg, const Matrix& g, const Subspace& quotient);

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct BlockEvents {
  bool theta_prime = false;    ///< P_{E~j}(D~'_j) ⊂ kappa B_2^m
  double theta_prime_ratio = 0.0;
  bool theta_prime0 = false;   ///< singular values of G~_j in [sqrt(m/n)/2, 2 sqrt(m/n)]
  double sv_min = 0.0;
  double sv_max = 0.0;
  bool brutal = false;         ///< P_{E~j}(D~'_j) ⊂ target D~_j
  double brutal_ratio = 0.0;
  Certification certification = Certification::grid_exhaustive;
};

struct DecouplingWitness {
  DecouplingInstance instance;
  DecouplingResult result;
  std::vector<double> kappa_j;
  /// measured h of P_{E~j}(D~_{J^c,p}) at z_j, per j in J, over kappa/3
  std::vector<double> jc_ratio;
  bool verified = false;
};

struct TrialOutcome {
  std::uint64_t trial_index = 0;
  SeedStream seed;
  std::string q_descriptor;
  std::vector<BlockEvents> blocks;
  bool theta1 = false;  ///< exceptional: D_p ⊄ 2 B_2^n
  double theta1_ratio = 0.0;
  bool thetabar1 = false;  ///< exceptional: M*(D_p) > 2 C_p sqrt(k/n) N^{1/q}
  double mstar_dp = 0.0;
  double thetabar1_threshold = 0.0;
  std::optional<int> winner_j;
  std::optional<DecouplingWitness> decoupling;
};

struct TrialOptions {
  Budget budget{};
  int mstar_directions = 4096;
  bool evaluate_exceptional = true;
  bool decouple_when_all_fail = true;
};

/// Evaluates every per-block event for the quotient onto `quotient` (rank m).
/// winner_j is the first j in index order satisfying the brutal inclusion.
TrialOutcome run_trial(const LocalConfig& cfg, const Matrix& g, const Subspace& quotient, const SeedStream& seed,
                       const TrialOptions& opt = {});

/// Samples G and a Haar quotient from the trial's stream, then run_trial.
TrialOutcome run_seeded_trial(const LocalConfig& cfg, std::uint64_t trial_index, const TrialOptions& opt = {});

/// Stream of trial `index`: G from derive(0), the quotient from derive(1).
SeedStream trial_stream(std::uint64_t master_seed, std::uint64_t index);

nlohmann::json to_json(const TrialOutcome& t);

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

class CertificateRefused : public std::runtime_error {
 public:
  CertificateRefused(const std::string& what, double isomorphism, double complementation, double bound)
      : std::runtime_error(what), isomorphism_bound(isomorphism), complementation_bound(complementation),
        bound(bound) {}
  double isomorphism_bound;
  double complementation_bound;
  double bound;
};

struct SaturationCertificate {
  int j = 0;
  double isomorphism_bound = 1.0;
  double complementation_bound = 1.0;
  double bound = 1.0;  ///< the value both must respect
  Certification method = Certification::grid_exhaustive;
};

/// Certifies block j of the quotient family: K~_j ⊂ E~_j ∩ K~_p ⊂ λ K~_j and
/// P_{E~_j}(K~_p) ⊂ λ K~_j.  Throws CertificateRefused above bound + 1e-3.
SaturationCertificate certify(const LocalConfig& cfg, const BodyFamily& quotient, int j, const Budget& budget = {});

/// Same test for an arbitrary body and section; used for sanity checks.
SaturationCertificate certify_section(const Body& body, const Subspace& s, const Body& reference, double bound,
                                      int j, const Budget& budget = {});

nlohmann::json to_json(const SaturationCertificate& c);

// ---------------------------------------------------------------------------
// Perturbation and cotype
// ---------------------------------------------------------------------------

struct PerturbationReport {
  double delta = 0.0;   ///< 1/(8 sqrt n)
  double delta1 = 0.0;  ///< 4 delta sqrt(n/m)
  std::vector<Constraint> conditions;
  double net_log_cardinality = 0.0;  ///< m(n-m) log(C2/delta)
  double crude_log_bound = 0.0;      ///< m n log n
};

PerturbationReport perturbation_margin(const LocalConfig& cfg);
nlohmann::json to_json(const PerturbationReport& r);

using NormFn = std::function<double(const Vector&)>;

/// (sum |x_i|^q)^{1/q} / (average over signs of |sum ±x_i|^2)^{1/2}.  Signs
/// are enumerated when there are at most 12 vectors, sampled otherwise.
double cotype_ratio(const NormFn& norm, const std::vector<Vector>& tuple, double q, const SeedStream& seed = {});

struct CotypeEstimate {
  double value = 0.0;
  int best_trial = -1;  ///< -1: the coordinate tuple e_1..e_v
};

/// Max of cotype_ratio over the coordinate tuple and `trials` Gaussian tuples
/// of `vector_count` vectors.
CotypeEstimate estimate_cotype_lower(const NormFn& norm, Eigen::Index dim, double q, int vector_count, int trials,
                                     const SeedStream& seed);

/// Body version: numerator uses the lower end of the gauge interval and the
/// denominator the upper end, so the ratio stays a lower bound.
CotypeEstimate estimate_cotype_lower(const Body& unit_ball, double q, int vector_count, int trials,
                                     const SeedStream& seed);

}  // namespace randsat
