#pragma once

// Mean width M*(S) = average over the unit sphere of h_S, plus Monte Carlo
// checkers for the Gaussian-image mean-width lemma, the diameter-shrinking
// lemma and the l_p^N(l_2^k) mean-width bound.

#include "randsat/body.hpp"
#include "randsat/inclusion.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>

namespace randsat {

struct MeanWidthEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(directions)
  int directions = 0;
  SeedStream seed{};
};

/// Monte Carlo M*(S) over `directions` uniform unit vectors.
MeanWidthEstimate mstar(const Body& s, int directions, const SeedStream& seed);

/// c_s = sqrt(2) Γ((s+1)/2) / Γ(s/2), the mean of |g| for g standard Gaussian in R^s.
double gaussian_norm_constant(long s);

enum class LemmaId { mean_width_image, shrinking, cp_bound, case1, case2 };
std::string to_string(LemmaId id);

struct LemmaCheckReport {
  LemmaId lemma_id = LemmaId::mean_width_image;
  int trials = 0;
  int successes = 0;
  double predicted_bound = 0.0;
  double empirical_mean = 0.0;
  std::map<std::string, double> details;  ///< lemma-specific measured quantities

  [[nodiscard]] double success_frequency() const { return trials > 0 ? double(successes) / trials : 0.0; }
};

nlohmann::json to_json(const LemmaCheckReport& r);

struct MeanWidthImageOptions {
  int directions = 1024;          ///< directions per M*(AS) estimate
  int reference_directions = 8192;  ///< directions for M*(S)
  std::optional<double> tail_t;   ///< deviation t; default 0.5·a·sigma·sqrt(2/d)
};

/// Samples d x s Gaussian A (entry variance sigma^2) and compares the mean of
/// M*(AS) with c_s·sigma·M*(S).  `circumradius` is a with S ⊂ a·B_2^s; without
/// it the tail bound is undefined and the call is rejected.
LemmaCheckReport check_mean_width_image(const Body& s, std::optional<double> circumradius, int d, double sigma,
                                        int trials, const SeedStream& seed, const MeanWidthImageOptions& opt = {});

enum class ShrinkMode { projection, gaussian };

/// Frequency of P_H(S) ⊂ (a·sqrt(d/s) + M*(S) + t)·B_2 for Haar H (projection
/// mode) or Gaussian d x s maps with variance 1/s.
LemmaCheckReport check_shrinking(const Body& s, std::optional<double> circumradius, int d, double t, ShrinkMode mode,
                                 int trials, const SeedStream& seed, const Budget& budget = {});

struct CpBound {
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  ///< C·sqrt(q)·N^{1/q - 1/2}
  double q = 2.0;
  bool holds = false;
};

/// Balls of the k-dimensional coordinate blocks of R^{Nk}; their conv_p is the
/// unit ball of l_p^N(l_2^k).
Body lp_sum_of_balls(long n_blocks, long k, double p);

CpBound cp_mean_width_bound(long n_blocks, long k, double p, double c_const, int directions, const SeedStream& seed);

}  // namespace randsat
