#pragma once

// Inclusion tests A ⊂ scale·B through support functions, the gauge
// (Minkowski functional) as a certified interval, and section isomorphism
// constants built from two inclusion checks.

#include "randsat/body.hpp"

#include <optional>
#include <string>
#include <vector>

namespace randsat {

struct Budget {
  double grid_pitch = 1e-3;     ///< angular pitch (radians) of 2-D polar grids
  double grid_pitch_3d = 1e-2;  ///< pitch of 3-D spherical grids
  int starts = 24;              ///< multistart count above dimension 3
  int ascent_iterations = 200;
  int refine_top = 4;  ///< grid maxima polished by local ascent
  double tol = 1e-9;   ///< an inclusion holds iff measured_ratio <= 1 + tol
  SeedStream seed{};
};

enum class Certification { grid_exhaustive, multistart_heuristic };
std::string to_string(Certification c);

struct InclusionReport {
  bool holds = false;
  double measured_ratio = 0.0;  ///< max over tested y of h_A(y) / (scale h_B(y))
  Certification certification = Certification::grid_exhaustive;
  int directions_used = 0;
  double pitch = 0.0;  ///< grid pitch used; 0 for heuristic runs
  Vector argmax;       ///< unit direction (ambient coordinates) attaining the ratio
};

/// Checks h_A(y) <= scale * h_B(y) over unit directions y.  With `restrict_to`
/// the test runs over y in S only, i.e. it compares P_S(A) with P_S(B); for a
/// B that is a ball or lies inside S this is the same as comparing with B ∩ S.
/// Exhaustive polar grid when the tested dimension is <= 3, multistart ascent
/// otherwise.  A direction with h_B = 0 < h_A gives ratio +inf.
InclusionReport check_inclusion(const Body& a, const Body& b, const std::optional<Subspace>& restrict_to,
                                double scale, const Budget& budget = {});

struct RatioMaximum {
  double ratio = 0.0;
  Vector direction;
  int evaluations = 0;
};

/// max over the unit sphere of h_A(y)/h_B(y) for bodies in the same R^d.
/// `hints` are extra starting directions for the local ascent.
RatioMaximum maximize_support_ratio(const Body& a, const Body& b, const Budget& budget, bool exhaustive_grid,
                                    const std::vector<Vector>& hints = {});

/// Unit directions of the polar grid used for dimension d in {1, 2, 3}; the
/// grid covers a half-sphere since every body here is symmetric.
Matrix polar_grid(Eigen::Index d, double pitch);

struct SectionConstant {
  double lower = 1.0;
  double upper = 1.0;
  InclusionReport outer;  ///< body ∩ S ⊂ upper·reference, tested through P_S(body)
  InclusionReport inner;  ///< reference ⊂ body
};

/// Encloses the least lambda with reference ⊂ body ∩ S ⊂ lambda·reference.
/// `reference` must live in S.  When reference ⊄ body the upper end is scaled
/// by the measured excess.
SectionConstant section_isomorphism_constant(const Body& body, const Subspace& s, const Body& reference,
                                             const Budget& budget = {});

struct GaugeInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool infinite = false;  ///< x has a component outside the span of the body
  Vector maximizer;       ///< best dual direction y, <x,y>/h(y) = lower
  int iterations = 0;
};

/// Encloses ||x||_K = max_y <x,y>/h_K(y).  The lower end comes from ascent over
/// dual directions, the upper end from a cutting-plane relaxation of the polar
/// built on support points of K.
GaugeInterval gauge(const Body& body, const Vector& x, double tol = 1e-6, const Budget& budget = {});

}  // namespace randsat
