#include "randsat/meanwidth.hpp"

#include <cmath>

namespace randsat {

MeanWidthEstimate mstar(const Body& s, int directions, const SeedStream& seed) {
  if (directions < 1) throw std::invalid_argument("mstar: directions must be positive");
  auto rng = seed.engine();
  const Eigen::Index d = s.dim();
  // Welford accumulation keeps the variance stable for many directions.
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < directions; ++i) {
    const double h = s.support(random_unit_vector(d, rng));
    const double delta = h - mean;
    mean += delta / (i + 1);
    m2 += delta * (h - mean);
  }
  MeanWidthEstimate out;
  out.value = std::max(mean, 0.0);
  out.std_error = directions > 1 ? std::sqrt(m2 / (directions - 1)) / std::sqrt(double(directions)) : 0.0;
  out.directions = directions;
  out.seed = seed;
  return out;
}

double gaussian_norm_constant(long s) {
  if (s < 1) throw std::invalid_argument("gaussian_norm_constant: s must be positive");
  // long double keeps the lgamma difference accurate to ~1e-15 for s up to 10^4
  const long double x = static_cast<long double>(s);
  return static_cast<double>(std::sqrt(2.0L) * std::exp(std::lgamma((x + 1.0L) / 2.0L) - std::lgamma(x / 2.0L)));
}

std::string to_string(LemmaId id) {
  switch (id) {
    case LemmaId::mean_width_image: return "mean_width_image";
    case LemmaId::shrinking: return "shrinking";
    case LemmaId::cp_bound: return "cp_bound";
    case LemmaId::case1: return "case1";
    case LemmaId::case2: return "case2";
  }
  return "unknown";
}

nlohmann::json to_json(const LemmaCheckReport& r) {
  nlohmann::json details = nlohmann::json::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  return {{"lemma_id", to_string(r.lemma_id)},
          {"trials", r.trials},
          {"successes", r.successes},
          {"success_frequency", r.success_frequency()},
          {"predicted_bound", r.predicted_bound},
          {"empirical_mean", r.empirical_mean},
          {"details", details}};
}

LemmaCheckReport check_mean_width_image(const Body& s, std::optional<double> circumradius, int d, double sigma,
                                        int trials, const SeedStream& seed, const MeanWidthImageOptions& opt) {
  if (!circumradius || !(*circumradius > 0.0))
    throw PreconditionViolation("check_mean_width_image: circumscribed radius a must be given");
  if (d < 1 || trials < 1 || !(sigma > 0.0)) throw std::invalid_argument("check_mean_width_image: bad parameters");
  const double a = *circumradius;
  const long sdim = static_cast<long>(s.dim());
  const double cs = gaussian_norm_constant(sdim);
  const MeanWidthEstimate ms = mstar(s, opt.reference_directions, seed.derive(0));
  const double predicted = cs * sigma * ms.value;
  const double t = opt.tail_t.value_or(0.5 * a * sigma / std::sqrt(double(d)) * std::sqrt(2.0));

  LemmaCheckReport rep;
  rep.lemma_id = LemmaId::mean_width_image;
  rep.trials = trials;
  rep.predicted_bound = predicted;
  double sum = 0.0;
  int exceed = 0;
  for (int i = 0; i < trials; ++i) {
    const SeedStream ts = seed.derive(1000 + static_cast<std::uint64_t>(i));
    const LinearMap a_map = sample_gaussian(d, sdim, sigma * sigma, ts.derive(0));
    const Body as = s.image(a_map.matrix());
    const double v = mstar(as, opt.directions, ts.derive(1)).value;
    sum += v;
    if (v > predicted + t)
      ++exceed;
    else
      ++rep.successes;
  }
  rep.empirical_mean = sum / trials;
  const double tail_bound = std::exp(-d * t * t / (2.0 * a * a * sigma * sigma));
  rep.details = {{"c_s", cs},
                 {"mstar_S", ms.value},
                 {"mstar_S_std_error", ms.std_error},
                 {"t", t},
                 {"tail_frequency", double(exceed) / trials},
                 {"tail_bound", tail_bound},
                 {"relative_error", predicted > 0.0 ? std::abs(rep.empirical_mean - predicted) / predicted : 0.0}};
  return rep;
}

LemmaCheckReport check_shrinking(const Body& s, std::optional<double> circumradius, int d, double t, ShrinkMode mode,
                                 int trials, const SeedStream& seed, const Budget& budget) {
  if (!circumradius || !(*circumradius >= 0.0))
    throw PreconditionViolation("check_shrinking: circumscribed radius a must be given");
  const Eigen::Index sdim = s.dim();
  if (d < 1 || d > sdim || trials < 1 || !(t > 0.0)) throw std::invalid_argument("check_shrinking: bad parameters");
  const double a = *circumradius;
  const MeanWidthEstimate ms = mstar(s, 4096, seed.derive(0));
  const double radius = a * std::sqrt(double(d) / double(sdim)) + ms.value + t;

  LemmaCheckReport rep;
  rep.lemma_id = LemmaId::shrinking;
  rep.trials = trials;
  double sum_ratio = 0.0;
  for (int i = 0; i < trials; ++i) {
    const SeedStream ts = seed.derive(1000 + static_cast<std::uint64_t>(i));
    Budget b = budget;
    b.seed = ts.derive(1);
    InclusionReport r;
    if (mode == ShrinkMode::projection) {
      const Subspace h = haar_subspace(sdim, d, ts.derive(0));
      r = check_inclusion(s, Body::euclidean_ball(sdim), h, radius, b);
    } else {
      const LinearMap g = sample_gaussian(d, sdim, 1.0 / double(sdim), ts.derive(0));
      r = check_inclusion(s.image(g.matrix()), Body::euclidean_ball(d), std::nullopt, radius, b);
    }
    sum_ratio += r.measured_ratio * radius;
    if (r.holds) ++rep.successes;
  }
  rep.empirical_mean = sum_ratio / trials;  // mean circumradius of the image
  const double expo = -t * t * double(sdim) / (2.0 * a * a) + (mode == ShrinkMode::projection ? 1.0 : 0.0);
  rep.predicted_bound = a > 0.0 ? std::max(0.0, 1.0 - std::exp(expo)) : 1.0;
  rep.details = {{"radius", radius},
                 {"mstar_S", ms.value},
                 {"a", a},
                 {"t", t},
                 {"projection_mode", mode == ShrinkMode::projection ? 1.0 : 0.0}};
  return rep;
}

Body lp_sum_of_balls(long n_blocks, long k, double p) {
  if (n_blocks < 1 || k < 1) throw std::invalid_argument("lp_sum_of_balls: N and k must be positive");
  const Eigen::Index dim = n_blocks * k;
  std::vector<Body> parts;
  parts.reserve(static_cast<std::size_t>(n_blocks));
  for (long j = 0; j < n_blocks; ++j) {
    Matrix block = Matrix::Zero(dim, k);
    block.block(j * k, 0, k, k).setIdentity();
    parts.push_back(Body::ellipsoid_image(std::move(block)));
  }
  return Body::p_convex_hull(p, std::move(parts), dim);
}

CpBound cp_mean_width_bound(long n_blocks, long k, double p, double c_const, int directions, const SeedStream& seed) {
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("cp_mean_width_bound: p must lie in (1, 2]");
  const Body body = lp_sum_of_balls(n_blocks, k, p);
  const MeanWidthEstimate est = mstar(body, directions, seed);
  CpBound out;
  out.q = conjugate_exponent(p);
  out.estimate = est.value;
  out.std_error = est.std_error;
  out.bound = c_const * std::sqrt(out.q) * std::pow(double(n_blocks), 1.0 / out.q - 0.5);
  out.holds = out.estimate <= out.bound;
  return out;
}

}  // namespace randsat
