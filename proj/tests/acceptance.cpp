// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
// Usage: randsat_acceptance [output_dir]

#include "oracles.hpp"
#include "randsat/decouple.hpp"
#include "randsat/experiment.hpp"
#include "randsat/meanwidth.hpp"
#include "randsat/satglobal.hpp"
#include "randsat/satlocal.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace randsat;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Line {
  int id;
  bool pass;
  std::string detail;
  double seconds;
  double limit;
};

std::vector<Line> g_lines;

void report(int id, bool pass, const std::string& detail, double seconds, double limit) {
  const bool in_time = seconds <= limit;
  std::printf("criterion %d: %s  %s  [%.1f s, limit %.0f s%s]\n", id, pass && in_time ? "PASS" : "FAIL",
              detail.c_str(), seconds, limit, in_time ? "" : ", over time");
  std::fflush(stdout);
  g_lines.push_back({id, pass && in_time, detail, seconds, limit});
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run_and_write(const nlohmann::json& file, const fs::path& dir) {
  const ExperimentFile e = parse_experiment(file);
  RunResult r = run_experiment(e, 1);
  write_outputs(r, dir);
  return r;
}

// W = (1/sqrt k) B_inf, so h_W(v) = |v|_1 / sqrt k.
double h_w(const Vector& v) { return v.lpNorm<1>() / std::sqrt(double(v.size())); }

// Orthonormal frame of the column span of a full-rank block.
Matrix plane_frame(const Matrix& block) {
  Eigen::HouseholderQR<Matrix> qr(block);
  return qr.householderQ() * Matrix::Identity(block.rows(), block.cols());
}

struct GridRatios {
  double upper = 0.0;  ///< max over the plane of h_big / h_small
  double lower = kInf;  ///< min over the plane of h_big / h_small
};

GridRatios grid_ratios(const std::function<double(const Vector&)>& h_big,
                       const std::function<double(const Vector&)>& h_small, const Matrix& frame, double pitch) {
  const int count = int(std::ceil(std::numbers::pi / pitch));
  GridRatios r;
  for (int i = 0; i < count; ++i) {
    const double t = std::numbers::pi * i / count;
    const Vector y = frame.col(0) * std::cos(t) + frame.col(1) * std::sin(t);
    const double v = h_big(y) / h_small(y);
    r.upper = std::max(r.upper, v);
    r.lower = std::min(r.lower, v);
  }
  return r;
}

// ---------------------------------------------------------------------------

void criterion1() {
  Timer t;
  // c_1, c_2 closed forms and c_{s+2} = c_s (s + 1)/s, from c_s c_{s+1} = s
  std::vector<long double> c(10002);
  c[1] = std::sqrt(2.0L / std::numbers::pi_v<long double>);
  c[2] = std::sqrt(std::numbers::pi_v<long double> / 2.0L);
  for (int s = 1; s + 2 <= 10000; ++s) c[s + 2] = c[s] * (s + 1) / s;
  double worst = 0.0;
  bool below = true;
  for (long s = 1; s <= 10000; ++s) {
    const double v = gaussian_norm_constant(s);
    worst = std::max(worst, double(std::abs((v - c[s]) / c[s])));
    below = below && v <= std::sqrt(double(s));
  }
  report(1, worst <= 1e-12 && below,
         fmt("max relative error %.2e over s=1..10^4 (recurrence oracle), c_s <= sqrt(s): %s", worst,
             below ? "yes" : "no"),
         t.seconds(), 1.0);
}

void criterion2(const fs::path& out) {
  Timer t;
  const RunResult r = run_and_write({{"kind", "lemma"},
                                     {"seed", 2},
                                     {"config", {{"suite", "meanwidth"}, {"s", 20}, {"d", 5}, {"sigma", 0.3},
                                                 {"trials", 2000}}}},
                                    out / "c2_meanwidth");
  const auto res = nlohmann::json::parse(r.lines.at(0)).at("result");
  const auto& d = res.at("report").at("details");
  const double expected = gaussian_norm_constant(20) * 0.3;
  const double mean = res.at("report").at("empirical_mean").get<double>();
  const double rel = std::abs(mean - expected) / expected;
  const double tail = d.at("tail_frequency").get<double>(), bound = d.at("tail_bound").get<double>();
  report(2, rel <= 0.02 && tail <= bound + 0.05,
         fmt("mean M*(AS) %.5f vs c_20*0.3 = %.5f (rel %.2e); tail %.3f <= %.3f + 0.05", mean, expected, rel, tail,
             bound),
         t.seconds(), 120.0);
}

void criterion3() {
  Timer t;
  const long m = 128, k = 4, n = 256;
  const int trials = 500;
  const double ratio = std::sqrt(double(m) / double(n));
  int hits = 0;
  const SeedStream root{3, 0};
  for (int i = 0; i < trials; ++i) {
    const auto sv = singular_values(sample_gaussian(m, k, 1.0 / double(n), root.derive(std::uint64_t(i))));
    hits += sv.back() >= 0.5 * ratio && sv.front() <= 2.0 * ratio;
  }
  const double f = double(hits) / trials;
  report(3, f >= 0.90,
         fmt("window [sqrt(m/n)/2, 2 sqrt(m/n)] held in %d/%d trials (%.3f >= 0.90)", hits, trials, f), t.seconds(),
         60.0);
}

void criterion4(const fs::path& out) {
  Timer t;
  const RunResult r = run_and_write(
      {{"kind", "lemma"}, {"seed", 4}, {"config", {{"suite", "decouple"}, {"n_max", 9}, {"instances", 200}}}},
      out / "c4_decouple");
  const auto res = nlohmann::json::parse(r.lines.at(0)).at("result");
  const int valid = res.at("valid"), agree = res.at("oracle_agreements");
  report(4, valid == 200 && agree == 200,
         fmt("valid J in %d/200, exhaustive oracle confirms %d/200", valid, agree), t.seconds(), 30.0);
}

void criterion5() {
  Timer t;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pu(1.0, 3.0);
  std::uniform_int_distribution<int> dims(2, 4), parts_n(2, 3), cols(1, 2);
  double worst = 0.0;
  for (int b = 0; b < 50; ++b) {
    const int d = dims(rng);
    const double p = pu(rng);
    std::vector<Matrix> maps;
    std::vector<Body> parts;
    const int np = parts_n(rng);
    for (int i = 0; i < np; ++i) {
      const Matrix m = sample_gaussian(d, cols(rng), 1.0, SeedStream{5, std::uint64_t(b * 10 + i)}).matrix();
      maps.push_back(m);
      parts.push_back(Body::ellipsoid_image(m));
    }
    const Body hull = Body::p_convex_hull(p, parts, d);
    for (int s = 0; s < 4; ++s) {
      const Vector y = random_unit_vector(d, rng);
      worst = std::max(worst, std::abs(hull.support(y) - oracle::pconv_support(p, maps, y)));
    }
  }
  report(5, worst <= 1e-3, fmt("max |closed form - sampled maximum| = %.2e over 50 bodies x 4 directions", worst),
         t.seconds(), 60.0);
}

void criterion6() {
  Timer t;
  std::mt19937_64 rng(6);
  double add = 0.0, incl = -kInf;
  for (int i = 0; i < 1000; ++i) {
    const long d = 2 + i % 5;
    const SeedStream s{6, std::uint64_t(i)};
    const Matrix a = sample_gaussian(d, 2, 1.0, s.derive(0)).matrix();
    const Body b = Body::minkowski_sum(
        {Body::ellipsoid_image(a), Body::lr_ball(d, i % 2 ? 1.0 : kInf).scaled(0.5)});
    const Matrix u = haar_rotation(d, s.derive(1)).matrix();
    const Body sum = Body::minkowski_sum({b, Body::rotated(u, b)});
    const Vector y = random_unit_vector(d, rng);
    const double hs = sum.support(y), hb = b.support(y);
    add = std::max(add, std::abs(hs - hb - b.support(u.transpose() * y)));
    const Matrix id_minus_u = Matrix::Identity(d, d) - u;
    incl = std::max(incl, hs - 2 * hb - b.support(id_minus_u.transpose() * y));
  }
  report(6, add <= 1e-12 && incl <= 1e-9,
         fmt("support additivity error %.2e; max of h_{B+uB} - h_{2B+(Id-u)B} = %.2e over 1000 triples", add, incl),
         t.seconds(), 30.0);
}

nlohmann::json local_desk_file(int trials) {
  return {{"kind", "local"},
          {"trials", trials},
          {"seed", 7},
          {"config",
           {{"q", 4}, {"n", 64}, {"m", 32}, {"k", 2}, {"N", 40}, {"kappa", 0.0625}, {"base_norm", "linf"}}}};
}

void criterion7(const fs::path& out) {
  Timer t;
  const nlohmann::json file = local_desk_file(100);
  const RunResult r = run_and_write(file, out / "c7_local_desk");
  const LocalConfig cfg = [&] {
    LocalConfig c = local_config_from_json(file.at("config"));
    c.master_seed = 7;
    return c;
  }();
  const double bound = std::pow(2.0, 0.25);
  int winners = 0, verified = 0, refused = 0;
  double worst_cert = 0.0, worst_grid = 0.0, worst_gap = -kInf;
  for (std::size_t i = 0; i < r.lines.size(); ++i) {
    const auto rec = nlohmann::json::parse(r.lines[i]);
    if (rec.at("outcome").at("winner_j").is_null()) continue;
    ++winners;
    if (rec.contains("certificate_refused")) {
      ++refused;
      continue;
    }
    const int j = rec.at("outcome").at("winner_j");
    const auto& cert = rec.at("certificate");
    const double iso = cert.at("isomorphism_bound"), comp = cert.at("complementation_bound");

    // Rebuild the quotient matrix and evaluate supports from the matrices alone.
    const SeedStream ts = trial_stream(cfg.master_seed, i);
    const Matrix g = sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0));
    const Matrix f = haar_subspace(cfg.n, cfg.m, ts.derive(1)).frame();
    const Matrix gt = f.transpose() * g;
    auto h_kj = [&](const Vector& y) { return h_w(gt.middleCols(j * cfg.k, cfg.k).transpose() * y); };
    auto h_kp = [&](const Vector& y) {
      double s = 0.0;
      for (long b = 0; b < cfg.N; ++b) s += std::pow(h_w(gt.middleCols(b * cfg.k, cfg.k).transpose() * y), cfg.q);
      return std::pow(s, 1.0 / cfg.q);
    };
    const GridRatios gr = grid_ratios(h_kp, h_kj, plane_frame(gt.middleCols(j * cfg.k, cfg.k)), 1e-3);
    // h_{K_j} <= h_{K_p} on the plane gives K_j ⊂ section; gr.upper bounds both constants.
    const bool ok = iso <= bound + 1e-3 && comp <= bound + 1e-3 && gr.lower >= 1 - 1e-12 &&
                    gr.upper <= bound + 1e-3 && gr.upper <= comp + 1e-4;
    verified += ok;
    worst_cert = std::max({worst_cert, iso, comp});
    worst_grid = std::max(worst_grid, gr.upper);
    worst_gap = std::max(worst_gap, gr.upper - comp);
  }
  report(7, refused == 0 && verified == winners,
         fmt("%d/100 trials with a winner, %d certified and grid-verified, %d refused; max certificate %.4f, max "
             "grid ratio %.4f, bound %.4f; max grid minus certificate %.1e",
             winners, verified, refused, worst_cert, worst_grid, bound, worst_gap),
         t.seconds(), 600.0);
}

struct GlobalCheck {
  int trials = 0;
  int case1 = 0;
  int winners = 0;
  int case2_winners = 0;
  int verified = 0;
  int refused = 0;
  double worst_grid = 0.0;
};

GlobalCheck check_global_run(const nlohmann::json& file, const fs::path& dir) {
  const RunResult r = run_and_write(file, dir);
  GlobalConfig cfg = global_config_from_json(file.at("config"));
  cfg.master_seed = file.at("seed");
  GlobalCheck c;
  for (std::size_t i = 0; i < r.lines.size(); ++i) {
    ++c.trials;
    const auto rec = nlohmann::json::parse(r.lines[i]);
    const int case_id = rec.at("outcome").at("case");
    c.case1 += case_id == 1;
    if (rec.at("outcome").at("winner_j").is_null()) continue;
    ++c.winners;
    if (rec.contains("certificate_refused")) {
      ++c.refused;
      continue;
    }
    if (case_id != 2) continue;
    ++c.case2_winners;
    const int j = rec.at("outcome").at("winner_j");
    const auto& cert = rec.at("certificate");
    const SeedStream ts = global_trial_stream(cfg.master_seed, i);
    const Matrix g = sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0));
    const Matrix u = sample_rotation(cfg, ts.derive(1));
    auto h_block = [&](long b, const Vector& y) { return h_w(g.middleCols(b * cfg.k, cfg.k).transpose() * y); };
    auto h_k = [&](const Vector& y) {
      double s = 0.0;
      for (long b = 0; b < cfg.N; ++b) s = std::max(s, h_block(b, y));
      return s;
    };
    auto h_sum = [&](const Vector& y) { return h_k(y) + h_k(u.transpose() * y); };
    auto h_kj = [&](const Vector& y) { return h_block(j, y); };
    const GridRatios gr = grid_ratios(h_sum, h_kj, plane_frame(g.middleCols(j * cfg.k, cfg.k)), 1e-3);
    const double iso = cert.at("isomorphism_bound"), comp = cert.at("complementation_bound");
    const bool ok = iso <= 3 + 1e-3 && comp <= 3 + 1e-3 && gr.lower >= 1 - 1e-12 && gr.upper <= 3 + 1e-3 &&
                    gr.upper <= comp + 1e-4;
    c.verified += ok;
    c.worst_grid = std::max(c.worst_grid, gr.upper);
  }
  return c;
}

nlohmann::json global_desk_file() {
  return {{"kind", "global"},
          {"trials", 100},
          {"seed", 8},
          {"config", {{"n", 48}, {"k", 2}, {"N", 24}, {"base_norm", "linf"}, {"rotation", "haar"}}}};
}

nlohmann::json global_supplement_file() {
  return {{"kind", "global"},
          {"trials", 20},
          {"seed", 8},
          {"config",
           {{"n", 200}, {"k", 2}, {"N", 6}, {"base_norm", "linf"}, {"rotation", "near_identity"},
            {"rotation_scale", 0.02}}}};
}

void criterion8(const fs::path& out) {
  Timer t;
  const GlobalCheck desk = check_global_run(global_desk_file(), out / "c8_global_desk");
  const GlobalCheck sup = check_global_run(global_supplement_file(), out / "c8_global_near_identity");
  const bool ok = desk.refused == 0 && sup.refused == 0 && desk.verified == desk.case2_winners &&
                  sup.verified == sup.case2_winners;
  std::string detail = fmt("desk preset: %d/%d trials in case 1, %d winners (%d case 2), %d grid-verified", desk.case1,
                           desk.trials, desk.winners, desk.case2_winners, desk.verified);
  if (desk.case2_winners == 0) detail += " (vacuous at the desk preset)";
  detail += fmt("; near-identity n=200 k=2 N=6: %d/%d case-2 winners, %d grid-verified, max grid ratio %.4f <= 3",
                sup.case2_winners, sup.trials, sup.verified, sup.worst_grid);
  report(8, ok && sup.case2_winners > 0, detail, t.seconds(), 600.0);
}

void criterion9(const fs::path& out) {
  Timer t;
  const RunResult r1 = run_and_write(
      {{"kind", "lemma"},
       {"seed", 9},
       {"config", {{"suite", "case1"}, {"n", 200}, {"k", 3}, {"c", 0.1}, {"u", "half_flip"}, {"trials", 300}}}},
      out / "c9_case1");
  const RunResult r2 = run_and_write(
      {{"kind", "lemma"},
       {"seed", 9},
       {"config", {{"suite", "case2"}, {"n", 100}, {"k", 3}, {"gamma", 0.3}, {"T", "identity"}, {"trials", 300}}}},
      out / "c9_case2");
  const auto a = nlohmann::json::parse(r1.lines.at(0)).at("result").at("report");
  const auto b = nlohmann::json::parse(r2.lines.at(0)).at("result").at("report");
  const double fa = double(a.at("successes")) / double(a.at("trials"));
  const double fb = double(b.at("successes")) / double(b.at("trials"));
  const double gamma = 0.3;
  const double bound_b = 1 - std::exp(-gamma * gamma * 100 / 2 + 2 * 3);
  const double ea = a.at("details").at("second_moment_rel_error"), eb = b.at("details").at("second_moment_rel_error");
  const double alpha = a.at("details").at("alpha");
  report(9, fa >= 0.95 && fb >= bound_b - 0.05 && ea <= 0.02 && eb <= 0.02,
         fmt("case 1 (alpha %.3f): %.3f >= 0.95, moment rel err %.2e; case 2: %.3f >= %.3f - 0.05, moment rel err %.2e",
             alpha, fa, ea, fb, bound_b, eb),
         t.seconds(), 300.0);
}

void criterion10(const fs::path& out) {
  Timer t;
  struct Rerun {
    std::string name;
    nlohmann::json file;
  };
  const std::vector<Rerun> runs{
      {"c7_local_desk", local_desk_file(100)},
      {"c8_global_desk", global_desk_file()},
      {"c8_global_near_identity", global_supplement_file()},
      {"c4_decouple",
       {{"kind", "lemma"}, {"seed", 4}, {"config", {{"suite", "decouple"}, {"n_max", 9}, {"instances", 200}}}}},
  };
  int identical = 0;
  std::string diffs;
  for (const auto& run : runs) {
    const fs::path dir = out / ("rerun_" + run.name);
    const ExperimentFile e = parse_experiment(run.file);
    write_outputs(run_experiment(e, 2), dir);  // different worker count on purpose
    const bool same = slurp(dir / "trials.jsonl") == slurp(out / run.name / "trials.jsonl");
    identical += same;
    if (!same) diffs += " " + run.name;
  }
  report(10, identical == int(runs.size()),
         fmt("%d/%zu logs byte-identical on rerun with 2 workers%s%s", identical, runs.size(),
             diffs.empty() ? "" : "; differing:", diffs.c_str()),
         t.seconds(), 900.0);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out);
  const std::vector<std::function<void()>> steps{
      [] { criterion1(); },        [&] { criterion2(out); }, [] { criterion3(); },
      [&] { criterion4(out); },    [] { criterion5(); },     [] { criterion6(); },
      [&] { criterion7(out); },    [&] { criterion8(out); }, [&] { criterion9(out); },
      [&] { criterion10(out); }};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      steps[i]();
    } catch (const std::exception& e) {
      report(int(i + 1), false, std::string("threw: ") + e.what(), 0.0, 1.0);
    }
  }
  int passed = 0;
  std::ofstream summary(out / "acceptance.txt");
  for (const auto& l : g_lines) {
    passed += l.pass;
    summary << "criterion " << l.id << ": " << (l.pass ? "PASS" : "FAIL") << "  " << l.detail << "  [" << l.seconds
            << " s, limit " << l.limit << " s]\n";
  }
  summary << "acceptance: " << passed << "/" << g_lines.size() << " criteria passed\n";
  std::printf("acceptance: %d/%zu criteria passed\n", passed, g_lines.size());
  return passed == int(g_lines.size()) ? 0 : 1;
}
