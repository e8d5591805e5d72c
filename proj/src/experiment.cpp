#include "randsat/experiment.hpp"

#include "randsat/decouple.hpp"
#include "randsat/meanwidth.hpp"
#include "randsat/satglobal.hpp"
#include "randsat/satlocal.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace randsat {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

LocalConfig local_config(const ExperimentFile& exp) {
  LocalConfig cfg = local_config_from_json(exp.config);
  cfg.constants = exp.constants();
  cfg.master_seed = exp.seed;
  return cfg;
}

GlobalConfig global_config(const ExperimentFile& exp) {
  GlobalConfig cfg = global_config_from_json(exp.config, exp.constants());
  cfg.master_seed = exp.seed;
  return cfg;
}

const std::vector<std::string>& lemma_suites() {
  static const std::vector<std::string> s{"meanwidth", "shrinking", "decouple", "case1", "case2", "cpbound"};
  return s;
}

// Runs body(i) for i in [0, count) on `threads` workers.  The first exception
// is rethrown after all workers stop.
template <class Fn>
void parallel_for(int count, int threads, Fn body) {
  threads = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (!failed) {
      const int i = next++;
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

nlohmann::json refusal_json(const CertificateRefused& e) {
  return {{"message", e.what()},
          {"isomorphism_bound", e.isomorphism_bound},
          {"complementation_bound", e.complementation_bound},
          {"bound", e.bound}};
}

Matrix random_stochastic(int n, std::mt19937_64& rng) {
  Matrix l = Matrix::Zero(n, n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution sparse(0.3);
  const bool use_sparse = sparse(rng);
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      double v = -std::log(1.0 - unif(rng));
      if (use_sparse && unif(rng) < 0.6) v = 0.0;
      l(i, j) = v;
      sum += v;
    }
    if (sum == 0.0) {
      l((j + 1) % n, j) = 1.0;
      sum = 1.0;
    }
    l.col(j) /= sum;
  }
  return l;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::plan: return "plan";
    case ExperimentKind::local: return "local";
    case ExperimentKind::global: return "global";
    case ExperimentKind::lemma: return "lemma";
  }
  return "unknown";
}

Constants ExperimentFile::constants() const {
  Constants c = Constants::defaults();
  c.apply(constants_overrides);
  return c;
}

ExperimentFile parse_experiment(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment: top level must be an object");
  ExperimentFile e;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "plan")
    e.kind = ExperimentKind::plan;
  else if (kind == "local")
    e.kind = ExperimentKind::local;
  else if (kind == "global")
    e.kind = ExperimentKind::global;
  else if (kind == "lemma")
    e.kind = ExperimentKind::lemma;
  else
    throw std::invalid_argument("experiment: unknown kind '" + kind + "'");
  if (j.contains("config")) e.config = j.at("config");
  e.trials = j.value("trials", e.trials);
  e.seed = j.value("seed", e.seed);
  e.output_dir = j.value("output_dir", e.output_dir);
  e.certify = j.value("certify", e.certify);
  if (j.contains("constants"))
    for (const auto& [k, v] : j.at("constants").items()) e.constants_overrides[k] = v.get<double>();
  (void)e.constants();  // unknown names and bad values throw here

  if (e.trials < 1) throw std::invalid_argument("experiment: trials must be positive");
  switch (e.kind) {
    case ExperimentKind::plan: {
      const auto& c = e.config;
      if (!c.contains("q") || !c.contains("n") || !c.contains("m0"))
        throw std::invalid_argument("experiment: plan needs q, n and m0");
      const double q = c.at("q").is_string() ? INFINITY : c.at("q").get<double>();
      if (!(q > 2.0)) throw std::invalid_argument("experiment: q must exceed 2");
      break;
    }
    case ExperimentKind::local: validate(local_config(e)); break;
    case ExperimentKind::global: validate(global_config(e)); break;
    case ExperimentKind::lemma: {
      const std::string suite = e.config.value("suite", std::string{});
      const auto& s = lemma_suites();
      if (std::find(s.begin(), s.end(), suite) == s.end())
        throw std::invalid_argument("experiment: unknown lemma suite '" + suite + "'");
      break;
    }
  }
  return e;
}

ExperimentFile load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("experiment: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("experiment: malformed JSON: ") + ex.what());
  }
  return parse_experiment(j);
}

RunResult run_experiment(const ExperimentFile& exp, int threads) {
  RunResult r;
  const std::string start = utc_now();
  const Constants constants = exp.constants();
  const nlohmann::json csnap = constants.to_json();
  nlohmann::json config_json;

  switch (exp.kind) {
    case ExperimentKind::plan: {
      const auto& c = exp.config;
      const double q = c.at("q").is_string() ? INFINITY : c.at("q").get<double>();
      std::optional<double> eps;
      if (c.contains("epsilon")) eps = c.at("epsilon").get<double>();
      std::optional<long> k;
      if (c.contains("k")) k = c.at("k").get<long>();
      const PlanReport p = plan(q, c.at("n").get<long>(), c.at("m0").get<long>(), eps, constants, k);
      config_json = c;
      r.lines.push_back(nlohmann::json{{"kind", "plan"}, {"constants", csnap}, {"plan", to_json(p)}}.dump());
      r.csv_header = "name,lhs,rhs,satisfied";
      for (const auto& cs : p.constraints)
        r.csv_rows.push_back(cs.name + "," + fmt(cs.lhs) + "," + fmt(cs.rhs) + "," + (cs.satisfied ? "1" : "0"));
      break;
    }
    case ExperimentKind::local: {
      const LocalConfig cfg = local_config(exp);
      config_json = to_json(cfg);
      r.lines.resize(static_cast<std::size_t>(exp.trials));
      r.csv_rows.resize(static_cast<std::size_t>(exp.trials));
      r.csv_header =
          "trial,stream,winner_j,min_brutal_ratio,theta1,mstar_dp,isomorphism_bound,complementation_bound,refused";
      std::vector<int> win(static_cast<std::size_t>(exp.trials), 0), ref(static_cast<std::size_t>(exp.trials), 0);
      parallel_for(exp.trials, threads, [&](int i) {
        const TrialOutcome o = run_seeded_trial(cfg, static_cast<std::uint64_t>(i));
        nlohmann::json rec{{"kind", "local"}, {"config", config_json}, {"constants", csnap}, {"outcome", to_json(o)}};
        double iso = NAN, comp = NAN;
        bool refused = false;
        if (o.winner_j && exp.certify) {
          const SeedStream ts = trial_stream(cfg.master_seed, static_cast<std::uint64_t>(i));
          const Matrix g = sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0));
          const Subspace q = haar_subspace(cfg.n, cfg.m, ts.derive(1));
          Budget b;
          b.seed = ts.derive(3);
          try {
            const SaturationCertificate c = certify(cfg, quotient_family(cfg, g, q), *o.winner_j, b);
            rec["certificate"] = to_json(c);
            iso = c.isomorphism_bound;
            comp = c.complementation_bound;
          } catch (const CertificateRefused& e) {
            rec["certificate_refused"] = refusal_json(e);
            refused = true;
          }
        }
        double min_brutal = INFINITY;
        for (const auto& b : o.blocks) min_brutal = std::min(min_brutal, b.brutal_ratio);
        const auto idx = static_cast<std::size_t>(i);
        r.lines[idx] = rec.dump();
        r.csv_rows[idx] = std::to_string(i) + "," + std::to_string(o.seed.stream_index) + "," +
                          (o.winner_j ? std::to_string(*o.winner_j) : "") + "," + fmt(min_brutal) + "," +
                          (o.theta1 ? "1" : "0") + "," + fmt(o.mstar_dp) + "," + fmt(iso) + "," + fmt(comp) + "," +
                          (refused ? "1" : "0");
        win[idx] = o.winner_j ? 1 : 0;
        ref[idx] = refused ? 1 : 0;
      });
      for (std::size_t i = 0; i < win.size(); ++i) {
        r.winners += win[i];
        r.refusals += ref[i];
      }
      break;
    }
    case ExperimentKind::global: {
      const GlobalConfig cfg = global_config(exp);
      config_json = to_json(cfg);
      r.lines.resize(static_cast<std::size_t>(exp.trials));
      r.csv_rows.resize(static_cast<std::size_t>(exp.trials));
      r.csv_header = "trial,stream,alpha,case,winner_j,min_xi_prime_radius,isomorphism_bound,complementation_bound,"
                     "bound,refused";
      std::vector<int> win(static_cast<std::size_t>(exp.trials), 0), ref(static_cast<std::size_t>(exp.trials), 0);
      parallel_for(exp.trials, threads, [&](int i) {
        const SeedStream ts = global_trial_stream(cfg.master_seed, static_cast<std::uint64_t>(i));
        const GlobalInstance inst =
            build_global_instance(cfg, sample_block_gaussian(cfg.n, cfg.k, cfg.N, 1.0 / double(cfg.n), ts.derive(0)),
                                  sample_rotation(cfg, ts.derive(1)));
        GlobalTrialOutcome o = run_global_trial(cfg, inst, ts.derive(2));
        o.trial_index = static_cast<std::uint64_t>(i);
        o.seed = ts;
        nlohmann::json rec{{"kind", "global"}, {"config", config_json}, {"constants", csnap}, {"outcome", to_json(o)}};
        double iso = NAN, comp = NAN, bound = NAN;
        bool refused = false;
        if (o.winner_j && exp.certify) {
          Budget b;
          b.seed = ts.derive(3);
          try {
            const GlobalCertificate c = certify_global(cfg, inst, o, b);
            rec["certificate"] = to_json(c);
            iso = c.isomorphism_bound;
            comp = c.complementation_bound;
            bound = c.bound;
          } catch (const CertificateRefused& e) {
            rec["certificate_refused"] = refusal_json(e);
            refused = true;
          }
        }
        double min_r = INFINITY;
        for (const auto& b : o.blocks) min_r = std::min(min_r, b.xi_prime_radius);
        const auto idx = static_cast<std::size_t>(i);
        r.lines[idx] = rec.dump();
        r.csv_rows[idx] = std::to_string(i) + "," + std::to_string(o.seed.stream_index) + "," + fmt(o.alpha) + "," +
                          std::to_string(o.case_id) + "," + (o.winner_j ? std::to_string(*o.winner_j) : "") + "," +
                          fmt(min_r) + "," + fmt(iso) + "," + fmt(comp) + "," + fmt(bound) + "," +
                          (refused ? "1" : "0");
        win[idx] = o.winner_j ? 1 : 0;
        ref[idx] = refused ? 1 : 0;
      });
      for (std::size_t i = 0; i < win.size(); ++i) {
        r.winners += win[i];
        r.refusals += ref[i];
      }
      break;
    }
    case ExperimentKind::lemma: {
      config_json = exp.config;
      const std::string suite = exp.config.at("suite").get<std::string>();
      const nlohmann::json res = run_lemma_suite(suite, exp.config, constants, exp.seed);
      r.lines.push_back(nlohmann::json{{"kind", "lemma"}, {"constants", csnap}, {"result", res}}.dump());
      r.csv_header = "suite,passes";
      r.csv_rows.push_back(suite + "," + (res.value("passes", false) ? "1" : "0"));
      break;
    }
  }

  nlohmann::json digests = nlohmann::json::array();
  std::string all;
  for (const auto& l : r.lines) {
    digests.push_back(sha256_hex(l));
    all += l;
    all += '\n';
  }
  r.manifest = {{"tool_version", kToolVersion},
                {"kind", to_string(exp.kind)},
                {"master_seed", exp.seed},
                {"trials", exp.kind == ExperimentKind::local || exp.kind == ExperimentKind::global ? exp.trials : 1},
                {"threads", threads},
                {"start", start},
                {"end", utc_now()},
                {"config", config_json},
                {"constants", csnap},
                {"winners", r.winners},
                {"refusals", r.refusals},
                {"trial_digests", digests},
                {"log_digest", sha256_hex(all)}};
  return r;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trials.jsonl", std::ios::binary);
    for (const auto& l : r.lines) out << l << '\n';
  }
  {
    std::ofstream out(dir / "summary.csv", std::ios::binary);
    out << r.csv_header << '\n';
    for (const auto& row : r.csv_rows) out << row << '\n';
  }
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << r.manifest.dump(2) << '\n';
  }
  if (!std::filesystem::exists(dir / "trials.jsonl")) throw std::runtime_error("could not write " + dir.string());
}

nlohmann::json run_lemma_suite(const std::string& suite, const nlohmann::json& params, const Constants& constants,
                               std::uint64_t seed) {
  const SeedStream root{seed, 2};
  nlohmann::json out{{"suite", suite}};
  if (suite == "meanwidth") {
    const long s = params.value("s", 20L);
    const int d = params.value("d", 5);
    const double sigma = params.value("sigma", 0.3);
    const int trials = params.value("trials", 2000);
    MeanWidthImageOptions opt;
    opt.directions = params.value("directions", opt.directions);
    const LemmaCheckReport rep = check_mean_width_image(Body::euclidean_ball(s), 1.0, d, sigma, trials, root, opt);
    out["report"] = to_json(rep);
    out["passes"] = rep.details.at("relative_error") <= 0.02 &&
                    rep.details.at("tail_frequency") <= rep.details.at("tail_bound") + 0.05;
  } else if (suite == "shrinking") {
    const long s = params.value("s", 40L);
    const int d = params.value("d", 5);
    const double t = params.value("t", 0.4);
    const int trials = params.value("trials", 300);
    const int segments = params.value("segments", 30);
    const ShrinkMode mode = params.value("mode", std::string("projection")) == "gaussian" ? ShrinkMode::gaussian
                                                                                          : ShrinkMode::projection;
    auto rng = root.derive(0).engine();
    std::vector<Body> parts;
    for (int i = 0; i < segments; ++i) parts.push_back(Body::ellipsoid_image(random_unit_vector(s, rng)));
    const Body body = Body::p_convex_hull(1.0, std::move(parts), s);
    const LemmaCheckReport rep = check_shrinking(body, 1.0, d, t, mode, trials, root.derive(1));
    out["report"] = to_json(rep);
    out["passes"] = rep.success_frequency() >= rep.predicted_bound - 0.05;
  } else if (suite == "decouple") {
    const int n_max = params.value("n_max", 9);
    const int instances = params.value("instances", 200);
    if (n_max < 3 || n_max > 15) throw std::invalid_argument("lemma decouple: n_max must lie in [3, 15]");
    auto rng = root.derive(0).engine();
    std::uniform_int_distribution<int> pick(3, n_max);
    int found_valid = 0, oracle_valid = 0;
    for (int t = 0; t < instances; ++t) {
      const int n = pick(rng);
      const DecouplingInstance inst{n, random_stochastic(n, rng)};
      const DecouplingResult a = find_decoupling_set(inst, root.derive(1000 + static_cast<std::uint64_t>(t)));
      const int ell = (n + 2) / 3;
      const bool ok = a.status == DecouplingStatus::found && int(a.j_set.size()) >= ell &&
                      min_outside_mass(inst, a.j_set) >= 1.0 / 3.0 - 1e-9;
      found_valid += ok;
      const DecouplingResult o = exhaustive_oracle(inst);
      oracle_valid += ok && int(o.j_set.size()) >= ell && o.min_outside_mass >= 1.0 / 3.0 - 1e-9;
    }
    out["instances"] = instances;
    out["valid"] = found_valid;
    out["oracle_agreements"] = oracle_valid;
    out["passes"] = found_valid == instances && oracle_valid == instances;
  } else if (suite == "case1") {
    const long n = params.value("n", 200L);
    const long k = params.value("k", 3L);
    const double c = params.value("c", constants.get("c_case1"));
    const int trials = params.value("trials", 300);
    const std::string u_kind = params.value("u", std::string("half_flip"));
    Matrix u = Matrix::Identity(n, n);
    if (u_kind == "half_flip") {
      for (long i = 0; i < n / 2; ++i) u(i, i) = -1.0;
    } else if (u_kind == "haar") {
      u = haar_rotation(n, root.derive(7)).matrix();
      if (u.trace() < 0) u = -u;
    } else if (u_kind != "identity") {
      throw std::invalid_argument("lemma case1: u must be half_flip, haar or identity");
    }
    const LemmaCheckReport rep = check_case1_lemma(n, k, u, c, trials, root.derive(1));
    out["report"] = to_json(rep);
    out["passes"] = rep.success_frequency() >= 0.95 && rep.details.at("second_moment_rel_error") <= 0.02;
  } else if (suite == "case2") {
    const long n = params.value("n", 100L);
    const long k = params.value("k", 3L);
    const double gamma = params.value("gamma", 0.3);
    const int trials = params.value("trials", 300);
    const std::string t_kind = params.value("T", std::string("identity"));
    Matrix t = Matrix::Identity(n, n);
    if (t_kind == "zero") {
      t.setZero();
    } else if (t_kind == "diag") {
      auto rng = root.derive(7).engine();
      std::uniform_real_distribution<double> unif(0.0, 2.0);
      for (long i = 0; i < n; ++i) t(i, i) = unif(rng);
    } else if (t_kind != "identity") {
      throw std::invalid_argument("lemma case2: T must be identity, zero or diag");
    }
    const LemmaCheckReport rep = check_case2_lemma(n, k, t, gamma, trials, root.derive(1));
    out["report"] = to_json(rep);
    out["passes"] = rep.success_frequency() >= rep.predicted_bound - 0.05 &&
                    rep.details.at("second_moment_rel_error") <= 0.02;
  } else if (suite == "cpbound") {
    const long nb = params.value("N", 16L);
    const long k = params.value("k", 2L);
    const double p = params.value("p", 1.5);
    const int dirs = params.value("directions", 4096);
    const CpBound b = cp_mean_width_bound(nb, k, p, constants.get("C_meanwidth"), dirs, root);
    out["report"] = {{"estimate", b.estimate}, {"std_error", b.std_error}, {"bound", b.bound}, {"q", b.q}};
    out["passes"] = b.holds;
  } else {
    throw std::invalid_argument("unknown lemma suite '" + suite + "'");
  }
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

nlohmann::json summarize_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("report: cannot open " + path.string());
  int records = 0, winners = 0, certified = 0, refused = 0;
  double max_iso = 0.0, max_comp = 0.0;
  std::map<std::string, int> kinds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    ++records;
    kinds[j.value("kind", std::string("?"))]++;
    if (j.contains("outcome") && !j["outcome"]["winner_j"].is_null()) ++winners;
    if (j.contains("certificate")) {
      ++certified;
      max_iso = std::max(max_iso, j["certificate"]["isomorphism_bound"].get<double>());
      max_comp = std::max(max_comp, j["certificate"]["complementation_bound"].get<double>());
    }
    if (j.contains("certificate_refused")) ++refused;
  }
  return {{"records", records},
          {"kinds", kinds},
          {"winners", winners},
          {"certified", certified},
          {"refused", refused},
          {"max_isomorphism_bound", max_iso},
          {"max_complementation_bound", max_comp}};
}

}  // namespace randsat
