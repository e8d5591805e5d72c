// satcli: planning, seeded batch runs, lemma suites and log reports.

#include "randsat/experiment.hpp"
#include "randsat/satlocal.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace randsat;

namespace {

Constants apply_assignments(Constants c, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) c.set_from_string(a);
  return c;
}

std::map<std::string, double> overrides_from(const std::vector<std::string>& assignments) {
  std::map<std::string, double> out;
  Constants probe = Constants::defaults();
  for (const auto& a : assignments) {
    probe.set_from_string(a);  // validates name and value
    const auto eq = a.find('=');
    out[a.substr(0, eq)] = probe.get(a.substr(0, eq));
  }
  return out;
}

void print_plan(const PlanReport& p) {
  std::printf("q=%g n=%ld m0=%ld\n", p.q, p.n, p.m0);
  std::printf("alpha_exponent  %.6g\n", p.alpha_exponent);
  std::printf("k_bound         %.6g\n", p.k_bound);
  std::printf("k_max           %ld\n", p.k_max);
  std::printf("k_used          %ld\n", p.k_used);
  std::printf("kappa           %.6g\n", p.kappa_chosen);
  std::printf("N               %ld\n", p.N_chosen);
  std::printf("\n%-26s %14s %14s  %s\n", "constraint", "lhs", "rhs", "ok");
  for (const auto& c : p.constraints)
    std::printf("%-26s %14.6g %14.6g  %s\n", c.name.c_str(), c.lhs, c.rhs, c.satisfied ? "yes" : "NO");
  std::printf("\nfeasible: %s\n", p.feasible ? "yes" : "no");
}

// "--n-max 9 --T identity" -> {"n_max": 9, "T": "identity"}
nlohmann::json params_from_extras(const std::vector<std::string>& extras) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string key = extras[i];
    if (key.rfind("--", 0) != 0) throw CLI::ValidationError("lemma", "unexpected argument '" + key + "'");
    key = key.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw CLI::ValidationError("lemma", "--" + key + " needs a value");
      value = extras[++i];
    }
    for (auto& ch : key)
      if (ch == '-') ch = '_';
    std::size_t used = 0;
    try {
      const double v = std::stod(value, &used);
      if (used == value.size()) {
        if (value.find_first_of(".eE") == std::string::npos)
          j[key] = static_cast<long>(v);
        else
          j[key] = v;
        continue;
      }
    } catch (const std::exception&) {
    }
    j[key] = value;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random saturating constructions: planning, experiments and lemma checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int threads = 1;
  std::vector<std::string> constant_args;
  std::optional<std::string> output;
  app.add_option("--seed", seed, "master seed");
  app.add_option("--trials", trials, "number of trials (run)")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--constants", constant_args, "override a constant, KEY=VAL (repeatable)");
  app.add_option("--output", output, "output directory");

  auto* plan_cmd = app.add_subcommand("plan", "choose k, kappa and N for (q, n, m0)");
  std::string q_text;
  long n = 0, m0 = 0;
  std::optional<double> epsilon;
  std::optional<long> k_override;
  plan_cmd->add_option("--q", q_text, "cotype exponent (> 2, or 'inf')")->required();
  plan_cmd->add_option("--n", n, "ambient dimension")->required()->check(CLI::PositiveNumber);
  plan_cmd->add_option("--m0", m0, "quotient dimension")->required()->check(CLI::PositiveNumber);
  plan_cmd->add_option("--epsilon", epsilon, "brutal-inclusion slack");
  plan_cmd->add_option("--k", k_override, "force k")->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "run an experiment file");
  std::string exp_path;
  run_cmd->add_option("file", exp_path, "experiment JSON")->required()->check(CLI::ExistingFile);

  auto* lemma_cmd = app.add_subcommand("lemma", "run a lemma check suite");
  std::string suite;
  lemma_cmd->add_option("suite", suite, "meanwidth | shrinking | decouple | case1 | case2 | cpbound")
      ->required()
      ->check(CLI::IsMember({"meanwidth", "shrinking", "decouple", "case1", "case2", "cpbound"}));
  lemma_cmd->allow_extras();
  app.allow_extras();  // lemma parameters surface here once the subcommand falls through

  auto* report_cmd = app.add_subcommand("report", "summarize a trials.jsonl log");
  std::string log_path;
  report_cmd->add_option("log", log_path, "trials.jsonl")->required()->check(CLI::ExistingFile);

  // Global flags are accepted after the subcommand as well.
  for (auto* sub : {plan_cmd, run_cmd, lemma_cmd, report_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const std::vector<std::string> extras = app.remaining(true);
    if (!*lemma_cmd && !extras.empty())
      throw CLI::ValidationError("arguments", "unexpected argument '" + extras.front() + "'");

    if (*plan_cmd) {
      double q = 0.0;
      if (q_text == "inf" || q_text == "infinity") {
        q = INFINITY;
      } else {
        try {
          q = std::stod(q_text);
        } catch (const std::exception&) {
          throw std::invalid_argument("q must be a number or 'inf'");
        }
      }
      if (!(q > 2.0)) throw std::invalid_argument("q must exceed 2");
      const Constants c = apply_assignments(Constants::defaults(), constant_args);
      const PlanReport p = plan(q, n, m0, epsilon, c, k_override);
      print_plan(p);
      const std::filesystem::path dir = output.value_or(".");
      std::filesystem::create_directories(dir);
      std::ofstream(dir / "plan.json") << to_json(p).dump(2) << '\n';
      return p.feasible ? 0 : 2;
    }

    if (*run_cmd) {
      ExperimentFile exp = load_experiment(exp_path);
      if (seed) exp.seed = *seed;
      if (trials) exp.trials = *trials;
      if (output) exp.output_dir = *output;
      for (const auto& [k, v] : overrides_from(constant_args)) exp.constants_overrides[k] = v;
      exp = parse_experiment([&] {
        nlohmann::json j{{"kind", to_string(exp.kind)}, {"config", exp.config},     {"trials", exp.trials},
                         {"seed", exp.seed},            {"output_dir", exp.output_dir}, {"certify", exp.certify},
                         {"constants", exp.constants_overrides}};
        return j;
      }());
      const RunResult r = run_experiment(exp, threads);
      write_outputs(r, exp.output_dir);
      std::printf("%s: %zu records, %d winners, %d refusals -> %s\n", to_string(exp.kind).c_str(), r.lines.size(),
                  r.winners, r.refusals, exp.output_dir.c_str());
      return 0;
    }

    if (*lemma_cmd) {
      const nlohmann::json params = params_from_extras(extras);
      const Constants c = apply_assignments(Constants::defaults(), constant_args);
      const nlohmann::json res = run_lemma_suite(suite, params, c, seed.value_or(0));
      std::cout << res.dump(2) << '\n';
      if (output) {
        std::filesystem::create_directories(*output);
        std::ofstream(std::filesystem::path(*output) / ("lemma_" + suite + ".json")) << res.dump(2) << '\n';
      }
      return 0;
    }

    if (*report_cmd) {
      std::cout << summarize_log(log_path).dump(2) << '\n';
      return 0;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const PreconditionViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
