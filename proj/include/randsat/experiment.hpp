#pragma once

// Experiment files, seeded batch execution and the log / summary / manifest
// writers shared by satcli and the acceptance suite.

#include "randsat/constants.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace randsat {

inline constexpr const char* kToolVersion = "0.3.0";

enum class ExperimentKind { plan, local, global, lemma };
std::string to_string(ExperimentKind k);

/// Experiment file schema (JSON):
///   kind        "plan" | "local" | "global" | "lemma"
///   config      payload for the kind (see README)
///   trials      number of seeded trials (local, global)
///   seed        master seed
///   output_dir  where run writes its files
///   constants   map name -> value, applied over the defaults
///   certify     bool, certify winners (local, global; default true)
struct ExperimentFile {
  ExperimentKind kind = ExperimentKind::local;
  nlohmann::json config = nlohmann::json::object();
  int trials = 10;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::map<std::string, double> constants_overrides;
  bool certify = true;

  [[nodiscard]] Constants constants() const;
};

/// Parses and validates the payload against its module before any sampling.
/// Throws std::invalid_argument naming the violated invariant.
ExperimentFile parse_experiment(const nlohmann::json& j);
ExperimentFile load_experiment(const std::filesystem::path& path);

struct RunResult {
  std::vector<std::string> lines;  ///< one JSON record per trial, in trial order
  std::vector<std::string> csv_rows;
  std::string csv_header;
  nlohmann::json manifest;
  int winners = 0;
  int refusals = 0;
};

/// Runs every trial with `threads` workers; output order is the trial index.
RunResult run_experiment(const ExperimentFile& exp, int threads = 1);

/// trials.jsonl, summary.csv and manifest.json in `dir`.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

/// Lemma suites: meanwidth, shrinking, decouple, case1, case2, cpbound.
/// `params` overrides the suite's acceptance configuration.
nlohmann::json run_lemma_suite(const std::string& suite, const nlohmann::json& params, const Constants& constants,
                               std::uint64_t seed);

/// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& data);

/// Summary of a trials.jsonl log: counts and certificate extremes.
nlohmann::json summarize_log(const std::filesystem::path& path);

}  // namespace randsat
