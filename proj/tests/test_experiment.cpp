#include <doctest.h>

#include "randsat/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace randsat;

namespace {

nlohmann::json small_local(int trials) {
  return {{"kind", "local"},
          {"trials", trials},
          {"seed", 5},
          {"config", {{"q", 4}, {"n", 16}, {"m", 8}, {"k", 2}, {"N", 8}, {"kappa", 0.1}, {"base_norm", "linf"}}}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("experiment parsing rejects invalid payloads") {
  CHECK_THROWS_AS((void)parse_experiment({{"kind", "dance"}}), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_experiment({{"kind", "plan"}, {"config", {{"q", 2.0}, {"n", 64}, {"m0", 32}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)parse_experiment({{"kind", "plan"}, {"config", {{"q", 4.0}}}}), std::invalid_argument);
  auto bad = small_local(2);
  bad["config"]["m"] = 40;
  CHECK_THROWS_AS((void)parse_experiment(bad), std::invalid_argument);
  auto unknown_constant = small_local(2);
  unknown_constant["constants"] = {{"nonsense", 1.0}};
  CHECK_THROWS_AS((void)parse_experiment(unknown_constant), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_experiment({{"kind", "lemma"}, {"config", {{"suite", "nope"}}}}),
                  std::invalid_argument);
}

TEST_CASE("local run: one record per trial, constants embedded, deterministic across threads") {
  const ExperimentFile e = parse_experiment(small_local(3));
  const RunResult a = run_experiment(e, 1);
  const RunResult b = run_experiment(e, 3);
  REQUIRE(a.lines.size() == 3);
  CHECK(a.lines == b.lines);
  CHECK(a.csv_rows.size() == 3);
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    const auto j = nlohmann::json::parse(a.lines[i]);
    CHECK(j.at("constants").at("c_case1") == doctest::Approx(0.1));
    CHECK(j.at("outcome").at("trial") == i);
    CHECK(a.manifest.at("trial_digests").at(i) == sha256_hex(a.lines[i]));
  }
  CHECK(a.manifest.at("tool_version") == kToolVersion);
}

TEST_CASE("global run with the identity rotation is always case 2") {
  const ExperimentFile e = parse_experiment({{"kind", "global"},
                                             {"trials", 3},
                                             {"seed", 1},
                                             {"config", {{"n", 24}, {"k", 2}, {"N", 12}, {"rotation", "identity"}}}});
  for (const auto& line : run_experiment(e).lines) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("outcome").at("case") == 2);
    CHECK(j.at("outcome").at("alpha").get<double>() == doctest::Approx(0.0));
  }
}

TEST_CASE("outputs are written and summarized") {
  const auto dir = std::filesystem::temp_directory_path() / "randsat_test_outputs";
  std::filesystem::remove_all(dir);
  const RunResult r = run_experiment(parse_experiment(small_local(2)));
  write_outputs(r, dir);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  std::string log = slurp(dir / "trials.jsonl");
  CHECK(std::count(log.begin(), log.end(), '\n') == 2);
  const auto s = summarize_log(dir / "trials.jsonl");
  CHECK(s.at("records") == 2);
  CHECK(s.at("winners").get<int>() == r.winners);
  std::filesystem::remove_all(dir);
}

TEST_CASE("plan experiment and lemma suite records") {
  const RunResult p =
      run_experiment(parse_experiment({{"kind", "plan"}, {"config", {{"q", 4}, {"n", 1024}, {"m0", 512}}}}));
  REQUIRE(p.lines.size() == 1);
  CHECK(nlohmann::json::parse(p.lines[0]).at("plan").at("alpha_exponent").get<double>() == doctest::Approx(0.2));
  const auto d = run_lemma_suite("decouple", {{"n_max", 6}, {"instances", 20}}, Constants::defaults(), 1);
  CHECK(d.at("passes") == true);
  CHECK(d.at("oracle_agreements") == 20);
  CHECK_THROWS_AS((void)run_lemma_suite("nothing", {}, Constants::defaults(), 1), std::invalid_argument);
}
