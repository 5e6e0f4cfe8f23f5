#include <catch2/catch_amalgamated.hpp>

#include "twinsync/run_config.hpp"

using namespace twinsync;
using nlohmann::json;

TEST_CASE("empty config parses to valid defaults") {
  std::vector<std::string> violations;
  const RunConfig cfg = parse_run_config(json::object(), violations);
  REQUIRE(violations.empty());
  REQUIRE(cfg.seed == 1);
  REQUIRE(cfg.synth.duration_slots == 20000);
  REQUIRE(cfg.synth.components.size() == 3);
  REQUIRE(cfg.channel.d_max == 10);
  REQUIRE(cfg.channel.p_loss == Catch::Approx(0.01));
  REQUIRE(cfg.agent.gamma == Catch::Approx(0.99));
  REQUIRE(cfg.grid.w_values.size() == 10);
}

TEST_CASE("fingerprint ignores input paths") {
  std::vector<std::string> violations;
  RunConfig a = parse_run_config(json::object(), violations);
  RunConfig b = a;
  b.trace_csv = "elsewhere/trace.csv";
  b.predictor_checkpoint = "elsewhere/predictor.json";
  b.agent_checkpoint = "elsewhere/agent.json";
  REQUIRE(config_fingerprint(a) == config_fingerprint(b));
}

TEST_CASE("unknown keys are rejected with full reporting") {
  const json j = {
      {"seed", 3},
      {"tracee", {{"csv", "x.csv"}}},                     // typo at the top level
      {"agent", {{"gamma", 0.9}, {"gama_c", 0.1}}},       // typo in a section
      {"channel", {{"p_loss", 0.5}, {"burst", true}}},    // unknown nested key
  };
  std::vector<std::string> violations;
  parse_run_config(j, violations);
  REQUIRE(violations.size() == 3);
  REQUIRE_THAT(violations[0], Catch::Matchers::ContainsSubstring("tracee"));
  bool saw_agent = false, saw_channel = false;
  for (const auto& v : violations) {
    if (v.find("gama_c") != std::string::npos) saw_agent = true;
    if (v.find("burst") != std::string::npos) saw_channel = true;
  }
  REQUIRE(saw_agent);
  REQUIRE(saw_channel);
}

TEST_CASE("range violations are all collected") {
  const json j = {
      {"channel", {{"p_loss", 1.5}}},
      {"agent", {{"gamma", 2.0}}},
      {"bench", {{"repeats", 0}}},
  };
  std::vector<std::string> violations;
  parse_run_config(j, violations);
  REQUIRE(violations.size() >= 3);
}

TEST_CASE("wrong types are reported per key") {
  const json j = {{"seed", "not-a-number"}, {"agent", {{"sigma", "loud"}}}};
  std::vector<std::string> violations;
  parse_run_config(j, violations);
  bool saw_seed = false, saw_sigma = false;
  for (const auto& v : violations) {
    if (v.find("seed") != std::string::npos) saw_seed = true;
    if (v.find("sigma") != std::string::npos) saw_sigma = true;
  }
  REQUIRE(saw_seed);
  REQUIRE(saw_sigma);
}

TEST_CASE("config round trip is stable") {
  std::vector<std::string> violations;
  RunConfig cfg = parse_run_config(json::object(), violations);
  cfg.agent.gamma_c = 0.0123;
  cfg.channel.p_loss = 0.07;
  const json dumped = run_config_to_json(cfg);
  violations.clear();
  const RunConfig back = parse_run_config(dumped, violations);
  REQUIRE(violations.empty());
  REQUIRE(run_config_to_json(back) == dumped);
}

TEST_CASE("fingerprint tracks config content") {
  std::vector<std::string> violations;
  RunConfig a = parse_run_config(json::object(), violations);
  RunConfig b = a;
  REQUIRE(config_fingerprint(a) == config_fingerprint(b));
  b.agent.gamma_c *= 2;
  REQUIRE(config_fingerprint(a) != config_fingerprint(b));
  b = a;
  b.seed += 1;
  REQUIRE(config_fingerprint(a) != config_fingerprint(b));
}
