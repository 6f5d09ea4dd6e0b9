#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ruin/cli.hpp"
#include "ruin/config.hpp"
#include "ruin/error.hpp"

using namespace ruin;
using nlohmann::json;

namespace {

const char* kModel = R"({"rate": {"kind": "critical_inverse", "theta": 3},
                         "xi": {"family": "exponential", "rate": 1},
                         "tau": {"family": "exponential", "rate": 1}})";

class TempConfig {
 public:
  explicit TempConfig(const std::string& text) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ruin_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".json");
    std::ofstream(path_) << text;
  }
  ~TempConfig() { std::filesystem::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string with_model(const std::string& rest) { return std::string("{\"model\": ") + kModel + rest + "}"; }

}  // namespace

TEST_CASE("config defaults and resolution") {
  const auto c = parse_config(json::parse(with_model("")));
  CHECK(c.model.v_c() == 1.0);
  CHECK(c.x == 10.0);
  CHECK(c.grid == std::vector<double>{10.0});
  CHECK(c.n_paths == 10000);
  CHECK_FALSE(c.caps);
  CHECK_FALSE(c.splitting);
  CHECK(c.drift_grid == std::vector<double>{5, 10, 20, 40, 80});
  CHECK(c.resolved["model"]["rate"]["v_c"] == 1.0);
  CHECK(c.resolved["model"]["rate"]["z_min"] == 1.0);
  CHECK(c.resolved["estimator"]["method"] == "plain");

  const auto s = parse_config(json::parse(with_model(
      R"(, "grid": [5, 10], "caps": {"max_steps": 100}, "estimator": {"method": "splitting", "replicates": 4}, "seed": 9)")));
  CHECK(s.x == 5.0);
  CHECK(s.reference_x == 5.0);
  CHECK(s.caps->max_steps == 100);
  CHECK(s.caps->level_cap == 1e4);
  REQUIRE(s.splitting);
  CHECK(s.splitting->replicates == 4);
  CHECK(*s.seed == 9);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(parse_config(json::parse(with_model(R"(, "bogus": 1)"))), ModelError);
  CHECK_THROWS_AS(parse_config(json::parse(with_model(R"(, "n_paths": 0)"))), ModelError);
  CHECK_THROWS_AS(parse_config(json::parse(with_model(R"(, "n_paths": -3)"))), ModelError);
  CHECK_THROWS_AS(parse_config(json::parse(with_model(R"(, "grid": [1, "a"])"))), ModelError);
  CHECK_THROWS_AS(parse_config(json::parse(with_model(R"(, "estimator": {"method": "magic"})"))), ModelError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"grid": [1]})")), ModelError);
  CHECK_THROWS_AS(parse_model(json::parse(R"({"rate": {"kind": "constant", "v": 2},
      "xi": {"family": "lognormal"}, "tau": {"family": "exponential", "rate": 1}})")),
                  ModelError);
  CHECK_THROWS_AS(parse_model(json::parse(R"({"rate": {"kind": "critical_inverse", "theta": 3, "v_c": 2},
      "xi": {"family": "exponential", "rate": 1}, "tau": {"family": "exponential", "rate": 1}})")),
                  ModelError);
  TempConfig empty("  \n");
  CHECK_THROWS_AS(load_config(empty.path()), ModelError);
  TempConfig broken("{");
  CHECK_THROWS_AS(load_config(broken.path()), ModelError);
  CHECK_THROWS_AS(load_config("/nonexistent/ruin.json"), ModelError);
}

TEST_CASE("tabulated and power rates parse") {
  const auto t = parse_model(json::parse(R"({"rate": {"kind": "tabulated", "breakpoints": [[0, 3], [5, 2]]},
      "xi": {"family": "gamma", "shape": 2, "rate": 2}, "tau": {"family": "deterministic", "value": 1}})"));
  CHECK(t.rate()(6.0) == 2.0);
  const auto p = parse_model(json::parse(R"({"rate": {"kind": "critical_power", "theta": 2, "alpha": 0.5,
      "envelope": {"scale": 0.5}}, "xi": {"family": "pareto", "beta": 1}, "tau": {"family": "exponential", "rate": 2}})"));
  CHECK(p.v_c() == doctest::Approx(1.0));
  CHECK(p.rate().envelope()->exponent == 1.5);
}

TEST_CASE("cli exit codes") {
  TempConfig good(with_model(R"(, "grid": [3, 6], "n_paths": 200, "caps": {"max_steps": 100000, "level_cap": 300})"));
  auto r = run_cli({"--config", good.path(), "classify"});
  CHECK(r.code == kExitOk);
  CHECK(r.out == "Transient (theta=3 > threshold=1, rho=2)\n");

  r = run_cli({"classify"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("--config") != std::string::npos);
  r = run_cli({"--config", good.path(), "--frobnicate", "classify"});
  CHECK(r.code == kExitConfig);
  r = run_cli({"--config", good.path()});
  CHECK(r.code == kExitConfig);

  TempConfig empty("");
  CHECK(run_cli({"--config", empty.path(), "simulate"}).code == kExitConfig);
  TempConfig unknown(with_model(R"(, "speed": 3)"));
  CHECK(run_cli({"--config", unknown.path(), "simulate"}).code == kExitConfig);

  TempConfig recurrent(R"({"model": {"rate": {"kind": "critical_inverse", "theta": 0.5},
      "xi": {"family": "exponential", "rate": 1}, "tau": {"family": "exponential", "rate": 1}}})");
  r = run_cli({"--config", recurrent.path(), "validate-expexp"});
  CHECK(r.code == kExitNumerical);
  CHECK(r.err.find("recurrent") != std::string::npos);
  CHECK(run_cli({"--config", recurrent.path(), "classify"}).out == "Recurrent (theta=0.5 < threshold=1)\n");
}

TEST_CASE("cli output is reproducible and self-describing") {
  TempConfig cfg(with_model(R"(, "grid": [3, 6], "n_paths": 300, "caps": {"max_steps": 100000, "level_cap": 300},
                              "estimator": {"roulette": 0.5})"));
  const auto a = run_cli({"--config", cfg.path(), "--threads", "1", "curve"});
  const auto b = run_cli({"--config", cfg.path(), "--threads", "3", "curve"});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("# ruinsim " + version_string() + "\n# command: curve\n# seed: 0\n# config: {", 0) == 0);
  CHECK(a.out.find("\"roulette\":0.5") != std::string::npos);
  CHECK(a.out.find("x,p_hat,half_width,n_paths,censored_cap,censored_horizon,p_hat_pessimistic\n3,") !=
        std::string::npos);

  const auto s = run_cli({"--config", cfg.path(), "--seed", "17", "curve"});
  CHECK(s.out.find("# seed: 17\n") != std::string::npos);
  CHECK(s.out != a.out);

  const auto out_path = (std::filesystem::temp_directory_path() / "ruin_cli_out.csv").string();
  const auto f = run_cli({"--config", cfg.path(), "--out", out_path, "--threads", "1", "curve"});
  CHECK(f.out.empty());
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == a.out);
  std::filesystem::remove(out_path);

  const auto v = run_cli({"--config", cfg.path(), "validate-expexp"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find("x,p_hat,half_width,mc_ratio,closed_form_ratio,z_score\n3,") != std::string::npos);

  TempConfig prof(with_model(R"(, "profile": {"x_max": 10, "points": 11})"));
  const auto p = run_cli({"--config", prof.path(), "profile-export"});
  CHECK(p.code == kExitOk);
  CHECK(p.out.find("\n10,") != std::string::npos);
  std::size_t rows = 0;
  for (char ch : p.out) rows += ch == '\n';
  CHECK(rows == 4 + 1 + 11);
}
