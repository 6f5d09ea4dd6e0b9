#include "ruin/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ruin/error.hpp"

namespace ruin {
namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ModelError(where + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ModelError(where + ": unknown key '" + k + "'");
}

double num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ModelError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ModelError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

double num_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? num(j, key, where) : fallback;
}

std::uint64_t count(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned())
    throw ModelError(where + ": '" + key + "' must be a non-negative integer");
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 0) throw ModelError(where + ": '" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> levels(const json& j, const char* key, const std::string& where) {
  if (!j.at(key).is_array()) throw ModelError(where + ": '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ModelError(where + ": '" + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Distribution parse_distribution(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw ModelError(where + ": needs a 'family' string");
  const std::string fam = j.at("family");
  if (fam == "exponential") {
    allow_keys(j, where, {"family", "rate"});
    return Distribution(Exponential{num(j, "rate", where)});
  }
  if (fam == "gamma") {
    allow_keys(j, where, {"family", "shape", "rate"});
    return Distribution(GammaDist{num(j, "shape", where), num(j, "rate", where)});
  }
  if (fam == "pareto") {
    allow_keys(j, where, {"family", "beta", "scale"});
    return Distribution(ParetoType{num(j, "beta", where), num_or(j, "scale", 1.0, where)});
  }
  if (fam == "deterministic") {
    allow_keys(j, where, {"family", "value"});
    return Distribution(Deterministic{num(j, "value", where)});
  }
  throw ModelError(where + ": unknown family '" + fam + "'");
}

PremiumRate parse_rate(const json& j, double v_c) {
  const std::string where = "model.rate";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ModelError(where + ": needs a 'kind' string");
  const std::string kind = j.at("kind");
  std::optional<Envelope> env;
  if (j.contains("envelope")) {
    const json& e = j.at("envelope");
    allow_keys(e, where + ".envelope", {"scale", "exponent"});
    env = Envelope{num(e, "scale", where), num_or(e, "exponent", 1.5, where)};
  }
  if (kind == "constant") {
    allow_keys(j, where, {"kind", "v", "envelope"});
    return PremiumRate(ConstantRate{num(j, "v", where)}, env);
  }
  if (kind == "critical_inverse") {
    allow_keys(j, where, {"kind", "v_c", "theta", "z_min", "envelope"});
    return PremiumRate(CriticalInverse{num_or(j, "v_c", v_c, where), num(j, "theta", where),
                                       num_or(j, "z_min", 1.0, where)},
                       env);
  }
  if (kind == "critical_power") {
    allow_keys(j, where, {"kind", "v_c", "theta", "alpha", "z_min", "envelope"});
    return PremiumRate(CriticalPower{num_or(j, "v_c", v_c, where), num(j, "theta", where), num(j, "alpha", where),
                                     num_or(j, "z_min", 1.0, where)},
                       env);
  }
  if (kind == "tabulated") {
    allow_keys(j, where, {"kind", "breakpoints", "envelope"});
    if (!j.contains("breakpoints") || !j.at("breakpoints").is_array())
      throw ModelError(where + ": 'breakpoints' must be an array of [level, rate] pairs");
    Tabulated t;
    for (const auto& bp : j.at("breakpoints")) {
      if (!bp.is_array() || bp.size() != 2 || !bp[0].is_number() || !bp[1].is_number())
        throw ModelError(where + ": each breakpoint must be [level, rate]");
      t.breakpoints.emplace_back(bp[0].get<double>(), bp[1].get<double>());
    }
    return PremiumRate(t, env);
  }
  throw ModelError(where + ": unknown kind '" + kind + "'");
}

}  // namespace

RiskModel parse_model(const json& j) {
  allow_keys(j, "model", {"rate", "xi", "tau"});
  if (!j.contains("rate") || !j.contains("xi") || !j.contains("tau"))
    throw ModelError("model: needs 'rate', 'xi' and 'tau'");
  ClaimModel claims{parse_distribution(j.at("xi"), "model.xi"), parse_distribution(j.at("tau"), "model.tau")};
  const double v_c = critical_rate(claims);
  return RiskModel(parse_rate(j.at("rate"), v_c), std::move(claims));
}

ExperimentConfig parse_config(const json& j) {
  allow_keys(j, "config", {"model", "grid", "x", "reference_x", "n_paths", "caps", "estimator", "seed", "gamma",
                           "drift", "bounds", "heavy", "profile"});
  if (!j.contains("model")) throw ModelError("config: missing 'model'");
  ExperimentConfig c(json::object(), parse_model(j.at("model")));
  json r = j;

  // Critical rates may omit v_c; record the value actually used.
  if (auto lim = c.model.rate().critical_limit()) r["model"]["rate"]["v_c"] = *lim;
  if (c.model.rate().is_critical() && !r["model"]["rate"].contains("z_min"))
    r["model"]["rate"]["z_min"] = c.model.rate().z_min();

  if (j.contains("grid")) c.grid = levels(j, "grid", "config");
  c.x = num_or(j, "x", c.grid.empty() ? 10.0 : c.grid.front(), "config");
  if (c.grid.empty()) c.grid = {c.x};
  c.reference_x = num_or(j, "reference_x", c.grid.front(), "config");
  c.n_paths = count(j, "n_paths", c.n_paths, "config");
  if (c.n_paths < 1) throw ModelError("config: n_paths must be at least 1");
  r["grid"] = c.grid;
  r["x"] = c.x;
  r["reference_x"] = c.reference_x;
  r["n_paths"] = c.n_paths;

  if (j.contains("caps")) {
    const json& k = j.at("caps");
    allow_keys(k, "caps", {"max_steps", "level_cap"});
    PathCaps caps;
    caps.max_steps = count(k, "max_steps", caps.max_steps, "caps");
    caps.level_cap = num_or(k, "level_cap", caps.level_cap, "caps");
    if (caps.max_steps < 1) throw ModelError("caps: max_steps must be at least 1");
    c.caps = caps;
    r["caps"] = {{"max_steps", caps.max_steps}, {"level_cap", caps.level_cap}};
  }

  json est = j.value("estimator", json::object());
  allow_keys(est, "estimator", {"method", "roulette", "expected_value_scoring", "clopper_pearson", "particles",
                                "pilot_particles", "pilot_quantile", "replicates"});
  const std::string method = est.value("method", "plain");
  if (method != "plain" && method != "splitting") throw ModelError("estimator: method must be plain or splitting");
  if (est.contains("roulette")) c.estimator.roulette = num(est, "roulette", "estimator");
  c.estimator.expected_value_scoring = est.value("expected_value_scoring", false);
  c.estimator.clopper_pearson = est.value("clopper_pearson", false);
  if (method == "splitting") {
    SplittingOptions s;
    s.particles = count(est, "particles", s.particles, "estimator");
    s.pilot_particles = count(est, "pilot_particles", s.pilot_particles, "estimator");
    s.pilot_quantile = num_or(est, "pilot_quantile", s.pilot_quantile, "estimator");
    s.replicates = count(est, "replicates", s.replicates, "estimator");
    c.splitting = s;
    est["particles"] = s.particles;
    est["pilot_particles"] = s.pilot_particles;
    est["pilot_quantile"] = s.pilot_quantile;
    est["replicates"] = s.replicates;
  }
  est["method"] = method;
  est["expected_value_scoring"] = c.estimator.expected_value_scoring;
  est["clopper_pearson"] = c.estimator.clopper_pearson;
  r["estimator"] = est;

  if (j.contains("seed")) c.seed = count(j, "seed", 0, "config");

  json g = j.value("gamma", json::object());
  allow_keys(g, "gamma", {"n_steps", "paths"});
  c.gamma_steps = count(g, "n_steps", c.gamma_steps, "gamma");
  c.gamma_paths = count(g, "paths", c.gamma_paths, "gamma");
  r["gamma"] = {{"n_steps", c.gamma_steps}, {"paths", c.gamma_paths}};

  json d = j.value("drift", json::object());
  allow_keys(d, "drift", {"grid", "n_draws"});
  if (d.contains("grid")) c.drift_grid = levels(d, "grid", "drift");
  c.drift_draws = count(d, "n_draws", c.drift_draws, "drift");
  r["drift"] = {{"grid", c.drift_grid}, {"n_draws", c.drift_draws}};

  json b = j.value("bounds", json::object());
  allow_keys(b, "bounds", {"envelope_scale", "envelope_exponent", "delta_paths", "delta"});
  c.envelope_scale = num_or(b, "envelope_scale", c.envelope_scale, "bounds");
  c.envelope_exponent = num_or(b, "envelope_exponent", c.envelope_exponent, "bounds");
  c.delta_paths = count(b, "delta_paths", c.delta_paths, "bounds");
  if (b.contains("delta")) c.delta = num(b, "delta", "bounds");
  r["bounds"] = {{"envelope_scale", c.envelope_scale}, {"envelope_exponent", c.envelope_exponent},
                 {"delta_paths", c.delta_paths}};
  if (c.delta) r["bounds"]["delta"] = *c.delta;

  json h = j.value("heavy", json::object());
  allow_keys(h, "heavy", {"anchors"});
  if (h.contains("anchors")) c.heavy_anchors = levels(h, "anchors", "heavy");
  r["heavy"] = {{"anchors", c.heavy_anchors}};

  json p = j.value("profile", json::object());
  allow_keys(p, "profile", {"x_max", "points"});
  c.profile_x_max = num_or(p, "x_max", c.profile_x_max, "profile");
  c.profile_points = count(p, "points", c.profile_points, "profile");
  r["profile"] = {{"x_max", c.profile_x_max}, {"points", c.profile_points}};

  c.resolved = std::move(r);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ModelError("config '" + path + "' is empty");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace ruin
