#include "ruin/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ruin/closed_form.hpp"
#include "ruin/config.hpp"
#include "ruin/error.hpp"
#include "ruin/heavy_tail.hpp"
#include "ruin/lyapunov.hpp"
#include "ruin/monte_carlo.hpp"
#include "ruin/splitting.hpp"

#ifndef RUIN_VERSION
#define RUIN_VERSION "0.0.0-unknown"
#endif

namespace ruin {
namespace {

struct Context {
  ExperimentConfig cfg;
  std::uint64_t seed;
  unsigned threads;
  std::string command;
};

std::string g17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void header(std::ostream& os, const Context& c) {
  os << "# ruinsim " << version_string() << "\n";
  os << "# command: " << c.command << "\n";
  os << "# seed: " << c.seed << "\n";
  os << "# config: " << c.cfg.resolved.dump() << "\n";
}

void estimate_row(std::ostream& os, const RuinEstimate& e) {
  os << g17(e.x) << ',' << g17(e.p_hat) << ',' << g17(e.half_width) << ',' << e.n_paths << ',' << e.censored_cap
     << ',' << e.censored_horizon << ',' << g17(e.p_hat_pessimistic) << '\n';
}

constexpr const char* kEstimateColumns = "x,p_hat,half_width,n_paths,censored_cap,censored_horizon,p_hat_pessimistic";

std::vector<RuinEstimate> curve_for(const Context& c, const std::vector<double>& xs) {
  EstimatorOptions o = c.cfg.estimator;
  o.threads = c.threads;
  if (c.cfg.splitting) {
    std::vector<RuinEstimate> out;
    for (std::size_t g = 0; g < xs.size(); ++g) {
      SplittingOptions s = *c.cfg.splitting;
      s.threads = c.threads;
      const PathCaps caps = c.cfg.caps.value_or(default_caps(xs[g]));
      const SplittingEstimate se = estimate_ruin_splitting(c.cfg.model, xs[g], caps, derive_stream(c.seed, g), s);
      RuinEstimate e;
      e.x = xs[g];
      e.p_hat = se.p_hat;
      e.half_width = se.half_width;
      e.n_paths = s.particles * s.replicates;
      e.p_hat_pessimistic = se.p_hat;
      e.weighted = true;
      out.push_back(e);
    }
    return out;
  }
  return ruin_curve(c.cfg.model, xs, c.cfg.n_paths, c.cfg.caps, c.seed, o);
}

void cmd_simulate(std::ostream& os, const Context& c, const std::vector<double>& xs) {
  header(os, c);
  os << kEstimateColumns << '\n';
  for (const auto& e : curve_for(c, xs)) estimate_row(os, e);
}

void cmd_fit(std::ostream& os, const Context& c) {
  const auto curve = curve_for(c, c.cfg.grid);
  const DecayFit fit = decay_exponent_fit(curve);
  header(os, c);
  os << kEstimateColumns << '\n';
  for (const auto& e : curve) estimate_row(os, e);
  os << "\nrho_hat,std_error,points,rho_reference\n";
  const auto dc = derived_constants(c.cfg.model);
  os << g17(fit.rho_hat) << ',' << g17(fit.std_error) << ',' << fit.points << ','
     << (dc.rho ? g17(*dc.rho) : std::string("nan")) << '\n';
}

void cmd_classify(std::ostream& os, const Context& c) { os << classify(c.cfg.model).message << '\n'; }

void cmd_gamma(std::ostream& os, const Context& c) {
  const GammaLimitReport r = gamma_limit_test(c.cfg.model, c.cfg.gamma_steps, c.cfg.gamma_paths, c.seed, c.threads);
  header(os, c);
  os << "# survivors: " << r.survivors << " of " << r.simulated << " simulated paths\n";
  os << "statistic,empirical,reference\n";
  os << "mean," << g17(r.mean) << ',' << g17(r.reference_mean) << '\n';
  os << "variance," << g17(r.variance) << ',' << g17(r.reference_variance) << '\n';
  for (const auto& [p, emp, ref] : r.quantiles) os << "q" << g17(p) << ',' << g17(emp) << ',' << g17(ref) << '\n';
}

void cmd_bounds(std::ostream& os, const Context& c) {
  const RiskModel& m = c.cfg.model;
  const LyapunovProfile prof = build_profile_inverse(m, c.cfg.envelope_scale, c.cfg.envelope_exponent);
  const DriftReport dr = drift_check(prof, m, c.cfg.drift_grid, c.cfg.drift_draws, c.seed, c.threads);
  header(os, c);
  for (const auto& w : dr.warnings) os << "# warning: " << w << '\n';
  os << "x,drift_minus,se_minus,drift_plus,se_plus\n";
  for (const auto& l : dr.levels)
    os << g17(l.x) << ',' << g17(l.drift_minus) << ',' << g17(l.se_minus) << ',' << g17(l.drift_plus) << ','
       << g17(l.se_plus) << '\n';
  if (!dr.x_hat) throw NumericalError(
        "bounds: drift check found no x_hat; extend drift.grid or raise bounds.envelope_scale (at most rho + 1)");
  const double x_hat = *dr.x_hat;
  EstimatorOptions o = c.cfg.estimator;
  o.threads = c.threads;
  const double delta = c.cfg.delta ? *c.cfg.delta
                                   : calibrate_delta(m, x_hat, c.cfg.delta_paths, c.cfg.caps.value_or(default_caps(x_hat)),
                                                     derive_stream(c.seed, 1), o);
  os << "\n# x_hat: " << g17(x_hat) << "\n# delta: " << g17(delta) << "\n";
  os << "x,lower,upper\n";
  for (double x : c.cfg.grid) {
    if (!(x > x_hat)) continue;
    const BoundEnvelope b = bound_envelope(prof, x, x_hat, delta);
    os << g17(x) << ',' << g17(b.lower) << ',' << g17(b.upper) << '\n';
  }
}

void cmd_heavy(std::ostream& os, const Context& c) {
  const RiskModel& m = c.cfg.model;
  heavy_regime(m);
  EstimatorOptions o = c.cfg.estimator;
  o.threads = c.threads;
  const auto anchors_x = c.cfg.heavy_anchors.empty() ? std::vector<double>{c.cfg.grid.front()} : c.cfg.heavy_anchors;
  const auto anchor_est = ruin_curve(m, anchors_x, c.cfg.n_paths, c.cfg.caps, derive_stream(c.seed, 1), o);
  std::vector<HeavyAnchor> anchors;
  for (const auto& e : anchor_est) anchors.push_back({e.x, e.p_hat, e.half_width});
  const HeavyCalibration cal = calibrate_heavy(m, anchors);
  const auto curve = ruin_curve(m, c.cfg.grid, c.cfg.n_paths, c.cfg.caps, c.seed, o);
  header(os, c);
  os << "x,psi_hat,psi_tilde_hat,envelope_lo,envelope_hi,karamata,x2_tail\n";
  for (const auto& e : curve) {
    const HeavyEnvelope env = heavy_envelope(m, e.x, cal);
    os << g17(e.x) << ',' << g17(e.p_hat) << ',' << 0 << ',' << g17(env.lower) << ',' << g17(env.upper) << ','
       << g17(karamata_integral(m.xi(), e.x)) << ',' << g17(env.shape) << '\n';
  }
}

ExpExpParams expexp_params(const RiskModel& m) {
  const auto* t = std::get_if<Exponential>(&m.tau().family());
  const auto* x = std::get_if<Exponential>(&m.xi().family());
  if (!t || !x) throw ModelError("validate-expexp: exponential tau and xi required");
  return ExpExpParams{t->rate, x->rate, m.rate()};
}

void cmd_validate(std::ostream& os, const Context& c) {
  const ExpExpOracle oracle(expexp_params(c.cfg.model));
  std::vector<double> xs{c.cfg.reference_x};
  for (double x : c.cfg.grid)
    if (x != c.cfg.reference_x) xs.push_back(x);
  const auto curve = curve_for(c, xs);
  const RuinEstimate& ref = curve.front();
  if (!(ref.p_hat > 0.0)) throw NumericalError("validate-expexp: no ruin observed at the reference level");
  const double i_ref = oracle.unnormalized_psi(ref.x).value;
  header(os, c);
  os << "x,p_hat,half_width,mc_ratio,closed_form_ratio,z_score\n";
  for (const auto& e : curve) {
    const double mc = e.p_hat / ref.p_hat;
    const double cf = oracle.unnormalized_psi(e.x).value / i_ref;
    double z = 0.0;
    if (e.x != ref.x) {
      const double rel = std::hypot(e.half_width / 1.96 / e.p_hat, ref.half_width / 1.96 / ref.p_hat);
      z = (mc - cf) / (mc * rel);
    }
    os << g17(e.x) << ',' << g17(e.p_hat) << ',' << g17(e.half_width) << ',' << g17(mc) << ',' << g17(cf) << ','
       << g17(z) << '\n';
  }
}

void cmd_profile(std::ostream& os, const Context& c) {
  const LyapunovProfile prof = build_profile_inverse(c.cfg.model, c.cfg.envelope_scale, c.cfg.envelope_exponent);
  header(os, c);
  os << "x,q,Q,U,U_plus,U_minus\n";
  const std::size_t n = std::max<std::size_t>(c.cfg.profile_points, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = c.cfg.profile_x_max * static_cast<double>(i) / static_cast<double>(n - 1);
    os << g17(x) << ',' << g17(prof.q(x)) << ',' << g17(prof.Q(x)) << ',' << g17(prof.U(x)) << ','
       << g17(prof.U_plus(x)) << ',' << g17(prof.U_minus(x)) << '\n';
  }
}

}  // namespace

std::string version_string() { return RUIN_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ruinsim: ruin probabilities for level-dependent premium rates"};
  app.name("ruinsim");
  std::string config_path, out_path;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--config", config_path, "JSON experiment file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (default 0)");
  app.add_option("--threads", threads, "worker threads (default: hardware)");
  app.add_option("--out", out_path, "write CSV here instead of stdout");
  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "ruin estimate at config.x"},
      {"curve", "ruin estimates over config.grid"},
      {"fit", "decay exponent fit over config.grid"},
      {"bounds", "drift check, x_hat and Lyapunov bound envelopes"},
      {"classify", "transient / recurrent classification"},
      {"gamma-test", "moments of R_n^2/n against the Gamma limit"},
      {"heavy", "heavy-tail envelope table"},
      {"validate-expexp", "Monte Carlo ratios against the exponential closed form"},
      {"profile-export", "q, Q, U, U_plus, U_minus table"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.require_subcommand(1);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    Context ctx{load_config(config_path), 0, threads, app.get_subcommands().front()->get_name()};
    ctx.seed = seed_opt->count() ? seed : ctx.cfg.seed.value_or(0);
    for (const auto& w : ctx.cfg.model.warnings()) err << "warning: " << w << '\n';

    std::ostringstream buf;
    const std::string& cmd = ctx.command;
    if (cmd == "simulate") cmd_simulate(buf, ctx, {ctx.cfg.x});
    else if (cmd == "curve") cmd_simulate(buf, ctx, ctx.cfg.grid);
    else if (cmd == "fit") cmd_fit(buf, ctx);
    else if (cmd == "bounds") cmd_bounds(buf, ctx);
    else if (cmd == "classify") cmd_classify(buf, ctx);
    else if (cmd == "gamma-test") cmd_gamma(buf, ctx);
    else if (cmd == "heavy") cmd_heavy(buf, ctx);
    else if (cmd == "validate-expexp") cmd_validate(buf, ctx);
    else cmd_profile(buf, ctx);

    if (out_path.empty()) {
      out << buf.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw ModelError("cannot write '" + out_path + "'");
      f << buf.str();
    }
    return kExitOk;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace ruin
