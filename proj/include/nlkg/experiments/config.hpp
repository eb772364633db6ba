#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlkg/errors.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/solver.hpp"
#include "nlkg/spectrum.hpp"

namespace nlkg {

using json = nlohmann::json;

enum class Scenario { vanishing, single_soliton, two_soliton_shoot, k_soliton_shoot, same_sign_pair, ode_only };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::vanishing: return "vanishing";
    case Scenario::single_soliton: return "single_soliton";
    case Scenario::two_soliton_shoot: return "two_soliton_shoot";
    case Scenario::k_soliton_shoot: return "k_soliton_shoot";
    case Scenario::same_sign_pair: return "same_sign_pair";
    case Scenario::ode_only: return "ode_only";
  }
  return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
  for (auto sc : {Scenario::vanishing, Scenario::single_soliton, Scenario::two_soliton_shoot,
                  Scenario::k_soliton_shoot, Scenario::same_sign_pair, Scenario::ode_only}) {
    if (to_string(sc) == s) return sc;
  }
  throw InvalidParameter("unknown scenario '" + s + "'");
}

struct BisectionConfig {
  double lo = -0.5;
  double hi = 0.5;
  int max_iter = 80;
  double width_tol = 1e-12;
};

struct TrackingConfig {
  double tube_radius = 0.3;
  double vanishing_threshold = 1e-4;
  bool discrete_template = true;
  std::optional<double> mu;  // defaults to 0.9 min(1, alpha, |nu^-|)
};

/// Escape-time shooting. Trials stop as soon as max|u| leaves
/// [escape_low, escape_high] times the soliton peak, or at `horizon`.
struct ShootingConfig {
  double horizon = 40.0;
  double segment = 15.0;
  double reshoot_bracket = 1e-5;
  double escape_low = 0.5;
  double escape_high = 1.5;
};

struct FitConfig {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
  double theta = 1.1;
  std::size_t min_samples = 50;
};

struct OdeConfig {
  double t0 = 10.0;
  double t1 = 1e4;
  std::size_t samples = 200;
  std::vector<double> y0;  // empty: start on the exact profile
  std::optional<double> kappa;
};

struct RunConfig {
  Scenario scenario = Scenario::vanishing;
  ModelParams params{};
  double half_width = 60.0;
  double dx = 0.02;
  double dt = 0.01;
  double blowup_cap = 1e8;
  int K = 0;
  std::vector<int> signs;
  std::vector<double> z0;
  double amplitude = 0.0;
  BisectionConfig bisection{};
  TrackingConfig tracking{};
  ShootingConfig shooting{};
  FitConfig fit{};
  OdeConfig ode{};
  SpectrumConfig spectrum{};
  double sample_dt = 0.1;
  double t_end = 10.0;
  /// Times at which (x, u, v) is written to snapshots/ (nearest solver step).
  std::vector<double> snapshot_times;
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";

  Grid1D grid() const { return Grid1D::with_spacing(half_width, dx); }

  StepConfig step_config() const { return {dt, params.alpha, params.p, blowup_cap}; }

  /// Number of solver steps between samples (at least one).
  std::size_t sample_stride() const {
    return static_cast<std::size_t>(std::max<long long>(1, std::llround(sample_dt / dt)));
  }

  void validate() const {
    ModelParams::make(params.alpha, params.p);
    if (!(half_width > 0.0) || !(dx > 0.0)) throw InvalidParameter("grid half_width and dx must be positive");
    step_config().validate(grid());
    if (!(sample_dt > 0.0)) throw InvalidParameter("sample_dt must be positive");
    if (!(t_end > 0.0)) throw InvalidParameter("t_end must be positive");
    for (double t : snapshot_times) {
      if (!(t >= 0.0)) throw InvalidParameter("snapshot_times must be non-negative");
    }
    if (K < 0) throw InvalidParameter("K must be non-negative");
    if (signs.size() != static_cast<std::size_t>(K) || z0.size() != static_cast<std::size_t>(K)) {
      throw InvalidParameter("signs and z0 must have K entries");
    }
    for (int s : signs) {
      if (s != 1 && s != -1) throw InvalidParameter("signs must be +1 or -1");
    }
    for (std::size_t k = 0; k + 1 < z0.size(); ++k) {
      if (!(z0[k + 1] > z0[k])) throw InvalidParameter("z0 must be strictly increasing");
    }
    const double theta_max = std::min(params.p - 1.0, 1.25);
    if (!(fit.theta > 1.0) || !(fit.theta < theta_max)) {
      throw InvalidParameter("fit.theta must lie in (1, min(p-1, 5/4))");
    }
    if (!(tracking.tube_radius > 0.0) || !(tracking.vanishing_threshold > 0.0)) {
      throw InvalidParameter("tracking thresholds must be positive");
    }
    switch (scenario) {
      case Scenario::vanishing:
        if (K != 0) throw InvalidParameter("vanishing scenario uses K = 0");
        break;
      case Scenario::single_soliton:
        if (K != 1) throw InvalidParameter("single_soliton scenario needs K = 1");
        break;
      case Scenario::two_soliton_shoot:
        if (K != 2 || signs[0] == signs[1]) throw InvalidParameter("two_soliton_shoot needs K = 2 with opposite signs");
        break;
      case Scenario::k_soliton_shoot:
        if (K < 3 || K % 2 == 0) throw InvalidParameter("k_soliton_shoot needs odd K >= 3");
        for (std::size_t k = 0; k + 1 < signs.size(); ++k) {
          if (signs[k] == signs[k + 1]) throw InvalidParameter("k_soliton_shoot needs alternating signs");
        }
        break;
      case Scenario::same_sign_pair:
        if (K != 2 || signs[0] != signs[1]) throw InvalidParameter("same_sign_pair needs K = 2 with equal signs");
        break;
      case Scenario::ode_only:
        if (K < 2) throw InvalidParameter("ode_only needs K >= 2");
        break;
    }
    const bool shoots = scenario == Scenario::single_soliton || scenario == Scenario::two_soliton_shoot;
    if (shoots && !(bisection.hi > bisection.lo)) throw InvalidParameter("bisection needs lo < hi");
    if (shoots && !(bisection.width_tol > 0.0)) throw InvalidParameter("bisection width_tol must be positive");
  }
};

/// Default signs end with +1 and alternate: (..., -1, +1).
inline std::vector<int> alternating_signs(int K) {
  std::vector<int> s(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) s[static_cast<std::size_t>(k)] = ((K - 1 - k) % 2 == 0) ? 1 : -1;
  return s;
}

/// Centers (k - (K+1)/2) * 2d, i.e. symmetric about 0 with spacing 2d.
inline std::vector<double> symmetric_centers(int K, double d) {
  std::vector<double> z(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) z[static_cast<std::size_t>(k - 1)] = (k - 0.5 * (K + 1)) * 2.0 * d;
  return z;
}

namespace detail {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
  static const std::vector<std::string> known = {"scenario", "params",   "grid",     "step",     "K",
                                                 "signs",    "z0",       "amplitude", "bisection", "tracking",
                                                 "shooting", "fit",      "ode",      "spectrum", "sample_dt",
                                                 "t_end",    "seed",     "output_dir", "snapshot_times"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidParameter("unknown config key '" + key + "'");
    }
  }
  RunConfig c;
  using detail::read_opt;
  if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  if (j.contains("params")) {
    read_opt(j["params"], "alpha", c.params.alpha);
    read_opt(j["params"], "p", c.params.p);
  }
  if (j.contains("grid")) {
    read_opt(j["grid"], "half_width", c.half_width);
    read_opt(j["grid"], "dx", c.dx);
  }
  if (j.contains("step")) {
    read_opt(j["step"], "dt", c.dt);
    read_opt(j["step"], "blowup_cap", c.blowup_cap);
  }
  read_opt(j, "K", c.K);
  read_opt(j, "signs", c.signs);
  if (j.contains("z0")) {
    if (j["z0"].is_number()) {
      c.z0 = symmetric_centers(c.K, j["z0"].get<double>());
    } else {
      c.z0 = j["z0"].get<std::vector<double>>();
    }
  } else if (c.K > 0) {
    c.z0 = symmetric_centers(c.K, 6.0);
  }
  if (c.signs.empty() && c.K > 0) {
    c.signs = alternating_signs(c.K);
    if (c.scenario == Scenario::same_sign_pair) c.signs.assign(static_cast<std::size_t>(c.K), 1);
  }
  read_opt(j, "amplitude", c.amplitude);
  if (j.contains("bisection")) {
    const auto& b = j["bisection"];
    read_opt(b, "lo", c.bisection.lo);
    read_opt(b, "hi", c.bisection.hi);
    read_opt(b, "max_iter", c.bisection.max_iter);
    read_opt(b, "width_tol", c.bisection.width_tol);
  }
  if (j.contains("tracking")) {
    const auto& t = j["tracking"];
    read_opt(t, "tube_radius", c.tracking.tube_radius);
    read_opt(t, "vanishing_threshold", c.tracking.vanishing_threshold);
    if (t.contains("template")) {
      const auto name = t["template"].get<std::string>();
      if (name != "discrete" && name != "analytic") throw InvalidParameter("tracking.template must be discrete|analytic");
      c.tracking.discrete_template = name == "discrete";
    }
    read_opt(t, "mu", c.tracking.mu);
  }
  if (j.contains("shooting")) {
    const auto& s = j["shooting"];
    read_opt(s, "horizon", c.shooting.horizon);
    read_opt(s, "segment", c.shooting.segment);
    read_opt(s, "reshoot_bracket", c.shooting.reshoot_bracket);
    read_opt(s, "escape_low", c.shooting.escape_low);
    read_opt(s, "escape_high", c.shooting.escape_high);
  }
  if (j.contains("fit")) {
    const auto& f = j["fit"];
    read_opt(f, "t_lo", c.fit.t_lo);
    read_opt(f, "t_hi", c.fit.t_hi);
    read_opt(f, "theta", c.fit.theta);
    read_opt(f, "min_samples", c.fit.min_samples);
  }
  if (j.contains("ode")) {
    const auto& o = j["ode"];
    read_opt(o, "t0", c.ode.t0);
    read_opt(o, "t1", c.ode.t1);
    read_opt(o, "samples", c.ode.samples);
    read_opt(o, "y0", c.ode.y0);
    read_opt(o, "kappa", c.ode.kappa);
  }
  if (j.contains("spectrum")) {
    read_opt(j["spectrum"], "half_width", c.spectrum.half_width);
    read_opt(j["spectrum"], "n", c.spectrum.n);
  }
  read_opt(j, "sample_dt", c.sample_dt);
  read_opt(j, "t_end", c.t_end);
  read_opt(j, "snapshot_times", c.snapshot_times);
  read_opt(j, "seed", c.seed);
  read_opt(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

inline json config_to_json(const RunConfig& c) {
  return {
      {"scenario", to_string(c.scenario)},
      {"params", {{"alpha", c.params.alpha}, {"p", c.params.p}}},
      {"grid", {{"half_width", c.half_width}, {"dx", c.dx}}},
      {"step", {{"dt", c.dt}, {"blowup_cap", c.blowup_cap}}},
      {"K", c.K},
      {"signs", c.signs},
      {"z0", c.z0},
      {"amplitude", c.amplitude},
      {"bisection",
       {{"lo", c.bisection.lo}, {"hi", c.bisection.hi}, {"max_iter", c.bisection.max_iter},
        {"width_tol", c.bisection.width_tol}}},
      {"tracking",
       {{"tube_radius", c.tracking.tube_radius},
        {"vanishing_threshold", c.tracking.vanishing_threshold},
        {"template", c.tracking.discrete_template ? "discrete" : "analytic"},
        {"mu", detail::opt_json(c.tracking.mu)}}},
      {"shooting",
       {{"horizon", c.shooting.horizon}, {"segment", c.shooting.segment},
        {"reshoot_bracket", c.shooting.reshoot_bracket}, {"escape_low", c.shooting.escape_low},
        {"escape_high", c.shooting.escape_high}}},
      {"fit",
       {{"t_lo", detail::opt_json(c.fit.t_lo)}, {"t_hi", detail::opt_json(c.fit.t_hi)}, {"theta", c.fit.theta},
        {"min_samples", c.fit.min_samples}}},
      {"ode",
       {{"t0", c.ode.t0}, {"t1", c.ode.t1}, {"samples", c.ode.samples}, {"y0", c.ode.y0},
        {"kappa", detail::opt_json(c.ode.kappa)}}},
      {"spectrum", {{"half_width", c.spectrum.half_width}, {"n", c.spectrum.n}}},
      {"sample_dt", c.sample_dt},
      {"t_end", c.t_end},
      {"snapshot_times", c.snapshot_times},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
  };
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidParameter("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace nlkg
