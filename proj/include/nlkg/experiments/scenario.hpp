#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "nlkg/experiments/analysis.hpp"
#include "nlkg/experiments/config.hpp"
#include "nlkg/experiments/record.hpp"
#include "nlkg/experiments/shooting.hpp"
#include "nlkg/interaction_ode.hpp"

namespace nlkg {

inline json constants_json(const SimulationContext& ctx) {
  return {{"c_Q", ctx.consts.c_Q},
          {"c_1", ctx.consts.c_1},
          {"kappa", ctx.consts.kappa},
          {"E_Q", ctx.consts.E_Q},
          {"nu0", ctx.spectral.nu0},
          {"nu_plus", ctx.spectral.nu_plus},
          {"nu_minus", ctx.spectral.nu_minus},
          {"beta", ctx.spectral.beta},
          {"mu", ctx.mu}};
}

/// Small smooth data: `amplitude` times a sum of three Gaussian bumps whose
/// centers, widths and weights are drawn from a generator seeded by `seed`.
inline FieldState vanishing_data(const Grid1D& g, double amplitude, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // Top 53 bits as a double in [0, 1); identical on every platform.
  auto uniform = [&gen](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
  };
  FieldState s = FieldState::zero(g);
  for (int j = 0; j < 3; ++j) {
    const double center = uniform(-5.0, 5.0);
    const double width = uniform(0.5, 2.0);
    const double weight = uniform(-1.0, 1.0);
    s.u += g.sample([&](double x) {
      const double r = (x - center) / width;
      return amplitude * weight * std::exp(-r * r);
    });
  }
  s.u[0] = 0.0;
  s.u[s.u.size() - 1] = 0.0;
  return s;
}

/// Center-ODE trajectory written with the shared row layout (z = y, other
/// columns NaN except the interaction sums).
inline RunRecord ode_record(const RunConfig& cfg, double kappa) {
  RunRecord rec;
  rec.config = cfg;
  rec.sigma = cfg.signs;
  const auto prof = tau_profile(cfg.K, cfg.params.alpha, kappa);
  const std::vector<double> y0 = cfg.ode.y0.empty() ? exact_profile_y(cfg.ode.t0, prof) : cfg.ode.y0;
  if (y0.size() != static_cast<std::size_t>(cfg.K)) throw InvalidParameter("ode.y0 must have K entries");
  const auto times = log_spaced(cfg.ode.t0, cfg.ode.t1, cfg.ode.samples);
  const auto traj = integrate_centers(y0, times, cfg.params.alpha, kappa);
  for (std::size_t i = 0; i < times.size(); ++i) {
    Row r;
    r.t = times[i];
    r.z = traj.y[i];
    r.ell.assign(r.z.size(), kNaN);
    r.a_plus.assign(r.z.size(), kNaN);
    r.a_minus.assign(r.z.size(), kNaN);
    r.F_plus = 0.0;
    r.F_minus = 0.0;
    for (std::size_t k = 0; k + 1 < r.z.size(); ++k) {
      const double e = std::exp(-(r.z[k + 1] - r.z[k]));
      (rec.sigma[k] == rec.sigma[k + 1] ? r.F_plus : r.F_minus) += e;
    }
    rec.rows.push_back(std::move(r));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto ybar = exact_profile_y(times[i], prof);
    for (std::size_t k = 0; k < ybar.size(); ++k) worst = std::max(worst, std::abs(traj.y[i][k] - ybar[k]));
  }
  rec.extra["ode"] = {{"kappa", kappa},
                      {"tau", prof.tau},
                      {"gamma", prof.gamma},
                      {"profile_residual_t0", profile_residual(cfg.ode.t0, prof)},
                      {"max_deviation_from_profile", worst},
                      {"mean_drift", traj.mean_drift},
                      {"ordering_violations", traj.ordering_violations}};
  rec.extra["constants"] = {{"kappa", kappa}};
  return rec;
}

inline json bracket_json(const BisectionResult& b) {
  return {{"lo", b.lo},         {"hi", b.hi},   {"width", b.width()}, {"sign_lo", b.sign_lo},
          {"sign_hi", b.sign_hi}, {"iterations", b.iterations}, {"monotone", b.monotone()}};
}

inline std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%03zu.csv", index);
  return buf;
}

/// One line per node: x,u,v. The first line is "# t=<time>", the second the header.
inline void write_snapshot(const std::filesystem::path& path, const FieldState& s) {
  std::ofstream out(path);
  out << "# t=" << format_number(s.t) << "\nx,u,v\n";
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    out << format_number(s.grid.x(i)) << ',' << format_number(s.u[j]) << ',' << format_number(s.v[j]) << '\n';
  }
}

/// Reads an (x, u, v) CSV as written by write_snapshot. Lines starting with
/// '#' are skipped; an optional "# t=" line sets the time. The nodes must form
/// a uniform grid symmetric about 0.
inline FieldState read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path.string());
  double t = 0.0;
  std::vector<double> x, u, v;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# t=", 0) == 0) t = std::strtod(line.c_str() + 4, nullptr);
      continue;
    }
    if (!header) {
      if (line != "x,u,v") throw InvalidParameter("state file: expected header x,u,v");
      header = true;
      continue;
    }
    double a = 0.0, b = 0.0, c = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3) {
      throw InvalidParameter("state file: malformed row '" + line + "'");
    }
    x.push_back(a);
    u.push_back(b);
    v.push_back(c);
  }
  if (x.size() < Grid1D::kMinNodes) throw InvalidParameter("state file: too few nodes");
  const Grid1D g(x.back(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - g.x(i)) > 1e-9 * (1.0 + g.half_width())) {
      throw InvalidParameter("state file: nodes are not a uniform grid symmetric about 0");
    }
  }
  FieldState s = FieldState::zero(g, t);
  s.u = Eigen::Map<const Field>(u.data(), static_cast<Eigen::Index>(u.size()));
  s.v = Eigen::Map<const Field>(v.data(), static_cast<Eigen::Index>(v.size()));
  return s;
}

/// Runs one configured scenario. Deterministic: the same config gives the
/// same record.
inline RunRecord run_scenario(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.scenario == Scenario::ode_only) {
    const double kappa = cfg.ode.kappa.value_or(compute_constants(cfg.params).kappa);
    return ode_record(cfg, kappa);
  }
  const SimulationContext ctx(cfg);
  RunRecord rec;
  switch (cfg.scenario) {
    case Scenario::vanishing:
      rec = simulate_tracked(ctx, vanishing_data(ctx.grid, cfg.amplitude, cfg.seed), {}, {}, cfg.t_end);
      break;
    case Scenario::single_soliton: {
      auto r = shoot_single(ctx);
      rec = std::move(r.record);
      rec.extra["shooting"] = {{"threshold", r.threshold},
                               {"bracket", bracket_json(r.bracket)},
                               {"lo_classification", r.lo_class.str()},
                               {"hi_classification", r.hi_class.str()}};
      break;
    }
    case Scenario::two_soliton_shoot: {
      auto r = shoot_two_soliton(ctx);
      rec = std::move(r.record);
      rec.extra["shooting"] = {{"threshold", r.threshold},
                               {"bracket", bracket_json(r.bracket)},
                               {"segments", r.segments}};
      break;
    }
    case Scenario::k_soliton_shoot: {
      auto r = shoot_k_soliton(ctx);
      rec = std::move(r.record);
      rec.extra["shooting"] = {{"threshold", r.threshold}, {"newton", r.segments}};
      break;
    }
    case Scenario::same_sign_pair: {
      auto r = same_sign_probe(ctx);
      rec = std::move(r.record);
      rec.extra["probe"] = {{"spacing_decreasing", r.spacing_decreasing},
                            {"exit_time", std::isfinite(r.exit_time) ? json(r.exit_time) : json(nullptr)},
                            {"longest_same_sign_growth", r.longest_growth}};
      break;
    }
    case Scenario::ode_only:
      break;
  }
  rec.extra["constants"] = constants_json(ctx);
  if (!rec.snapshots.empty()) {
    json list = json::array();
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
      list.push_back({{"t", rec.snapshots[i].t}, {"file", "snapshots/" + snapshot_name(i)}});
    }
    rec.extra["snapshots"] = list;
  }
  return rec;
}

/// Writes config.json, timeseries.csv and summary.json into `dir`, plus
/// snapshots/snapshot_NNN.csv for each captured snapshot.
inline void write_run(const std::filesystem::path& dir, const RunRecord& rec) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "config.json");
    out << config_to_json(rec.config).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "timeseries.csv");
    write_timeseries(out, rec.K(), rec.rows);
  }
  {
    std::ofstream out(dir / "summary.json");
    out << summarize(rec).dump(2) << '\n';
  }
  if (!rec.snapshots.empty()) {
    std::filesystem::create_directories(dir / "snapshots");
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
      write_snapshot(dir / "snapshots" / snapshot_name(i), rec.snapshots[i]);
    }
  }
  if (!std::filesystem::exists(dir / "summary.json")) throw Error("could not write run outputs to " + dir.string());
}

/// Rebuilds a record from a run directory (config + rows + the run flags kept in the summary).
inline RunRecord read_run(const std::filesystem::path& dir) {
  RunRecord rec;
  rec.config = load_config((dir / "config.json").string());
  const auto ts = read_timeseries(dir / "timeseries.csv");
  rec.rows = ts.rows;
  rec.sigma = rec.config.signs;
  if (rec.sigma.size() != ts.K) throw InvalidParameter("timeseries K does not match config");
  std::ifstream in(dir / "summary.json");
  if (in) {
    json s;
    in >> s;
    auto num = [](const json& v) { return v.is_null() ? kNaN : v.get<double>(); };
    rec.blowup = s.value("blowup", false);
    rec.blowup_time = num(s.value("blowup_time", json(nullptr)));
    rec.tracking_lost = s.value("tracking_lost", false);
    rec.tracking_lost_time = num(s.value("tracking_lost_time", json(nullptr)));
    rec.tracking_note = s.value("tracking_note", std::string());
    rec.extra = s.value("extra", json::object());
  }
  return rec;
}

}  // namespace nlkg
