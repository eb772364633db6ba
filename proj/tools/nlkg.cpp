// Command-line front end: constants, spectrum, simulations, shooting and fits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlkg/nlkg.hpp"

namespace fs = std::filesystem;
using namespace nlkg;

namespace {

struct Globals {
  std::string config_path;
  std::string out_dir;
  bool quiet = false;
};

RunConfig base_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? config_from_json(json::object()) : load_config(g.config_path);
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  return c;
}

void emit(const Globals& g, const json& j) {
  if (!g.quiet) std::cout << j.dump(2) << '\n';
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

json run_and_write(const Globals& g, const RunConfig& cfg) {
  const RunRecord rec = run_scenario(cfg);
  write_run(cfg.output_dir, rec);
  json s = summarize(rec);
  s["output_dir"] = cfg.output_dir;
  return s;
}

std::vector<int> parse_signs(const std::string& text) {
  std::vector<int> out;
  if (text.find(',') == std::string::npos && text.find('1') == std::string::npos) {
    for (char c : text) {
      if (c == '+') out.push_back(1);
      else if (c == '-') out.push_back(-1);
      else throw InvalidParameter("sign pattern may only contain + and -");
    }
    return out;
  }
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const int v = std::stoi(cell);
    if (v != 1 && v != -1) throw InvalidParameter("signs must be +1 or -1");
    out.push_back(v);
  }
  return out;
}

// t, y_1..y_K of a center-system run.
void write_trajectory(const fs::path& path, const RunRecord& rec) {
  std::ofstream out(path);
  out << "t";
  for (std::size_t k = 1; k <= rec.K(); ++k) out << ",y_" << k;
  out << '\n';
  for (const auto& r : rec.rows) {
    out << format_number(r.t);
    for (double y : r.z) out << ',' << format_number(y);
    out << '\n';
  }
}

FieldState configured_initial_state(const SimulationContext& ctx) {
  const auto& c = ctx.config;
  if (c.K == 0) return vanishing_data(ctx.grid, c.amplitude, c.seed);
  FieldState s = soliton_sum(ctx.grid, ctx.profile, c.signs, c.z0);
  if (c.amplitude != 0.0) {
    const std::vector<double> a(c.signs.size(), c.amplitude);
    const WField w = build_W(a, c.z0, c.signs, ctx.grid, ctx.profile, ctx.spectral);
    s.u += w.W;
    s.v += w.Wt;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped nonlinear Klein-Gordon solitons: constants, spectra, simulations and shooting"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "output directory (overrides output_dir in the config)");
  app.add_flag("--quiet", g.quiet, "suppress stdout reports");

  double p = 3.0;
  QuadratureConfig quad;
  std::string out_file;
  auto* gs = app.add_subcommand("ground-state", "ground-state constants and profile residual");
  gs->add_option("--p", p, "nonlinearity exponent (> 2)");
  gs->add_option("--quad-halfwidth", quad.half_width, "quadrature half-width (>= 30)");
  gs->add_option("--quad-dx", quad.dx, "quadrature spacing (<= 0.01)");
  gs->add_option("--out", out_file, "also write the JSON report to this file");

  double alpha = 1.0;
  double half_width = 40.0;
  std::size_t n = 8192;
  std::string y_csv;
  auto* sp = app.add_subcommand("spectrum", "lowest eigenvalues of the linearized operator and derived rates");
  sp->add_option("--p", p, "nonlinearity exponent");
  sp->add_option("--alpha", alpha, "damping");
  sp->add_option("--L,--half-width", half_width, "domain half-width");
  sp->add_option("--n", n, "number of nodes");
  sp->add_option("--out", out_file, "also write the JSON report to this file");
  sp->add_option("--y-csv", y_csv, "write the normalized unstable eigenfunction as x,Y");

  auto* sim = app.add_subcommand("simulate", "run the configured scenario and write its run directory");

  std::string state_file;
  int mod_K = 0;
  std::string sign_pattern;
  std::vector<double> guess;
  auto* mod = app.add_subcommand(
      "modulate", "decompose a state (x,u,v CSV, or the configured initial data) around its solitons");
  mod->add_option("--state", state_file, "state CSV with header x,u,v")->check(CLI::ExistingFile);
  mod->add_option("--K", mod_K, "number of solitons");
  mod->add_option("--signs", sign_pattern, "signs as a pattern like -+- or a list like -1,1,-1");
  mod->add_option("--guess", guess, "initial center guesses")->delimiter(',');

  int K = 2;
  double kappa = 12.0;
  double t0 = 10.0;
  double t1 = 1e4;
  std::size_t samples = 200;
  std::vector<double> y0;
  bool on_profile = false;
  auto* ode = app.add_subcommand("ode", "integrate the soliton-center system");
  ode->add_option("--K", K, "number of centers (>= 2)");
  ode->add_option("--alpha", alpha, "damping");
  ode->add_option("--kappa", kappa, "interaction constant");
  ode->add_option("--t0", t0, "initial time (> 0)");
  ode->add_option("--t1", t1, "final time");
  ode->add_option("--samples", samples, "number of log-spaced samples");
  auto* y0_opt = ode->add_option("--y0", y0, "initial centers (increasing)")->delimiter(',');
  ode->add_flag("--profile", on_profile, "start on the exact logarithmic profile")->excludes(y0_opt);

  auto* shoot = app.add_subcommand("shoot", "threshold shooting (single_soliton, two_soliton_shoot, k_soliton_shoot)");
  auto* probe = app.add_subcommand("probe", "same-sign pair probe");

  std::string run_dir;
  auto* fit = app.add_subcommand("fit", "recompute fits and the summary of a run directory");
  fit->add_option("run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gs->parsed()) {
      const auto c = compute_constants(p, quad);
      const Grid1D grid = Grid1D::with_spacing(40.0, 0.01);
      const json report = {{"p", p},
                           {"c_Q", c.c_Q},
                           {"c_1", c.c_1},
                           {"kappa", c.kappa},
                           {"kappa_mirrored", kappa_mirrored(p, quad)},
                           {"E_Q", c.E_Q},
                           {"profile_residual_dx_0.01", residual_Q(p, grid)}};
      if (!out_file.empty()) write_json(out_file, report);
      emit(g, report);
    } else if (sp->parsed()) {
      const auto params = ModelParams::make(alpha, p);
      const auto op = assemble_L(p, Grid1D(half_width, n));
      const auto data = compute_spectral_data(params, {half_width, n});
      const json report = {{"lambda_0", kth_eigenvalue(op, 0)},
                           {"lambda_1", kth_eigenvalue(op, 1)},
                           {"nu0", data.nu0},
                           {"nu0_sq", data.nu0_sq()},
                           {"nu_plus", data.nu_plus},
                           {"nu_minus", data.nu_minus},
                           {"zeta_plus", data.zeta_plus},
                           {"zeta_minus", data.zeta_minus},
                           {"beta", data.beta}};
      if (!out_file.empty()) write_json(out_file, report);
      if (!y_csv.empty()) {
        fs::create_directories(fs::path(y_csv).parent_path().empty() ? fs::path(".") : fs::path(y_csv).parent_path());
        std::ofstream out(y_csv);
        out << "x,Y\n";
        for (std::size_t i = 0; i < data.grid.size(); ++i) {
          out << format_number(data.grid.x(i)) << ',' << format_number(data.Y[static_cast<Eigen::Index>(i)]) << '\n';
        }
      }
      emit(g, report);
    } else if (sim->parsed()) {
      emit(g, run_and_write(g, base_config(g)));
    } else if (mod->parsed()) {
      RunConfig cfg = base_config(g);
      std::optional<FieldState> s;
      std::vector<int> sigma = cfg.signs;
      std::vector<double> z = cfg.z0;
      if (!state_file.empty()) {
        s = read_snapshot(state_file);
        if (mod_K < 1) throw InvalidParameter("modulate --state needs --K >= 1");
        sigma = sign_pattern.empty() ? alternating_signs(mod_K) : parse_signs(sign_pattern);
        z = guess.empty() ? symmetric_centers(mod_K, 6.0) : guess;
        if (sigma.size() != static_cast<std::size_t>(mod_K) || z.size() != static_cast<std::size_t>(mod_K)) {
          throw InvalidParameter("--signs and --guess must have K entries");
        }
        cfg.half_width = s->grid.half_width();
        cfg.dx = s->grid.dx();
        cfg.dt = std::min(cfg.dt, 0.5 * cfg.dx);
      } else if (cfg.K == 0) {
        throw InvalidParameter("modulate needs --state or K >= 1 solitons in the config");
      }
      const SimulationContext ctx(cfg);
      if (state_file.empty()) s = configured_initial_state(ctx);
      const auto dec = decompose(*s, ctx.profile, ctx.spectral, sigma, z, ctx.decompose_options());
      const auto d = diagnostics(dec, ctx.grid, cfg.params, ctx.spectral, ctx.mu);
      emit(g, {{"t", s->t},
               {"signs", dec.sigma},
               {"z", dec.z},
               {"ell", dec.ell},
               {"a_plus", dec.a_plus},
               {"a_minus", dec.a_minus},
               {"orthogonality_residual", dec.orthogonality_residual},
               {"newton_iterations", dec.newton_iterations},
               {"N", d.N},
               {"F_plus", d.F_plus},
               {"F_minus", d.F_minus},
               {"b", d.b},
               {"calE", d.calE},
               {"calB", d.calB},
               {"mu", ctx.mu}});
    } else if (ode->parsed()) {
      RunConfig cfg = g.config_path.empty() ? RunConfig{} : base_config(g);
      cfg.scenario = Scenario::ode_only;
      cfg.K = K;
      cfg.signs = alternating_signs(K);
      cfg.z0 = symmetric_centers(K, 1.0);
      cfg.params.alpha = alpha;
      cfg.ode = {t0, t1, samples, on_profile ? std::vector<double>{} : y0, kappa};
      if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
      cfg.z0 = symmetric_centers(K, 6.0);
      const RunRecord rec = run_scenario(cfg);
      write_run(cfg.output_dir, rec);
      write_trajectory(fs::path(cfg.output_dir) / "trajectory.csv", rec);
      json s = summarize(rec);
      s["output_dir"] = cfg.output_dir;
      emit(g, s);
    } else if (shoot->parsed()) {
      const RunConfig cfg = base_config(g);
      if (cfg.scenario != Scenario::single_soliton && cfg.scenario != Scenario::two_soliton_shoot &&
          cfg.scenario != Scenario::k_soliton_shoot) {
        throw InvalidParameter("shoot needs a shooting scenario in the config");
      }
      emit(g, run_and_write(g, cfg));
    } else if (probe->parsed()) {
      RunConfig cfg = base_config(g);
      if (cfg.scenario != Scenario::same_sign_pair) throw InvalidParameter("probe needs scenario same_sign_pair");
      emit(g, run_and_write(g, cfg));
    } else if (fit->parsed()) {
      const RunRecord rec = read_run(run_dir);
      json s = summarize(rec);
      std::ifstream in(fs::path(run_dir) / "summary.json");
      json stored;
      in >> stored;
      s["matches_stored_summary"] = stored == summarize(rec);
      write_json(fs::path(run_dir) / "fits.json", s["fits"]);
      emit(g, s);
      if (!s["matches_stored_summary"].get<bool>()) {
        std::fprintf(stderr, "error: recomputed summary differs from %s/summary.json\n", run_dir.c_str());
        return 1;
      }
    }
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
