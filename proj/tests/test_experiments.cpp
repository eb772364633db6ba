#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "nlkg/nlkg.hpp"

using namespace nlkg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nlkg_test_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_config(Scenario sc, int K) {
  json j = {{"scenario", to_string(sc)}, {"K", K}, {"grid", {{"half_width", 30}, {"dx", 0.02}}}, {"t_end", 5}};
  if (K > 0) j["z0"] = K == 1 ? json(std::vector<double>{0.0}) : json(6.0);
  return config_from_json(j);
}

std::string timeseries_text(const RunRecord& rec) {
  std::ostringstream out;
  write_timeseries(out, rec.K(), rec.rows);
  return out.str();
}

}  // namespace

TEST(Config, RoundTripsThroughJson) {
  json j = {{"scenario", "two_soliton_shoot"},
            {"params", {{"alpha", 0.8}, {"p", 3.5}}},
            {"K", 2},
            {"z0", 7.0},
            {"tracking", {{"template", "analytic"}, {"mu", 0.2}}},
            {"fit", {{"t_lo", 20.0}, {"theta", 1.2}}},
            {"seed", 99}};
  const RunConfig c = config_from_json(j);
  EXPECT_EQ(c.z0, (std::vector<double>{-7.0, 7.0}));
  EXPECT_EQ(c.signs, (std::vector<int>{-1, 1}));
  EXPECT_FALSE(c.tracking.discrete_template);
  const json once = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(once)), once);
  EXPECT_EQ(once["fit"]["t_hi"], nullptr);
  EXPECT_EQ(once["seed"], 99);
}

TEST(Config, DefaultSigns) {
  EXPECT_EQ(alternating_signs(3), (std::vector<int>{1, -1, 1}));
  EXPECT_EQ(alternating_signs(2), (std::vector<int>{-1, 1}));
  EXPECT_EQ(symmetric_centers(3, 5.0), (std::vector<double>{-10.0, 0.0, 10.0}));
  const RunConfig same = config_from_json({{"scenario", "same_sign_pair"}, {"K", 2}, {"z0", 6.0}});
  EXPECT_EQ(same.signs, (std::vector<int>{1, 1}));
}

TEST(Config, RejectsInconsistentInput) {
  EXPECT_THROW(config_from_json({{"bogus", 1}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"scenario", "nope"}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"scenario", "vanishing"}, {"K", 1}, {"z0", {0.0}}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"scenario", "two_soliton_shoot"}, {"K", 2}, {"z0", 6.0}, {"signs", {1, 1}}}),
               InvalidParameter);
  EXPECT_THROW(config_from_json({{"scenario", "k_soliton_shoot"}, {"K", 4}, {"z0", 6.0}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"fit", {{"theta", 1.3}}}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"fit", {{"theta", 1.0}}}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"step", {{"dt", 0.05}}}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"tracking", {{"template", "spline"}}}}), InvalidParameter);
  EXPECT_THROW(config_from_json({{"scenario", "ode_only"}, {"K", 2}, {"z0", {1.0, 0.0}}}), InvalidParameter);
  EXPECT_THROW(load_config("/nonexistent/config.json"), InvalidParameter);
}

TEST(Config, ShippedConfigsLoad) {
  for (const auto& entry : fs::directory_iterator(NLKG_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
}

class WMap : public ::testing::Test {
 protected:
  Grid1D grid = Grid1D::with_spacing(40.0, 0.02);
  Profile profile = Profile::discrete(3.0, grid);
  SpectralData spectral = compute_spectral_data(ModelParams::make(1.0, 3.0));
};

TEST_F(WMap, SingleSolitonIsScaledEigenfunction) {
  const std::vector<double> a{0.01}, z{1.5};
  const std::vector<int> sigma{-1};
  const WField w = build_W(a, z, sigma, grid, profile, spectral);
  const Field expected = -spectral.beta * 0.01 * spectral.Y_on(grid, 1.5);
  EXPECT_LT((w.W - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(w.V[0], 0.0, 1e-12);
  EXPECT_LT((w.Wt - spectral.nu_plus * w.W).cwiseAbs().maxCoeff(), 0.0 + 1e-300);
}

TEST_F(WMap, ZeroAmplitudeGivesZero) {
  const std::vector<double> a{0.0, 0.0}, z{-5.0, 5.0};
  const std::vector<int> sigma{-1, 1};
  const WField w = build_W(a, z, sigma, grid, profile, spectral);
  EXPECT_EQ(w.W.cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(WMap, PrescribedUnstableAmplitudes) {
  const std::vector<double> a{0.3, -0.7}, z{-5.0, 5.0};
  const std::vector<int> sigma{-1, 1};
  const WField w = build_W(a, z, sigma, grid, profile, spectral);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(unstable_projection(grid, w.W, w.Wt, z[k], sigma[k], spectral), a[k], 1e-10);
    EXPECT_NEAR(inner(grid, w.W, static_cast<double>(sigma[k]) * grid.sample([&](double x) {
                  return profile.eval(x - z[k]).d1;
                })),
                0.0, 1e-12);
  }
  // B stays near beta * Id with corrections of order e^{-r/2}.
  const WField e1 = build_W(std::vector<double>{1.0, 0.0}, z, sigma, grid, profile, spectral);
  EXPECT_LT(std::abs(e1.B[0] - spectral.beta), std::exp(-5.0));
  EXPECT_LT(std::abs(e1.B[1]), std::exp(-5.0));
}

TEST_F(WMap, RejectsCloseCenters) {
  const std::vector<double> a{0.1, 0.1}, z{-1.0, 1.0};
  const std::vector<int> sigma{-1, 1};
  EXPECT_THROW(build_W(a, z, sigma, grid, profile, spectral), IllConditioned);
  EXPECT_THROW(build_W(std::vector<double>{std::nan(""), 0.0}, std::vector<double>{-5.0, 5.0}, sigma, grid, profile,
                       spectral),
               InvalidParameter);
}

TEST(Timeseries, RoundTripIsExact) {
  std::vector<Row> rows;
  for (int i = 0; i < 5; ++i) {
    Row r;
    r.t = 0.1 * i + 1.0 / 3.0;
    r.z = {-std::sqrt(2.0) - i, std::exp(1.0) + i};
    r.ell = {1e-17 * i, -0.0};
    r.N = std::pow(10.0, -i);
    r.F_minus = 1.0 / 7.0;
    r.F_plus = 0.0;
    r.b = 1e-300;
    r.E = -2.5;
    r.dtu_L2 = 3.0;
    r.a_plus = {kNaN, 1.0};
    r.a_minus = {2.0, kNaN};
    rows.push_back(r);
  }
  std::stringstream buf;
  write_timeseries(buf, 2, rows);
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "t,z_1,z_2,ell_1,ell_2,N,F_minus,F_plus,b,E,dtu_L2,a_plus_1,a_plus_2,a_minus_1,a_minus_2");
  const Timeseries back = read_timeseries(buf);
  ASSERT_EQ(back.K, 2u);
  ASSERT_EQ(back.rows.size(), rows.size());
  std::ostringstream again;
  write_timeseries(again, 2, back.rows);
  EXPECT_EQ(again.str(), text);
  EXPECT_EQ(back.rows[3].z[0], rows[3].z[0]);
  EXPECT_TRUE(std::isnan(back.rows[0].a_plus[0]));
}

TEST(Timeseries, RejectsMalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(read_timeseries(empty), InvalidParameter);
  std::stringstream wrong("t,x,N,F_minus,F_plus,b,E,dtu_L2\n");
  EXPECT_THROW(read_timeseries(wrong), InvalidParameter);
  std::stringstream disorder(csv_header(0) + "\n1,0,0,0,0,0,0\n0.5,0,0,0,0,0,0\n");
  EXPECT_THROW(read_timeseries(disorder), InvalidParameter);
  std::stringstream ragged(csv_header(0) + "\n1,0,0\n");
  EXPECT_THROW(read_timeseries(ragged), InvalidParameter);
}

TEST(Classify, ZeroDataVanishes) {
  const RunConfig cfg = small_config(Scenario::vanishing, 0);
  const SimulationContext ctx(cfg);
  const RunRecord rec = simulate_tracked(ctx, FieldState::zero(ctx.grid), {}, {}, cfg.t_end);
  EXPECT_EQ(classify_run(rec).str(), "vanishing");
  EXPECT_FALSE(rec.blowup);
  EXPECT_EQ(rec.rows.size(), 51u);
}

TEST(Classify, StationarySolitonIsSingle) {
  const RunConfig cfg = small_config(Scenario::single_soliton, 1);
  const SimulationContext ctx(cfg);
  const std::vector<int> sigma{1};
  const std::vector<double> z{0.0};
  const FieldState q = soliton_sum(ctx.grid, ctx.profile, sigma, z);
  const RunRecord rec = simulate_tracked(ctx, q, sigma, z, 5.0);
  EXPECT_EQ(classify_run(rec).str(), "single_soliton");
  EXPECT_FALSE(rec.tracking_lost);
  for (const auto& r : rec.rows) EXPECT_LT(r.N, 1e-8);
}

TEST(Classify, LargeDataBlowsUp) {
  RunConfig cfg = small_config(Scenario::vanishing, 0);
  cfg.t_end = 20;
  const SimulationContext ctx(cfg);
  FieldState s = FieldState::zero(ctx.grid);
  s.u = ctx.grid.sample([](double x) { return 3.0 * eval_Q(3.0, x); });
  const RunRecord rec = simulate_tracked(ctx, s, {}, {}, cfg.t_end);
  EXPECT_TRUE(rec.blowup);
  EXPECT_EQ(classify_run(rec).str(), "blowup");
}

TEST(Scenario, VanishingDataDependsOnlyOnSeed) {
  const Grid1D g(20.0, 1000);
  const auto a = vanishing_data(g, 0.1, 7);
  const auto b = vanishing_data(g, 0.1, 7);
  const auto c = vanishing_data(g, 0.1, 8);
  EXPECT_EQ((a.u - b.u).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a.u - c.u).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(a.u.cwiseAbs().maxCoeff(), 0.3);
}

TEST(Scenario, RerunIsByteIdentical) {
  RunConfig cfg = small_config(Scenario::vanishing, 0);
  cfg.amplitude = 0.1;
  cfg.seed = 3;
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  EXPECT_EQ(timeseries_text(a), timeseries_text(b));
  EXPECT_EQ(summarize(a).dump(), summarize(b).dump());
}

TEST(Scenario, OdeOnlySharesSchema) {
  const RunConfig cfg =
      config_from_json({{"scenario", "ode_only"}, {"K", 3}, {"z0", 3.0}, {"ode", {{"t0", 10}, {"t1", 1e4}}}});
  const RunRecord rec = run_scenario(cfg);
  const std::string text = timeseries_text(rec);
  EXPECT_EQ(text.substr(0, text.find('\n')), csv_header(3));
  EXPECT_EQ(rec.rows.size(), 200u);
  EXPECT_LE(rec.extra["ode"]["max_deviation_from_profile"].get<double>(), 1e-6);
  EXPECT_NEAR(rec.extra["constants"]["kappa"].get<double>(), 12.0, 1e-8);
  std::stringstream buf(text);
  EXPECT_EQ(read_timeseries(buf).rows.size(), 200u);
}

TEST(Fit, ExactProfileGivesUnitGapSlope) {
  const auto prof = tau_profile(2, 1.0, 12.0);
  std::vector<Row> rows;
  for (double t : log_spaced(10.0, 1e4, 200)) {
    Row r;
    r.t = t;
    r.z = exact_profile_y(t, prof);
    r.ell = {0.0, 0.0};
    r.N = 1.0 / t;
    r.a_plus = r.a_minus = {0.0, 0.0};
    rows.push_back(r);
  }
  const FitSummary f = fit_asymptotics(2, rows, FitWindow{}, &prof);
  EXPECT_NEAR(f.gap_vs_log_t[0], 1.0, 1e-6);
  EXPECT_NEAR(f.exp_gap_vs_t[0], 12.0, 1e-6);
  EXPECT_NEAR(f.clock_shift[0], 0.0, 1e-6);
  EXPECT_NEAR(f.logN_vs_log_t, -1.0, 1e-12);
  EXPECT_NEAR(f.Nt_trend, 0.0, 1e-12);
  EXPECT_NEAR(f.y_sharp, 0.0, 1e-12);
  EXPECT_LT(f.theta_residual, 1e-9);
}

TEST(Fit, DegenerateWindowsFail) {
  std::vector<Row> rows(3);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].t = 1.0 + static_cast<double>(i);
  EXPECT_THROW(fit_asymptotics(0, rows, FitWindow{}), FitError);
  EXPECT_THROW(fit_asymptotics(0, rows, FitWindow{5.0, 4.0}), FitError);
  EXPECT_THROW(fit_asymptotics(0, std::vector<Row>(1), FitWindow{}), FitError);
  EXPECT_THROW(linear_fit(std::vector<double>{1.0}, std::vector<double>{2.0}), FitError);
  const auto lf = linear_fit(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5});
  EXPECT_NEAR(lf.slope, 2.0, 1e-14);
  EXPECT_NEAR(lf.intercept, 1.0, 1e-14);
  EXPECT_NEAR(lf.r_squared, 1.0, 1e-14);
}

TEST(Bisection, BracketsAStepFunction) {
  const double threshold = 0.1234567;
  auto side = [&](double a) { return a < threshold ? -1 : 1; };
  const auto r = bisect(side, -1.0, 1.0, 1e-12, 80);
  EXPECT_LE(r.width(), 1e-12);
  EXPECT_LE(r.lo, threshold);
  EXPECT_GE(r.hi, threshold);
  EXPECT_EQ(r.sign_lo, -1);
  EXPECT_EQ(r.sign_hi, 1);
  EXPECT_TRUE(r.monotone());
  EXPECT_THROW(bisect(side, 0.5, 1.0, 1e-12, 80), BracketingError);
  const auto capped = bisect(side, -1.0, 1.0, 1e-12, 5);
  EXPECT_EQ(capped.iterations, 5);
}

TEST(Persistence, SummaryRecomputesFromRunDirectory) {
  RunConfig cfg = small_config(Scenario::vanishing, 0);
  cfg.amplitude = 0.05;
  const fs::path dir = scratch_dir("persist");
  cfg.output_dir = dir.string();
  const RunRecord rec = run_scenario(cfg);
  write_run(dir, rec);
  for (const char* f : {"config.json", "timeseries.csv", "summary.json"}) EXPECT_TRUE(fs::exists(dir / f));
  const RunRecord back = read_run(dir);
  EXPECT_EQ(summarize(back).dump(), summarize(rec).dump());
  std::ifstream in(dir / "summary.json");
  json stored;
  in >> stored;
  EXPECT_EQ(stored, summarize(back));
  fs::remove_all(dir);
}

TEST(Truncation, DoublingDomainLeavesCentersUnchanged) {
  auto final_centers = [](double half_width) {
    RunConfig cfg = small_config(Scenario::two_soliton_shoot, 2);
    cfg.half_width = half_width;
    cfg.t_end = 5.0;
    const SimulationContext ctx(cfg);
    const FieldState s = soliton_sum(ctx.grid, ctx.profile, cfg.signs, cfg.z0);
    const RunRecord rec = simulate_tracked(ctx, s, cfg.signs, cfg.z0, cfg.t_end);
    EXPECT_FALSE(rec.tracking_lost) << rec.tracking_note;
    return rec.rows.back().z;
  };
  const auto a = final_centers(60.0);
  const auto b = final_centers(120.0);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(a[k], b[k], 1e-6);
}

TEST(SameSign, MirrorSymmetricPairAttracts) {
  RunConfig cfg = config_from_json({{"scenario", "same_sign_pair"}, {"K", 2}, {"z0", 6.0}, {"t_end", 12.0}});
  const SimulationContext ctx(cfg);
  const auto r = same_sign_probe(ctx);
  EXPECT_TRUE(r.spacing_decreasing);
  EXPECT_LT(r.longest_growth, 10.0);
  std::size_t tracked = 0;
  for (const auto& row : r.record.rows) {
    if (!row.tracked()) continue;
    ++tracked;
    EXPECT_NEAR(row.z[0], -row.z[1], 1e-9);
  }
  EXPECT_GT(tracked, 10u);
}
