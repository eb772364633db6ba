#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nlkg/errors.hpp"
#include "nlkg/experiments/record.hpp"
#include "nlkg/fit.hpp"
#include "nlkg/interaction_ode.hpp"

namespace nlkg {

struct FitWindow {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
  double theta = 1.1;
  std::size_t min_samples = 50;
};

inline FitWindow fit_window(const RunConfig& c) { return {c.fit.t_lo, c.fit.t_hi, c.fit.theta, c.fit.min_samples}; }

struct FitSummary {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  std::vector<double> gap_vs_log_t;    // slope of z_{k+1} - z_k against log t
  std::vector<double> exp_gap_vs_t;    // slope of e^{z_{k+1} - z_k} against t
  std::vector<double> clock_shift;     // intercept / slope of the previous fit
  std::vector<double> gap_vs_log_shifted_t;  // slope against log(t + clock_shift)
  double logN_vs_log_t = kNaN;
  double logN_vs_t = kNaN;            // exponential rate is minus this
  double Nt_trend = kNaN;             // log-log slope of N t over the second half of the window
  double theta_residual = kNaN;       // sup |r - fit| t^{theta - 1}
  double ell_limit = kNaN;            // mean ell_k at the last sample
  double y_sharp = kNaN;              // mean of z_k - ybar_k at the last sample (K >= 2)
};

inline json to_json(const FitSummary& f) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto vec = [&](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
  };
  return {{"t_lo", f.t_lo},
          {"t_hi", f.t_hi},
          {"samples", f.samples},
          {"gap_vs_log_t", vec(f.gap_vs_log_t)},
          {"exp_gap_vs_t", vec(f.exp_gap_vs_t)},
          {"clock_shift", vec(f.clock_shift)},
          {"gap_vs_log_shifted_t", vec(f.gap_vs_log_shifted_t)},
          {"logN_vs_log_t", num(f.logN_vs_log_t)},
          {"logN_vs_t", num(f.logN_vs_t)},
          {"Nt_trend", num(f.Nt_trend)},
          {"theta_residual", num(f.theta_residual)},
          {"ell_limit", num(f.ell_limit)},
          {"y_sharp", num(f.y_sharp)}};
}

/// Least-squares fits over the window (default: the last two-thirds of the samples).
/// Soliton fits use tracked rows only; N fits use every row with positive N.
inline FitSummary fit_asymptotics(std::size_t K, const std::vector<Row>& rows, const FitWindow& w,
                                  const AsymptoticProfile* profile = nullptr) {
  if (rows.size() < 2) throw FitError("fit: record has fewer than two samples");
  FitSummary f;
  f.t_lo = w.t_lo.value_or(rows[rows.size() / 3].t);
  f.t_hi = w.t_hi.value_or(rows.back().t);
  if (!(f.t_hi > f.t_lo)) throw FitError("fit: empty window");

  std::vector<const Row*> in;
  for (const auto& r : rows) {
    if (r.t >= f.t_lo && r.t <= f.t_hi && r.t > 0.0) in.push_back(&r);
  }
  f.samples = in.size();
  if (in.size() < w.min_samples) {
    throw FitError("fit: " + std::to_string(in.size()) + " samples in window, need " + std::to_string(w.min_samples));
  }

  std::vector<double> tn, logtn, logN, logNt_t, logNt;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Row& r = *in[i];
    if (!(r.N > 0.0) || !std::isfinite(r.N)) continue;
    tn.push_back(r.t);
    logtn.push_back(std::log(r.t));
    logN.push_back(std::log(r.N));
    if (2 * i >= in.size()) {
      logNt_t.push_back(std::log(r.t));
      logNt.push_back(std::log(r.N * r.t));
    }
  }
  if (tn.size() >= 2) {
    f.logN_vs_t = linear_fit(tn, logN).slope;
    f.logN_vs_log_t = linear_fit(logtn, logN).slope;
  }
  if (logNt.size() >= 2) f.Nt_trend = linear_fit(logNt_t, logNt).slope;

  const Row* last_tracked = nullptr;
  for (const Row* r : in) {
    if (r->tracked()) last_tracked = r;
  }
  if (last_tracked && K >= 1) {
    double s = 0.0;
    for (double l : last_tracked->ell) s += l;
    f.ell_limit = s / static_cast<double>(K);
  }
  if (K < 2) return f;

  for (std::size_t k = 0; k + 1 < K; ++k) {
    std::vector<double> t, logt, gap, egap;
    for (const Row* r : in) {
      if (!r->tracked()) continue;
      const double g = r->z[k + 1] - r->z[k];
      t.push_back(r->t);
      logt.push_back(std::log(r->t));
      gap.push_back(g);
      egap.push_back(std::exp(g));
    }
    if (t.size() < w.min_samples) {
      throw FitError("fit: only " + std::to_string(t.size()) + " tracked samples in window");
    }
    const auto lin = linear_fit(logt, gap);
    f.gap_vs_log_t.push_back(lin.slope);
    const auto ex = linear_fit(t, egap);
    f.exp_gap_vs_t.push_back(ex.slope);
    const double shift = ex.intercept / ex.slope;
    f.clock_shift.push_back(shift);
    std::vector<double> log_shifted;
    for (double ti : t) log_shifted.push_back(ti + shift > 0.0 ? std::log(ti + shift) : kNaN);
    try {
      f.gap_vs_log_shifted_t.push_back(linear_fit(log_shifted, gap).slope);
    } catch (const FitError&) {
      f.gap_vs_log_shifted_t.push_back(kNaN);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double fitted = lin.slope * logt[i] + lin.intercept;
      worst = std::max(worst, std::abs(gap[i] - fitted) * std::pow(t[i], w.theta - 1.0));
    }
    f.theta_residual = std::isfinite(f.theta_residual) ? std::max(f.theta_residual, worst) : worst;
  }
  if (last_tracked && profile && static_cast<std::size_t>(profile->K) == K) {
    const auto ybar = exact_profile_y(last_tracked->t, *profile);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += last_tracked->z[k] - ybar[k];
    f.y_sharp = s / static_cast<double>(K);
  }
  return f;
}

inline FitSummary fit_asymptotics(const RunRecord& rec) {
  std::optional<AsymptoticProfile> prof;
  if (rec.K() >= 2 && rec.extra.contains("constants") && rec.extra["constants"].contains("kappa")) {
    prof = tau_profile(static_cast<int>(rec.K()), rec.config.params.alpha,
                       rec.extra["constants"]["kappa"].get<double>());
  }
  return fit_asymptotics(rec.K(), rec.rows, fit_window(rec.config), prof ? &*prof : nullptr);
}

/// summary.json content; everything except `extra` is recomputed from the
/// config, the rows and the run flags.
inline json summarize(const RunRecord& rec) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json s;
  s["scenario"] = to_string(rec.config.scenario);
  s["K"] = rec.K();
  s["signs"] = rec.sigma;
  s["samples"] = rec.rows.size();
  s["classification"] = classify_run(rec).str();
  s["blowup"] = rec.blowup;
  s["blowup_time"] = num(rec.blowup_time);
  s["tracking_lost"] = rec.tracking_lost;
  s["tracking_lost_time"] = num(rec.tracking_lost_time);
  s["tracking_note"] = rec.tracking_note;
  s["thresholds"] = {{"tube_radius", rec.config.tracking.tube_radius},
                     {"vanishing_threshold", rec.config.tracking.vanishing_threshold},
                     {"theta_fit", rec.config.fit.theta}};
  try {
    s["fits"] = to_json(fit_asymptotics(rec));
  } catch (const FitError& e) {
    s["fits"] = {{"error", e.what()}};
  }
  s["extra"] = rec.extra;
  return s;
}

}  // namespace nlkg
