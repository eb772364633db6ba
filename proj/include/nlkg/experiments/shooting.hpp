#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nlkg/errors.hpp"
#include "nlkg/experiments/record.hpp"
#include "nlkg/experiments/wmap.hpp"
#include "nlkg/modulation.hpp"
#include "nlkg/solver.hpp"

namespace nlkg {

struct BisectionResult {
  double lo = 0.0;
  double hi = 0.0;
  int sign_lo = 0;
  int sign_hi = 0;
  int iterations = 0;
  std::vector<std::pair<double, int>> history;

  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }

  /// Sorted by parameter, the last five probes and both ends switch sign once.
  bool monotone() const {
    std::vector<std::pair<double, int>> pts{{lo, sign_lo}, {hi, sign_hi}};
    const std::size_t from = history.size() > 5 ? history.size() - 5 : 0;
    pts.insert(pts.end(), history.begin() + static_cast<long>(from), history.end());
    std::sort(pts.begin(), pts.end());
    int changes = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) changes += pts[i].second != pts[i - 1].second ? 1 : 0;
    return changes == 1;
  }
};

/// Bisection on a sign-valued classifier.
inline BisectionResult bisect(const std::function<int(double)>& side, double lo, double hi, double width_tol,
                              int max_iter) {
  BisectionResult r{lo, hi, side(lo), side(hi), 0, {}};
  if (r.sign_lo == r.sign_hi) {
    throw BracketingError("no sign change on [" + format_number(lo) + ", " + format_number(hi) + "]");
  }
  while (r.width() > width_tol && r.iterations < max_iter) {
    const double m = r.mid();
    if (m <= r.lo || m >= r.hi) break;
    const int s = side(m);
    r.history.emplace_back(m, s);
    if (s == r.sign_lo) {
      r.lo = m;
    } else {
      r.hi = m;
    }
    ++r.iterations;
  }
  return r;
}

/// +1 when the trajectory leaves on the growing side (amplitude above
/// escape_high * peak, or blow-up), -1 when it collapses below escape_low * peak.
/// Undecided trajectories are resolved at the horizon by the sign of the mean
/// unstable amplitude, then by max|u| against the peak.
inline int escape_side(const SimulationContext& ctx, const FieldState& initial, std::span<const int> sigma,
                       std::span<const double> z, double horizon) {
  const auto& sh = ctx.config.shooting;
  const double peak = ctx.profile.peak();
  try {
    Evolution evo(initial, ctx.config.step_config());
    const auto stop = static_cast<std::size_t>(std::llround(horizon / ctx.config.dt));
    while (evo.steps() < stop) {
      evo.step();
      if (evo.steps() % 10 != 0) continue;
      const double m = evo.max_abs_u();
      if (m > sh.escape_high * peak) return 1;
      if (m < sh.escape_low * peak) return -1;
    }
    const FieldState s = evo.state();
    try {
      const auto dec = decompose(s, ctx.profile, ctx.spectral, sigma, z, ctx.decompose_options());
      double mean = 0.0;
      for (double a : dec.a_plus) mean += a;
      if (mean != 0.0) return mean > 0.0 ? 1 : -1;
    } catch (const Error&) {
    }
    return evo.max_abs_u() >= peak ? 1 : -1;
  } catch (const BlowUp&) {
    return 1;
  }
}

struct ShootResult {
  std::vector<double> threshold;
  BisectionResult bracket;
  RunRecord record;
  RunRecord lo_record;
  RunRecord hi_record;
  Classification lo_class;
  Classification hi_class;
  json segments = json::array();
};

/// (sigma (Q + aY)(. - z), sigma nu^+ a Y(. - z)) with the explicit Q.
inline FieldState single_soliton_data(const SimulationContext& ctx, double a, int sigma, double z) {
  const Grid1D& g = ctx.grid;
  const double p = ctx.config.params.p;
  const Field Y = ctx.spectral.Y_on(g, z);
  FieldState s = FieldState::zero(g);
  s.u = static_cast<double>(sigma) * (g.sample([&](double x) { return eval_Q(p, x - z); }) + a * Y);
  s.v = static_cast<double>(sigma) * ctx.spectral.nu_plus * a * Y;
  return s;
}

inline ShootResult shoot_single(const SimulationContext& ctx) {
  const auto& cfg = ctx.config;
  const int sigma = cfg.signs.at(0);
  const double z = cfg.z0.at(0);
  const std::vector<int> sig{sigma};
  const std::vector<double> zs{z};
  auto side = [&](double a) { return escape_side(ctx, single_soliton_data(ctx, a, sigma, z), sig, zs, cfg.shooting.horizon); };
  ShootResult out;
  out.bracket = bisect(side, cfg.bisection.lo, cfg.bisection.hi, cfg.bisection.width_tol, cfg.bisection.max_iter);
  out.threshold = {out.bracket.mid()};
  out.record = simulate_tracked(ctx, single_soliton_data(ctx, out.bracket.mid(), sigma, z), sig, zs, cfg.t_end);
  out.lo_record =
      simulate_tracked(ctx, single_soliton_data(ctx, cfg.bisection.lo, sigma, z), sig, zs, cfg.t_end);
  out.hi_record =
      simulate_tracked(ctx, single_soliton_data(ctx, cfg.bisection.hi, sigma, z), sig, zs, cfg.t_end);
  out.lo_class = classify_run(out.lo_record);
  out.hi_class = classify_run(out.hi_record);
  return out;
}

namespace detail {

inline FieldState with_symmetry(FieldState s, int parity) {
  s.u = symmetrize(s.grid, s.u, parity);
  s.v = symmetrize(s.grid, s.v, parity);
  return s;
}

inline FieldState perturbed(const FieldState& base, const WField& w, double scale, int parity) {
  FieldState s = base;
  s.u += scale * w.W;
  s.v += scale * w.Wt;
  return with_symmetry(std::move(s), parity);
}

}  // namespace detail

/// Two opposite-sign solitons with odd symmetry. The amplitude along the
/// W-direction a = (d, d) is bisected, the threshold trajectory is kept for
/// `segment` time units, and the shooting is repeated from the reached state
/// (roundoff excites the unstable direction at rate nu^+, so one threshold
/// cannot be followed for hundreds of time units).
inline ShootResult shoot_two_soliton(const SimulationContext& ctx) {
  const auto& cfg = ctx.config;
  const auto& sh = cfg.shooting;
  const std::vector<int> sigma = cfg.signs;
  const int parity = -1;

  ShootResult out;
  out.record.config = cfg;
  out.record.sigma = sigma;
  Tracker tracker(ctx, sigma, cfg.z0);
  FieldState state = detail::with_symmetry(soliton_sum(ctx.grid, ctx.profile, sigma, cfg.z0), parity);
  std::vector<double> z = cfg.z0;
  const std::vector<double> unit{1.0, 1.0};

  double lo = cfg.bisection.lo;
  double hi = cfg.bisection.hi;
  bool first = true;
  while (state.t < cfg.t_end - 0.5 * cfg.dt) {
    const WField w = build_W(unit, z, sigma, ctx.grid, ctx.profile, ctx.spectral);
    auto side = [&](double d) {
      return escape_side(ctx, detail::perturbed(state, w, d, parity), sigma, z, sh.horizon);
    };
    BisectionResult br;
    for (int expand = 0;; ++expand) {
      try {
        br = bisect(side, lo, hi, first ? cfg.bisection.width_tol : 1e-8 * (hi - lo), cfg.bisection.max_iter);
        break;
      } catch (const BracketingError&) {
        if (first || expand >= 6) throw;
        lo *= 10.0;
        hi *= 10.0;
      }
    }
    if (first) out.bracket = br;
    const double d = br.mid();
    const double seg_end = std::min(cfg.t_end, state.t + sh.segment);
    Evolution evo(detail::perturbed(state, w, d, parity), cfg.step_config());
    const bool ok = advance_tracked(evo, tracker, out.record, seg_end, cfg.sample_stride(), first);
    out.segments.push_back({{"t_start", state.t},
                            {"amplitude", d},
                            {"bracket_width", br.width()},
                            {"iterations", br.iterations},
                            {"monotone", br.monotone()}});
    if (first) out.threshold = {d};
    if (!ok || tracker.lost()) break;
    state = detail::with_symmetry(evo.state(), parity);
    z = tracker.centers();
    lo = -sh.reshoot_bracket;
    hi = sh.reshoot_bracket;
    first = false;
  }
  return out;
}

/// Odd K >= 3 with even symmetry: the unstable amplitudes come in mirror
/// pairs, leaving (K+1)/2 parameters. They are found by Newton iteration on
/// the unstable amplitudes at increasing horizons (finite-difference Jacobian).
inline ShootResult shoot_k_soliton(const SimulationContext& ctx, std::vector<double> horizons = {2, 4, 6, 8, 10}) {
  const auto& cfg = ctx.config;
  const std::vector<int> sigma = cfg.signs;
  const std::size_t K = sigma.size();
  const std::size_t m = (K + 1) / 2;
  const int parity = 1;
  const FieldState base = detail::with_symmetry(soliton_sum(ctx.grid, ctx.profile, sigma, cfg.z0), parity);

  auto amplitudes = [&](const Eigen::VectorXd& c) {
    std::vector<double> a(K);
    for (std::size_t k = 0; k < K; ++k) a[k] = c[static_cast<Eigen::Index>(std::min(k, K - 1 - k))];
    return a;
  };
  auto data = [&](const Eigen::VectorXd& c) {
    const WField w = build_W(amplitudes(c), cfg.z0, sigma, ctx.grid, ctx.profile, ctx.spectral);
    return detail::perturbed(base, w, 1.0, parity);
  };
  auto residual = [&](const Eigen::VectorXd& c, double horizon) {
    Evolution evo(data(c), cfg.step_config());
    evo.advance_to(horizon);
    const auto dec = decompose(evo.state(), ctx.profile, ctx.spectral, sigma, cfg.z0, ctx.decompose_options());
    Eigen::VectorXd g(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) g[static_cast<Eigen::Index>(k)] = dec.a_plus[k];
    return g;
  };

  ShootResult out;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (double horizon : horizons) {
    for (int iter = 0; iter < 8; ++iter) {
      const Eigen::VectorXd g = residual(c, horizon);
      if (g.cwiseAbs().maxCoeff() < 1e-12) break;
      Eigen::MatrixXd J(g.size(), g.size());
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        Eigen::VectorXd cj = c;
        const double h = 1e-7;
        cj[j] += h;
        J.col(j) = (residual(cj, horizon) - g) / h;
      }
      c -= J.partialPivLu().solve(g);
      if (!c.allFinite()) throw NumericalFailure("k-soliton Newton shooting diverged");
    }
    out.segments.push_back({{"horizon", horizon}, {"amplitudes", std::vector<double>(c.data(), c.data() + c.size())}});
  }
  out.threshold = amplitudes(c);
  out.record = simulate_tracked(ctx, data(c), sigma, cfg.z0, cfg.t_end);
  return out;
}

struct ProbeResult {
  RunRecord record;
  bool spacing_decreasing = false;  // strictly, over every tracked sample
  double exit_time = kNaN;
  Classification final_class;
  double longest_growth = 0.0;
};

/// Equal-sign pair with even symmetry, run until (and past) tube exit.
inline ProbeResult same_sign_probe(const SimulationContext& ctx) {
  const auto& cfg = ctx.config;
  const FieldState initial = detail::with_symmetry(soliton_sum(ctx.grid, ctx.profile, cfg.signs, cfg.z0), 1);
  ProbeResult out;
  out.record = simulate_tracked(ctx, initial, cfg.signs, cfg.z0, cfg.t_end);
  out.exit_time = out.record.tracking_lost ? out.record.tracking_lost_time : kNaN;
  bool decreasing = true;
  std::size_t tracked = 0;
  for (std::size_t i = 0; i < out.record.rows.size(); ++i) {
    const Row& r = out.record.rows[i];
    if (!r.tracked()) break;
    ++tracked;
    if (i > 0 && !(r.z[1] - r.z[0] < out.record.rows[i - 1].z[1] - out.record.rows[i - 1].z[0])) decreasing = false;
  }
  out.spacing_decreasing = decreasing && tracked >= 2;
  out.final_class = classify_run(out.record);
  out.longest_growth = longest_same_sign_growth(out.record);
  return out;
}

}  // namespace nlkg
