#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlkg/errors.hpp"
#include "nlkg/experiments/config.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/modulation.hpp"
#include "nlkg/solver.hpp"
#include "nlkg/spectrum.hpp"

namespace nlkg {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One sample of a run; mirrors a timeseries.csv row. Untracked samples carry
/// NaN soliton columns and N = ||(u, u_t)||.
struct Row {
  double t = 0.0;
  std::vector<double> z;
  std::vector<double> ell;
  double N = kNaN;
  double F_minus = kNaN;
  double F_plus = kNaN;
  double b = kNaN;
  double E = kNaN;
  double dtu_L2 = kNaN;
  std::vector<double> a_plus;
  std::vector<double> a_minus;

  bool tracked() const { return !z.empty() && std::isfinite(z.front()); }
};

struct RunRecord {
  RunConfig config;
  std::vector<int> sigma;
  std::vector<Row> rows;
  bool blowup = false;
  double blowup_time = kNaN;
  bool tracking_lost = false;
  double tracking_lost_time = kNaN;
  std::string tracking_note;
  json extra = json::object();
  std::vector<FieldState> snapshots;

  std::size_t K() const { return sigma.size(); }
};

/// Everything a scenario needs that depends only on the config.
struct SimulationContext {
  RunConfig config;
  Grid1D grid;
  Profile profile;
  SpectralData spectral;
  GroundStateConsts consts;
  double mu;

  explicit SimulationContext(const RunConfig& cfg)
      : config(cfg),
        grid(cfg.grid()),
        profile(cfg.tracking.discrete_template ? Profile::discrete(cfg.params.p, grid)
                                               : Profile::analytic(cfg.params.p)),
        spectral(compute_spectral_data(cfg.params, cfg.spectrum)),
        consts(compute_constants(cfg.params)),
        mu(cfg.tracking.mu.value_or(default_mu(cfg.params.alpha, spectral.nu_minus))) {}

  DecomposeOptions decompose_options() const {
    DecomposeOptions o;
    o.tube_radius = config.tracking.tube_radius;
    return o;
  }
};

/// Samples a run: decomposes each state around the tracked solitons, and
/// falls back to untracked rows once the decomposition fails.
class Tracker {
 public:
  Tracker(const SimulationContext& ctx, std::vector<int> sigma, std::vector<double> z_guess)
      : ctx_(&ctx), sigma_(std::move(sigma)), z_(std::move(z_guess)), ell_(sigma_.size(), 0.0) {}

  bool active() const { return !sigma_.empty() && !lost_; }
  bool lost() const { return lost_; }
  double lost_time() const { return lost_time_; }
  const std::string& note() const { return note_; }
  const std::vector<double>& centers() const { return z_; }
  const std::optional<Decomposition>& last() const { return last_; }

  Row sample(const FieldState& s) {
    const std::size_t K = sigma_.size();
    Row row;
    row.t = s.t;
    row.E = energy(s, ctx_->config.params.p);
    row.dtu_L2 = std::sqrt(l2_norm_sq(s.grid, s.v));
    row.z.assign(K, kNaN);
    row.ell.assign(K, kNaN);
    row.a_plus.assign(K, kNaN);
    row.a_minus.assign(K, kNaN);
    if (active()) {
      std::vector<double> guess = z_;
      if (std::isfinite(last_t_)) {
        for (std::size_t k = 0; k < K; ++k) guess[k] += ell_[k] * (s.t - last_t_);
      }
      try {
        auto dec = decompose(s, ctx_->profile, ctx_->spectral, sigma_, guess, ctx_->decompose_options());
        const auto d = diagnostics(dec, s.grid, ctx_->config.params, ctx_->spectral, ctx_->mu);
        row.z = dec.z;
        row.ell = dec.ell;
        row.a_plus = dec.a_plus;
        row.a_minus = dec.a_minus;
        row.N = d.N;
        row.F_minus = d.F_minus;
        row.F_plus = d.F_plus;
        row.b = d.b;
        z_ = dec.z;
        ell_ = dec.ell;
        last_t_ = s.t;
        last_ = std::move(dec);
        return row;
      } catch (const OutOfTube& e) {
        mark_lost(s.t, e.what());
      } catch (const IllConditioned& e) {
        mark_lost(s.t, e.what());
      }
    }
    row.N = std::sqrt(energy_norm_sq(s.grid, s.u, s.v));
    return row;
  }

 private:
  void mark_lost(double t, const std::string& why) {
    lost_ = true;
    lost_time_ = t;
    note_ = why;
    last_.reset();
  }

  const SimulationContext* ctx_;
  std::vector<int> sigma_;
  std::vector<double> z_;
  std::vector<double> ell_;
  double last_t_ = kNaN;
  bool lost_ = false;
  double lost_time_ = kNaN;
  std::string note_;
  std::optional<Decomposition> last_;
};

/// Steps `evo` to `t_stop`, appending a row every `stride` steps (and one at
/// the starting time when `sample_start`). Returns false on blow-up.
inline bool advance_tracked(Evolution& evo, Tracker& tracker, RunRecord& rec, double t_stop, std::size_t stride,
                            bool sample_start = true) {
  const double dt = evo.config().dt;
  const auto stop = static_cast<std::size_t>(std::llround((t_stop - evo.time()) / dt)) + evo.steps();
  const auto& wanted = rec.config.snapshot_times;
  auto snapshot = [&] {
    for (double ts : wanted) {
      if (std::abs(evo.time() - ts) > 0.5 * dt) continue;
      if (!rec.snapshots.empty() && std::abs(rec.snapshots.back().t - evo.time()) < 0.5 * dt) continue;
      rec.snapshots.push_back(evo.state());
    }
  };
  try {
    if (sample_start) {
      rec.rows.push_back(tracker.sample(evo.state()));
      if (!wanted.empty()) snapshot();
    }
    while (evo.steps() < stop) {
      evo.step();
      if (evo.steps() % stride == 0) rec.rows.push_back(tracker.sample(evo.state()));
      if (!wanted.empty()) snapshot();
    }
  } catch (const BlowUp& e) {
    rec.blowup = true;
    rec.blowup_time = e.last_finite_time();
  }
  if (tracker.lost() && !rec.tracking_lost) {
    rec.tracking_lost = true;
    rec.tracking_lost_time = tracker.lost_time();
    rec.tracking_note = tracker.note();
  }
  return !rec.blowup;
}

/// Full tracked run from `initial` to the config horizon.
inline RunRecord simulate_tracked(const SimulationContext& ctx, const FieldState& initial, std::vector<int> sigma,
                                  std::vector<double> z_guess, double t_end) {
  RunRecord rec;
  rec.config = ctx.config;
  rec.sigma = sigma;
  Tracker tracker(ctx, std::move(sigma), std::move(z_guess));
  try {
    Evolution evo(initial, ctx.config.step_config());
    advance_tracked(evo, tracker, rec, t_end, ctx.config.sample_stride());
  } catch (const BlowUp& e) {
    rec.blowup = true;
    rec.blowup_time = e.last_finite_time();
  }
  return rec;
}

// Persistence.

inline std::string csv_header(std::size_t K) {
  std::string h = "t";
  for (std::size_t k = 1; k <= K; ++k) h += ",z_" + std::to_string(k);
  for (std::size_t k = 1; k <= K; ++k) h += ",ell_" + std::to_string(k);
  h += ",N,F_minus,F_plus,b,E,dtu_L2";
  for (std::size_t k = 1; k <= K; ++k) h += ",a_plus_" + std::to_string(k);
  for (std::size_t k = 1; k <= K; ++k) h += ",a_minus_" + std::to_string(k);
  return h;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_timeseries(std::ostream& out, std::size_t K, const std::vector<Row>& rows) {
  out << csv_header(K) << '\n';
  for (const auto& r : rows) {
    std::string line = format_number(r.t);
    auto put = [&line](double v) {
      line += ',';
      line += format_number(v);
    };
    for (double v : r.z) put(v);
    for (double v : r.ell) put(v);
    for (double v : {r.N, r.F_minus, r.F_plus, r.b, r.E, r.dtu_L2}) put(v);
    for (double v : r.a_plus) put(v);
    for (double v : r.a_minus) put(v);
    out << line << '\n';
  }
}

struct Timeseries {
  std::size_t K = 0;
  std::vector<Row> rows;
};

inline Timeseries read_timeseries(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidParameter("timeseries: empty input");
  std::size_t columns = 1;
  for (char c : line) columns += c == ',' ? 1 : 0;
  if (columns < 7 || (columns - 7) % 4 != 0) throw InvalidParameter("timeseries: unexpected column count");
  Timeseries ts;
  ts.K = (columns - 7) / 4;
  if (line != csv_header(ts.K)) throw InvalidParameter("timeseries: header mismatch");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != columns) throw InvalidParameter("timeseries: ragged row");
    const std::size_t K = ts.K;
    Row r;
    r.t = v[0];
    r.z.assign(v.begin() + 1, v.begin() + 1 + K);
    r.ell.assign(v.begin() + 1 + K, v.begin() + 1 + 2 * K);
    const std::size_t o = 1 + 2 * K;
    r.N = v[o];
    r.F_minus = v[o + 1];
    r.F_plus = v[o + 2];
    r.b = v[o + 3];
    r.E = v[o + 4];
    r.dtu_L2 = v[o + 5];
    r.a_plus.assign(v.begin() + o + 6, v.begin() + o + 6 + K);
    r.a_minus.assign(v.begin() + o + 6 + K, v.end());
    if (!ts.rows.empty() && !(r.t > ts.rows.back().t)) throw InvalidParameter("timeseries: rows not time-ordered");
    ts.rows.push_back(std::move(r));
  }
  return ts;
}

inline Timeseries read_timeseries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open " + path.string());
  return read_timeseries(in);
}

// Classification.

enum class Outcome { vanishing, single_soliton, multi_soliton, blowup, undecided };

struct Classification {
  Outcome outcome = Outcome::undecided;
  std::size_t K = 0;

  std::string str() const {
    switch (outcome) {
      case Outcome::vanishing: return "vanishing";
      case Outcome::single_soliton: return "single_soliton";
      case Outcome::multi_soliton: return "multi_soliton(" + std::to_string(K) + ")";
      case Outcome::blowup: return "blowup";
      case Outcome::undecided: return "undecided";
    }
    return "undecided";
  }

  bool operator==(const Classification&) const = default;
};

/// Blow-up first; then a small, decaying terminal energy norm means vanishing;
/// K solitons tracked to the end with N not growing (and, for K >= 2,
/// spacings not shrinking) gives single/multi-soliton; otherwise undecided.
inline Classification classify_run(const RunRecord& rec) {
  if (rec.blowup) return {Outcome::blowup, 0};
  if (rec.rows.empty()) return {};
  const Row& last = rec.rows.back();
  const Row& mid = rec.rows[rec.rows.size() / 2];
  const double slack = 1e-10;
  if (!last.tracked()) {
    const bool decaying = last.N <= mid.N || rec.rows.size() < 3;
    if (last.N < rec.config.tracking.vanishing_threshold && decaying) return {Outcome::vanishing, 0};
    return {};
  }
  const std::size_t K = rec.K();
  if (!mid.tracked() || !(last.N <= mid.N + slack)) return {};
  if (K == 1) return {Outcome::single_soliton, 1};
  const Row& first = rec.rows.front();
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double gap0 = first.z[k + 1] - first.z[k];
    const double gap1 = last.z[k + 1] - last.z[k];
    if (!(gap1 >= gap0 - 1e-9)) return {};
  }
  return {Outcome::multi_soliton, K};
}

/// Longest stretch (in time) over which some same-sign neighbouring pair is
/// tracked with strictly growing spacing.
inline double longest_same_sign_growth(const RunRecord& rec) {
  double longest = 0.0;
  for (std::size_t k = 0; k + 1 < rec.K(); ++k) {
    if (rec.sigma[k] != rec.sigma[k + 1]) continue;
    double start = kNaN;
    for (std::size_t i = 1; i < rec.rows.size(); ++i) {
      const Row& a = rec.rows[i - 1];
      const Row& b = rec.rows[i];
      const bool growing = a.tracked() && b.tracked() && (b.z[k + 1] - b.z[k]) > (a.z[k + 1] - a.z[k]);
      if (growing) {
        if (!std::isfinite(start)) start = a.t;
        longest = std::max(longest, b.t - start);
      } else {
        start = kNaN;
      }
    }
  }
  return longest;
}

}  // namespace nlkg
