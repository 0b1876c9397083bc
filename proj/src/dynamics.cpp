#include "memdiff/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "memdiff/errors.hpp"
#include "memdiff/linalg.hpp"

namespace memdiff {

// --- HistoryBuffer -------------------------------------------------------

HistoryBuffer::HistoryBuffer(double sigma, double dt, int max_snapshots)
    : sigma_(sigma), dt_(dt) {
  if (!(sigma >= 0.0) || !(dt > 0.0) || max_snapshots < 8)
    fail(ErrorCode::InvalidConfig, "history buffer: bad sigma/dt/capacity");
  const double need = sigma / dt + 4.0;
  stride_ = std::max(1, static_cast<int>(std::ceil(need / max_snapshots)));
}

void HistoryBuffer::seed(double t0, const Field& u) {
  times_.clear();
  fields_.clear();
  pushes_ = 0;
  newest_provisional_ = false;
  if (sigma_ > 0.0) {
    times_.push_back(t0 - sigma_);
    fields_.push_back(u);
  }
  times_.push_back(t0);
  fields_.push_back(u);
}

void HistoryBuffer::push(double t, const Field& u) {
  if (!times_.empty() && t <= times_.back())
    fail(ErrorCode::HistoryUnderrun, "history buffer: non-increasing push");
  if (newest_provisional_) {
    times_.pop_back();
    fields_.pop_back();
  }
  ++pushes_;
  newest_provisional_ = (pushes_ % stride_ != 0);
  times_.push_back(t);
  fields_.push_back(u);
  // keep a couple of spare snapshots below the oldest lookup t - sigma
  const double keep_from = t - sigma_ - (stride_ + 2.0) * dt_;
  while (times_.size() > 2 && times_.front() < keep_from &&
         times_[1] <= t - sigma_ - dt_) {
    times_.pop_front();
    fields_.pop_front();
  }
}

Field HistoryBuffer::at(double t) const {
  if (times_.empty())
    fail(ErrorCode::HistoryUnderrun, "history buffer: lookup before seed");
  const double fuzz = 1e-9 * (1.0 + std::fabs(t)) * dt_;
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) {
    if (t - times_.back() <= fuzz) return fields_.back();
    fail(ErrorCode::HistoryUnderrun,
         "history buffer: lookup at t=" + std::to_string(t) +
             " beyond newest snapshot " + std::to_string(times_.back()));
  }
  const auto idx = it - times_.begin();
  if (*it == t) return fields_[idx];
  if (idx == 0) {
    if (times_.front() - t <= fuzz) return fields_.front();
    fail(ErrorCode::HistoryUnderrun,
         "history buffer: lookup at t=" + std::to_string(t) +
             " before oldest snapshot " + std::to_string(times_.front()));
  }
  const double ta = times_[idx - 1], tb = times_[idx];
  const double th = (t - ta) / (tb - ta);
  const Field& a = fields_[idx - 1];
  const Field& b = fields_[idx];
  Field out(a.size());
  for (size_t i = 0; i < a.size(); ++i)
    out[i] = (1.0 - th) * a[i] + th * b[i];
  return out;
}

// --- stepping ------------------------------------------------------------

double default_time_step(const ModelSpec& m, const Grid1D& grid, double T) {
  double dt = 0.25 * grid.h() * grid.h();
  if (m.sigma > 0.0) dt = std::min(dt, m.sigma / 64.0);
  dt = std::min(dt, 1e-3 * T);
  return dt;
}

namespace {

constexpr double kConvergedTol = 1e-5;  // ||u(T) - u*||_inf for ConvergedToSteady
constexpr int kMinPeaks = 5;            // trailing peaks for SustainedOscillation
constexpr double kAmpSpreadTol = 0.05;  // relative cycle-amplitude spread
constexpr double kTailFraction = 0.4;   // diagnostics window: final 40%

bool all_finite(const Field& u) {
  for (double v : u)
    if (!std::isfinite(v)) return false;
  return true;
}

// Explicit bundle X = boundary lifts + memory flux + reaction, together with
// the analytic flux functional F used by the mass audit.
struct Bundle {
  Field X;
  double flux = 0.0;
};

double flux_functional(const ModelSpec& m, const Grid1D& grid, const Field& u,
                       const Field& us) {
  const int N = grid.cells();
  const double b0 = m.lambda * m.r0 * m.g(u[0]);
  const double b1 = m.lambda * m.r1 * m.g(u[N]);
  double fx = b0 + b1;
  if (m.d != 0.0) {
    const double bs0 = m.lambda * m.r0 * m.g(us[0]);
    const double bs1 = m.lambda * m.r1 * m.g(us[N]);
    fx += m.d * (u[0] * bs0 + u[N] * bs1);
  }
  for (int i = 0; i <= N; ++i)
    fx += grid.weight(i) * m.lambda * u[i] * m.f(grid.x(i), u[i]);
  return fx;
}

Bundle explicit_bundle(const ModelSpec& m, const Grid1D& grid, const Field& u,
                       const Field& us) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const double h = grid.h();
  const double b0 = m.lambda * m.r0 * m.g(u[0]);
  const double b1 = m.lambda * m.r1 * m.g(u[N]);

  Bundle out;
  out.X = zero_field(grid);
  out.X[0] += 2.0 * b0 / h;  // Neumann-ghost lift of the implicit Laplacian
  out.X[N] += 2.0 * b1 / h;
  out.flux = b0 + b1;

  if (m.d != 0.0) {
    const double bs0 = m.lambda * m.r0 * m.g(us[0]);
    const double bs1 = m.lambda * m.r1 * m.g(us[N]);
    const GhostPair gu = ghosts_from_flux(grid, u, b0, b1);
    const GhostPair gs = ghosts_from_flux(grid, us, bs0, bs1);
    const Field div = memory_flux_divergence(grid, u, us, gu, gs);
    for (int i = 0; i < n; ++i) out.X[i] += m.d * div[i];
    out.flux += m.d * (u[0] * bs0 + u[N] * bs1);
  }
  for (int i = 0; i < n; ++i) {
    out.X[i] += m.lambda * u[i] * m.f(grid.x(i), u[i]);
    out.flux += grid.weight(i) * m.lambda * u[i] * m.f(grid.x(i), u[i]);
  }
  return out;
}

struct Turning {
  double t = 0.0;
  double v = 0.0;
  bool is_max = false;
};

// Alternating maxima/minima of a sampled series, with parabolic refinement of
// the turning time and value; swings below `floor` are treated as flat.
std::vector<Turning> turning_points(const std::vector<double>& ts,
                                    const std::vector<double>& p,
                                    double floor) {
  std::vector<Turning> turns;
  const int m = static_cast<int>(p.size());
  for (int i = 1; i + 1 < m; ++i) {
    const bool mx = p[i] >= p[i - 1] && p[i] >= p[i + 1] &&
                    (p[i] > p[i - 1] || p[i] > p[i + 1]);
    const bool mn = p[i] <= p[i - 1] && p[i] <= p[i + 1] &&
                    (p[i] < p[i - 1] || p[i] < p[i + 1]);
    if (!mx && !mn) continue;
    Turning tp;
    tp.is_max = mx;
    const double denom = p[i - 1] - 2.0 * p[i] + p[i + 1];
    double delta = 0.0;
    if (std::fabs(denom) > 1e-300)
      delta = 0.5 * (p[i - 1] - p[i + 1]) / denom;
    delta = std::clamp(delta, -0.5, 0.5);
    tp.t = ts[i] + delta * (ts[std::min(i + 1, m - 1)] - ts[i]);
    tp.v = p[i] - 0.25 * (p[i - 1] - p[i + 1]) * delta;
    turns.push_back(tp);
  }
  // enforce alternation (keep the more extreme of same-type neighbours),
  // then drop adjacent pairs whose swing is below the floor; repeat until
  // stable so noise ripples collapse into the underlying cycle
  auto alternate = [](std::vector<Turning>& v) {
    std::vector<Turning> alt;
    for (const Turning& tp : v) {
      if (!alt.empty() && alt.back().is_max == tp.is_max) {
        if ((tp.is_max && tp.v > alt.back().v) ||
            (!tp.is_max && tp.v < alt.back().v))
          alt.back() = tp;
        continue;
      }
      alt.push_back(tp);
    }
    v = std::move(alt);
  };
  alternate(turns);
  bool changed = true;
  while (changed && turns.size() >= 2) {
    changed = false;
    for (size_t i = 0; i + 1 < turns.size(); ++i) {
      if (std::fabs(turns[i + 1].v - turns[i].v) < floor) {
        turns.erase(turns.begin() + i, turns.begin() + i + 2);
        alternate(turns);
        changed = true;
        break;
      }
    }
  }
  return turns;
}

}  // namespace

Trajectory integrate(const ModelSpec& m, const Grid1D& grid,
                     const Field& history_init, double T, double dt,
                     const IntegrateOptions& opts) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const double h = grid.h();
  if (static_cast<int>(history_init.size()) != n || !all_finite(history_init))
    fail(ErrorCode::InvalidConfig, "integrate: history not finite on the grid");
  if (!(T > 0.0) || !(dt > 0.0))
    fail(ErrorCode::InvalidConfig, "integrate: T and dt must be positive");
  if (!(m.sigma >= 0.0))
    fail(ErrorCode::InvalidConfig, "integrate: negative delay");
  if (!opts.reference_steady.empty() &&
      static_cast<int>(opts.reference_steady.size()) != n)
    fail(ErrorCode::InvalidConfig, "integrate: reference state size mismatch");

  // integer number of steps landing exactly on T
  const long long n_steps =
      std::max<long long>(1, llround(std::ceil(T / dt - 1e-12)));
  const double dte = T / static_cast<double>(n_steps);

  long long stride = opts.sample_stride;
  if (stride <= 0) stride = std::max<long long>(1, n_steps / 32768);

  std::vector<int> probes = opts.probe_nodes;
  if (probes.empty()) probes.push_back(N / 2);
  for (int pn : probes)
    if (pn < 0 || pn > N)
      fail(ErrorCode::InvalidConfig, "integrate: probe node out of range");

  std::vector<double> snap_req = opts.snapshot_times;
  std::sort(snap_req.begin(), snap_req.end());

  // Crank-Nicolson matrix I/dt - (1/2) L_N for the zero-flux Laplacian
  Tridiag<double> lhs(n);
  const double ih2 = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    lhs.diag[i] = 1.0 / dte + ih2;
    if (i > 0) lhs.lower[i] = -0.5 * ih2;
    if (i + 1 < n) lhs.upper[i] = -0.5 * ih2;
  }
  lhs.upper[0] = -ih2;
  lhs.lower[n - 1] = -ih2;
  const TridiagLU<double> lu(lhs);

  HistoryBuffer hist(m.sigma, dte);
  hist.seed(0.0, history_init);

  Trajectory tr;
  tr.probe_nodes = probes;
  tr.probe_series.assign(probes.size(), {});
  const bool have_ref = !opts.reference_steady.empty();
  std::vector<double> dev;  // ||u - ref||_inf at sample times

  Field u = history_init;
  double run_min = *std::min_element(u.begin(), u.end());
  const double blowup =
      opts.blowup_factor * (1.0 + max_abs(history_init) +
                            (have_ref ? max_abs(opts.reference_steady) : 0.0));

  auto record = [&](double t, const Field& v) {
    tr.times.push_back(t);
    tr.mean_u.push_back(integrate(grid, v) / grid.L());
    tr.max_u.push_back(*std::max_element(v.begin(), v.end()));
    for (size_t q = 0; q < probes.size(); ++q)
      tr.probe_series[q].push_back(v[probes[q]]);
    if (have_ref) dev.push_back(max_abs_diff(v, opts.reference_steady));
  };
  record(0.0, u);
  size_t next_snap = 0;

  Field x_prev;
  bool have_prev = false;
  bool diverged = false;
  double t_new = 0.0;

  for (long long step = 1; step <= n_steps; ++step) {
    const double t_cur = (step - 1) * dte;
    t_new = (step == n_steps) ? T : step * dte;

    const Field us = hist.at(t_cur - m.sigma);
    const Bundle bd = explicit_bundle(m, grid, u, us);

    const Field lap = laplacian(grid, u, 0.0, 0.0);
    Field rhs(n);
    if (have_prev) {
      for (int i = 0; i < n; ++i)
        rhs[i] = u[i] / dte + 0.5 * lap[i] + 1.5 * bd.X[i] - 0.5 * x_prev[i];
    } else {
      for (int i = 0; i < n; ++i)
        rhs[i] = u[i] / dte + 0.5 * lap[i] + bd.X[i];
    }
    Field u_new = lu.solve(rhs);
    if (!all_finite(u_new))
      fail(ErrorCode::StepUnstable,
           "integrate: state lost finiteness at t=" + std::to_string(t_new) +
               " (reduce dt)");

    hist.push(t_new, u_new);

    // mass audit: d/dt int u against the flux functional.  The first (Euler)
    // step integrates the left-endpoint bundle exactly, so it is compared at
    // the left endpoint; Adams-Bashforth steps are compared at the midpoint.
    const double lhs_rate = (integrate(grid, u_new) - integrate(grid, u)) / dte;
    double target = bd.flux;
    if (have_prev) {
      const Field us_new = hist.at(t_new - m.sigma);
      target = 0.5 * (bd.flux + flux_functional(m, grid, u_new, us_new));
    }
    tr.mass_defect = std::max(tr.mass_defect, std::fabs(lhs_rate - target));

    run_min = std::min(run_min, *std::min_element(u_new.begin(), u_new.end()));
    const double unorm = max_abs(u_new);

    x_prev = bd.X;
    have_prev = true;
    u = std::move(u_new);

    if (unorm > blowup) {
      diverged = true;
      record(t_new, u);
      break;
    }
    const bool sampled = (step % stride == 0) || step == n_steps;
    if (sampled) record(t_new, u);
    while (next_snap < snap_req.size() && t_new >= snap_req[next_snap] - 1e-12) {
      tr.snapshot_times.push_back(t_new);
      tr.snapshots.push_back(u);
      ++next_snap;
    }
  }

  tr.final_state = u;
  tr.final_time = t_new;
  tr.min_over_run = run_min;

  // --- classification ----------------------------------------------------
  if (diverged) {
    tr.classification = LongTimeBehavior::Diverged;
    return tr;
  }

  // trailing diagnostics window
  const double t_tail = (1.0 - kTailFraction) * tr.final_time;
  size_t k0 = 0;
  while (k0 < tr.times.size() && tr.times[k0] < t_tail) ++k0;
  if (k0 + 2 >= tr.times.size()) k0 = 0;
  const std::vector<double> ts(tr.times.begin() + k0, tr.times.end());
  const std::vector<double> ps(tr.probe_series[0].begin() + k0,
                               tr.probe_series[0].end());

  // convergence against the reference: small terminal distance plus a
  // non-growing deviation envelope over the run
  if (have_ref && !dev.empty()) {
    const double dev_T = dev.back();
    const size_t third = dev.size() / 3;
    double m_head = 0.0, m_tail = 0.0;
    for (size_t i = 0; i < dev.size(); ++i) {
      if (i < third || third == 0) m_head = std::max(m_head, dev[i]);
      if (i >= dev.size() - std::max<size_t>(third, 1))
        m_tail = std::max(m_tail, dev[i]);
    }
    if (dev_T < kConvergedTol && m_tail <= m_head + 1e-12) {
      tr.classification = LongTimeBehavior::ConvergedToSteady;
      return tr;
    }
  }

  // sustained oscillation: trailing peaks with tight cycle amplitudes
  double lo = ps.empty() ? 0.0 : ps[0], hi = lo;
  for (double v : ps) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double swing_floor = 0.01 * (hi - lo) + 1e-12 * (1.0 + std::fabs(hi));
  const std::vector<Turning> turns = turning_points(ts, ps, swing_floor);
  std::vector<double> peak_t, cycle_amp;
  for (size_t i = 0; i + 1 < turns.size(); ++i) {
    if (!turns[i].is_max) continue;
    peak_t.push_back(turns[i].t);
    cycle_amp.push_back(std::fabs(turns[i].v - turns[i + 1].v));
  }
  if (static_cast<int>(peak_t.size()) >= kMinPeaks) {
    // judge the trailing kMinPeaks..8 cycles
    const size_t keep = std::min<size_t>(cycle_amp.size(), 8);
    const size_t from = cycle_amp.size() - keep;
    double a_lo = cycle_amp[from], a_hi = a_lo, a_sum = 0.0;
    for (size_t i = from; i < cycle_amp.size(); ++i) {
      a_lo = std::min(a_lo, cycle_amp[i]);
      a_hi = std::max(a_hi, cycle_amp[i]);
      a_sum += cycle_amp[i];
    }
    const double a_mean = a_sum / keep;
    if (keep >= static_cast<size_t>(kMinPeaks) && a_mean > 0.0 &&
        (a_hi - a_lo) < kAmpSpreadTol * a_mean) {
      double dsum = 0.0;
      const size_t pfrom = peak_t.size() - keep;
      for (size_t i = pfrom + 1; i < peak_t.size(); ++i)
        dsum += peak_t[i] - peak_t[i - 1];
      tr.classification = LongTimeBehavior::SustainedOscillation;
      tr.period = dsum / static_cast<double>(keep - 1);
      tr.amplitude = 0.5 * a_mean;
      return tr;
    }
  }

  // reference-free convergence: flat trailing probe and mean
  if (!have_ref && !ps.empty()) {
    double mlo = tr.mean_u[k0], mhi = mlo;
    for (size_t i = k0; i < tr.mean_u.size(); ++i) {
      mlo = std::min(mlo, tr.mean_u[i]);
      mhi = std::max(mhi, tr.mean_u[i]);
    }
    const double scale = 1.0 + std::fabs(hi) + std::fabs(tr.mean_u.back());
    if (hi - lo < kConvergedTol * scale && mhi - mlo < kConvergedTol * scale) {
      tr.classification = LongTimeBehavior::ConvergedToSteady;
      return tr;
    }
  }

  tr.classification = LongTimeBehavior::Undetermined;
  return tr;
}

double mass_balance_check(const Trajectory& tr) { return tr.mass_defect; }

}  // namespace memdiff
