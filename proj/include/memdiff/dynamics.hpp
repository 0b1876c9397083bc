#pragma once
// Time integration of the delayed model
//
//   u_t = Laplacian(u) + d * div(u * grad u_sigma) + lambda * u * f(x, u),
//   dn u = lambda * r * g(u) at both ends,   u_sigma(x,t) = u(x, t - sigma),
//
// by method of lines on the shared grid.  The splitting treats the plain
// Laplacian implicitly with trapezoidal (Crank-Nicolson) weights and
// everything else explicitly: the memory flux d*div(u grad u_sigma), the
// reaction lambda*u*f, and the boundary-condition lifts (the 2b/h end-row
// contributions of the Neumann ghosts, with b = lambda*r*g(u) evaluated from
// known states).  The explicit bundle is advanced with a two-step
// Adams-Bashforth extrapolation (3/2 X^n - 1/2 X^{n-1}), which keeps the
// overall scheme second order in dt; the very first step uses forward Euler
// for the bundle.  The implicit matrix I/dt - (1/2) L_N (L_N = zero-flux
// Laplacian) is constant and factored once per run.
//
// The delayed field is served by a HistoryBuffer: a ring of (time, field)
// snapshots spanning at least [t - sigma, t], looked up by linear
// interpolation in time.  Snapshots are normally stored every step; when
// sigma/dt would exceed the ring capacity, every k-th step is stored instead
// (interpolation error grows from dt^2 to (k dt)^2, which the default step
// policy keeps harmless).
//
// Each run is audited: per step, the time derivative of the discrete mass
// int u dx is compared against the flux functional
//   F = lambda (r0 g(u(0)) + r1 g(u(L)))                     [boundary flux]
//     + d (u(0) lambda r0 g(us(0)) + u(L) lambda r1 g(us(L)))[memory flux]
//     + lambda int u f(x,u) dx,                              [reaction]
// the discrete analogue of integrating the equation over the domain.  The
// defect is O(dt^2 + h^2) (exactly zero on the zero solution) because the
// zero-flux Laplacian telescopes to zero mass exactly and the conservative
// memory stencil matches the end-point flux to O(h^2).

#include <deque>
#include <vector>

#include "memdiff/grid.hpp"
#include "memdiff/model.hpp"

namespace memdiff {

// --- delay history -------------------------------------------------------

class HistoryBuffer {
 public:
  // Ring sized for delay `sigma` sampled at step `dt`; stores every
  // `stride()`-th pushed snapshot where the stride is the smallest integer
  // keeping the live window within `max_snapshots`.
  HistoryBuffer(double sigma, double dt, int max_snapshots = 16384);

  // Install the constant pre-history u(x,t) = u for t in [t0 - sigma, t0].
  void seed(double t0, const Field& u);

  // Offer the accepted state at time t (strictly increasing); the buffer
  // decides whether to retain it and prunes snapshots older than the span
  // needed for lookups at t - sigma.
  void push(double t, const Field& u);

  // Linearly interpolated field at time t; t must lie inside the retained
  // span.  Falling outside is an internal stepping bug, reported as
  // HistoryUnderrun.
  Field at(double t) const;

  int stride() const { return stride_; }
  int size() const { return static_cast<int>(times_.size()); }

 private:
  double sigma_;
  double dt_;
  int stride_;
  std::deque<double> times_;  // strictly increasing
  std::deque<Field> fields_;
  long long pushes_ = 0;
  // the newest push is always retained so lookups reach the current time;
  // when it is not a stride-multiple it is replaced by the next push
  bool newest_provisional_ = false;
};

// --- trajectory ----------------------------------------------------------

enum class LongTimeBehavior {
  ConvergedToSteady,     // ||u(T) - u*||_inf < 1e-5 with a decaying envelope
  SustainedOscillation,  // >= 5 trailing peaks, cycle amplitude spread < 5%
  Diverged,              // max|u| passed the blow-up threshold (run stopped)
  Undetermined,
};

struct Trajectory {
  std::vector<double> times;               // sample times (always include T)
  std::vector<double> mean_u;              // (int u dx) / L
  std::vector<double> max_u;               // max_i u_i
  std::vector<int> probe_nodes;            // node indices of the probes
  std::vector<std::vector<double>> probe_series;  // [probe][sample]
  Field final_state;
  double final_time = 0.0;

  LongTimeBehavior classification = LongTimeBehavior::Undetermined;
  double period = 0.0;     // averaged refined peak-to-peak time (oscillating)
  double amplitude = 0.0;  // half the mean peak-to-trough probe swing

  double mass_defect = 0.0;   // max per-step mass-balance defect of the run
  double min_over_run = 0.0;  // min_i u_i over every accepted step

  std::vector<double> snapshot_times;  // realised (first sample >= requested)
  std::vector<Field> snapshots;
};

struct IntegrateOptions {
  // Reference state for the convergence test; empty disables the comparison
  // and convergence is then judged from the flatness of the trailing window.
  Field reference_steady;
  // Store every k-th step in the trajectory series; 0 picks k so that about
  // 32768 samples survive.  The final step is always stored.
  int sample_stride = 0;
  // Probe nodes for the time series; empty means the single midpoint node.
  std::vector<int> probe_nodes;
  // Field snapshots are copied at the first accepted step >= each time.
  std::vector<double> snapshot_times;
  // max|u| beyond this (relative to the initial scale) classifies Diverged
  // and stops the run.
  double blowup_factor = 1e8;
};

// Default step: min(h^2/4, sigma/64) capped at 1e-3 * T — the first bound is
// the explicit memory-flux stability limit, the second resolves the history,
// the cap guarantees at least a thousand steps per run.
double default_time_step(const ModelSpec& m, const Grid1D& grid, double T);

// March the delayed equation from the constant history u = history_init on
// [-sigma, 0] up to time T with fixed step dt.  Throws StepUnstable when the
// state stops being finite (step too large), HistoryUnderrun on an internal
// history-window bug, InvalidConfig on malformed arguments.
Trajectory integrate(const ModelSpec& m, const Grid1D& grid,
                     const Field& history_init, double T, double dt,
                     const IntegrateOptions& opts = {});

// Max per-step mass-balance defect recorded by the run audit (always on).
double mass_balance_check(const Trajectory& tr);

}  // namespace memdiff
