// Command-line front end: parses a JSON run configuration, executes one of
// the toolkit commands, and writes a JSON summary plus CSV artifacts into the
// output directory.  Exit codes: 0 success, 2 validation error, 3 solver
// error, 4 regime error; failures emit a machine-readable JSON object on
// stderr.

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "memdiff/dynamics.hpp"
#include "memdiff/eigenproblem.hpp"
#include "memdiff/errors.hpp"
#include "memdiff/gamma0.hpp"
#include "memdiff/gamma1.hpp"
#include "memdiff/grid.hpp"
#include "memdiff/hopf.hpp"
#include "memdiff/linearization.hpp"
#include "memdiff/model.hpp"
#include "memdiff/spectrum.hpp"
#include "memdiff/steady.hpp"

namespace {

using namespace memdiff;
namespace mcli = memdiff::cli;
using mcli::json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Session {
  mcli::RunConfig cfg;
  Grid1D grid;
  std::vector<std::string> outputs;
  json results;

  json& task() { return cfg.resolved["task"]; }
  std::string path(const std::string& name) const {
    return cfg.out_dir + "/" + name;
  }
  NewtonOptions newton(bool positive) const {
    NewtonOptions o;
    o.tol = cfg.newton_tol;
    o.max_iter = cfg.newton_max_iter;
    o.require_positive = positive;
    return o;
  }
};

double inner_product(const Grid1D& g, const Field& a, const Field& b) {
  double s = 0.0;
  for (int i = 0; i < g.nodes(); ++i) s += g.weight(i) * a[i] * b[i];
  return s;
}

std::string behavior_name(LongTimeBehavior b) {
  switch (b) {
    case LongTimeBehavior::ConvergedToSteady: return "ConvergedToSteady";
    case LongTimeBehavior::SustainedOscillation: return "SustainedOscillation";
    case LongTimeBehavior::Diverged: return "Diverged";
    case LongTimeBehavior::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

void write_field_csv(Session& s, const std::string& name, const Field& u,
                     const char* value_col) {
  std::vector<std::vector<double>> rows;
  rows.reserve(u.size());
  for (int i = 0; i < s.grid.nodes(); ++i)
    rows.push_back({s.grid.x(i), u[i]});
  mcli::write_csv(s.path(name), {"x", value_col}, rows);
  s.outputs.push_back(s.path(name));
}

void write_trajectory_csv(Session& s, const std::string& name,
                          const Trajectory& tr) {
  std::vector<std::string> header = {"t", "mean_u", "max_u"};
  for (int pn : tr.probe_nodes)
    header.push_back("probe_x" + mcli::format_number(s.grid.x(pn)));
  std::vector<std::vector<double>> rows;
  rows.reserve(tr.times.size());
  for (size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<double> row = {tr.times[k], tr.mean_u[k], tr.max_u[k]};
    for (const auto& series : tr.probe_series) row.push_back(series[k]);
    rows.push_back(std::move(row));
  }
  mcli::write_csv(s.path(name), header, rows);
  s.outputs.push_back(s.path(name));
}

struct EigCo {
  EigenPair eig;
  BifCoefficients co;
};

EigCo eig_and_coeffs(const ModelSpec& m, const Grid1D& grid) {
  EigCo ec;
  ec.eig = principal_eigenpair(m, grid);
  ec.co = compute_rho_kappa(m, grid, ec.eig);
  return ec;
}

// Positive small-amplitude steady state at lambda from the branch predictor.
SteadyState predictor_steady(const ModelSpec& m, const Session& s,
                             double lambda, const EigCo& ec) {
  const double th = ec.co.theta_predictor(lambda);
  if (!(th > 0.0))
    fail(ErrorCode::EmptyBranch,
         "no positive small-amplitude state predicted at lambda=" +
             mcli::format_number(lambda) +
             " (the bifurcating branch lives on the other side of lambda1=" +
             mcli::format_number(ec.co.lambda1) + ")");
  Field guess(ec.eig.phi1);
  for (double& v : guess) v *= th;
  return solve_steady(m, s.grid, lambda, guess, s.newton(true));
}

// --- commands ------------------------------------------------------------

void cmd_eigen(Session& s) {
  const auto feas = check_eigen_feasibility(s.cfg.model, s.grid);
  const EigenPair eig = principal_eigenpair(s.cfg.model, s.grid);
  write_field_csv(s, "phi1.csv", eig.phi1, "phi1");
  s.results["lambda1"] = eig.lambda1;
  s.results["residual_norm"] = eig.residual_norm;
  s.results["rayleigh_quotient"] = rayleigh_quotient(s.cfg.model, s.grid, eig.phi1);
  s.results["phi1_at_0"] = eig.phi1.front();
  s.results["phi1_at_L"] = eig.phi1.back();
  s.results["feasibility"] = {{"positive_somewhere", feas.positive_somewhere},
                              {"mean_negative", feas.mean_negative},
                              {"mean_value", feas.mean_value}};
}

void cmd_steady(Session& s) {
  mcli::TaskReader t(s.task());
  const double lambda = t.number("lambda", s.cfg.model.lambda);
  const std::string guess_kind = t.text("guess", "predictor");

  SteadyState st;
  std::optional<EigCo> ec;
  if (guess_kind == "predictor") {
    ec = eig_and_coeffs(s.cfg.model, s.grid);
    st = predictor_steady(s.cfg.model, s, lambda, *ec);
  } else if (guess_kind == "constant") {
    const double v = t.required("guess_value");
    st = solve_steady(s.cfg.model, s.grid, lambda,
                      constant_field(s.grid, v), s.newton(false));
  } else {
    fail(ErrorCode::InvalidConfig,
         "config field task.guess: expected predictor or constant");
  }

  write_field_csv(s, "u_star.csv", st.u_star, "u");
  s.results["lambda"] = st.lambda;
  s.results["residual_norm"] = st.residual_norm;
  s.results["newton_iterations"] = st.newton_iterations;
  s.results["negative_solution"] = st.negative_solution;
  s.results["mean_u"] = integrate(s.grid, st.u_star) / s.grid.L();
  s.results["max_u"] = max_abs(st.u_star);
  if (ec) {
    s.results["lambda1"] = ec->co.lambda1;
    s.results["theta"] = inner_product(s.grid, ec->eig.phi1, st.u_star);
  }
}

void cmd_branch(Session& s) {
  mcli::TaskReader t(s.task());
  const double from = t.required("lambda_from");
  const double to = t.required("lambda_to");
  const int steps = t.integer("steps", 21);
  if (steps < 2)
    fail(ErrorCode::InvalidConfig, "config field task.steps: must be >= 2");

  const EigCo ec = eig_and_coeffs(s.cfg.model, s.grid);
  const Branch br = continue_branch_gamma0(s.cfg.model, s.grid, ec.eig, ec.co,
                                           from, to, steps, s.newton(true));
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < br.points.size(); ++k) {
    const SteadyState& p = br.points[k];
    rows.push_back({p.lambda, br.theta[k],
                    integrate(s.grid, p.u_star) / s.grid.L(),
                    *std::min_element(p.u_star.begin(), p.u_star.end()),
                    *std::max_element(p.u_star.begin(), p.u_star.end()),
                    p.residual_norm, static_cast<double>(p.newton_iterations)});
  }
  mcli::write_csv(s.path("branch.csv"),
                  {"lambda", "theta", "mean_u", "min_u", "max_u",
                   "residual_norm", "newton_iterations"},
                  rows);
  s.outputs.push_back(s.path("branch.csv"));
  s.results["lambda1"] = ec.co.lambda1;
  s.results["points"] = br.points.size();
  s.results["lambda_first"] = br.points.front().lambda;
  s.results["lambda_last"] = br.points.back().lambda;
}

void cmd_coeffs(Session& s) {
  const EigCo ec0 = eig_and_coeffs(s.cfg.model, s.grid);
  const BifCoefficients co = compute_nu(s.cfg.model, s.grid, ec0.eig, ec0.co);
  const double kp = kappa_via_pairing(s.cfg.model, s.grid, ec0.eig);
  double mult = 0.0, resid = 0.0;
  const Field corr =
      solve_sigma_correction(s.cfg.model, s.grid, ec0.eig, &mult, &resid);
  write_field_csv(s, "branch_corrector.csv", corr, "corrector");

  s.results["lambda1"] = co.lambda1;
  s.results["rho"] = co.rho;
  s.results["kappa0"] = co.kappa0;
  s.results["kappa1"] = co.kappa1;
  s.results["kappa2"] = co.kappa2;
  s.results["kappa"] = co.kappa;
  s.results["kappa_via_pairing"] = kp;
  s.results["nu"] = co.nu;
  s.results["t_uu_norm"] = co.t_uu_norm;
  s.results["corrector_multiplier"] = mult;
  s.results["corrector_residual"] = resid;
  try {
    s.results["zero_eigenvalue"] =
        classify_zero_eigenvalue(co) == ZeroEigenvalue::NoZeroEig
            ? "NoZeroEig"
            : "ZeroEig";
  } catch (const SolverError& e) {
    if (e.code() != ErrorCode::Indeterminate) throw;
    s.results["zero_eigenvalue"] = "Indeterminate";
  }
}

void cmd_gamma1(Session& s) {
  mcli::TaskReader t(s.task());
  const ModelSpec& m = s.cfg.model;
  const double lo = t.number("u1_lo", std::max(1e-3, m.u_lo + 1e-3));
  const double hi = t.number("u1_hi", m.u_hi);
  const int scan = t.integer("scan", 64);
  const auto roots = find_u1_roots(m, s.grid, lo, hi, scan);
  const int idx = t.integer("root_index", 0);
  if (idx < 0 || idx >= static_cast<int>(roots.size()))
    fail(ErrorCode::InvalidConfig,
         "config field task.root_index: out of range (found " +
             std::to_string(roots.size()) + " roots)");
  const double u1 = roots[idx];
  const Gamma1Data g1 = compute_eta1(m, s.grid, u1);
  write_field_csv(s, "psi_star.csv", g1.psi_star, "psi");

  const double s_from = t.number("s_from", -0.05);
  const double s_to = t.number("s_to", 0.05);
  const int steps = t.integer("steps", 11);
  if (steps < 2)
    fail(ErrorCode::InvalidConfig, "config field task.steps: must be >= 2");
  const Branch br = continue_branch_gamma1(m, s.grid, g1, s_from, s_to, steps,
                                           s.newton(false));
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < br.points.size(); ++k) {
    const SteadyState& p = br.points[k];
    rows.push_back({p.lambda, br.theta[k],
                    integrate(s.grid, p.u_star) / s.grid.L(),
                    p.residual_norm, static_cast<double>(p.newton_iterations)});
  }
  mcli::write_csv(
      s.path("gamma1_branch.csv"),
      {"lambda", "theta", "mean_u", "residual_norm", "newton_iterations"},
      rows);
  s.outputs.push_back(s.path("gamma1_branch.csv"));

  s.results["roots"] = roots;
  s.results["u1"] = u1;
  s.results["eta1"] = g1.eta1;
  s.results["zeta_star"] = g1.zeta_star;
  s.results["xi_star"] = g1.xi_star;
  s.results["pairing_lu1"] = g1.pairing_lu1;
  s.results["a1_residual"] = g1.a1_residual;
  auto stability_label = [&](double sv) -> std::string {
    try {
      return classify_gamma1_stability(m, s.grid, g1, sv) ==
                     Gamma1Stability::Stable
                 ? "Stable"
                 : "Unstable";
    } catch (const SolverError& e) {
      return to_string(e.code());
    }
  };
  s.results["stability_at_s_from"] = stability_label(s_from);
  s.results["stability_at_s_to"] = stability_label(s_to);
}

void cmd_hopf(Session& s) {
  mcli::TaskReader t(s.task());
  const double lambda = t.number("lambda", s.cfg.model.lambda);
  const int n_max = t.integer("n_max", 3);
  const EigCo ec = eig_and_coeffs(s.cfg.model, s.grid);

  const bool possible = hopf_condition(ec.co);
  const double th = ec.co.theta_predictor(lambda);
  s.results["lambda1"] = ec.co.lambda1;
  s.results["hopf_possible"] = possible;
  s.results["theta_amplitude"] = th;
  if (!possible) return;
  try {
    const HopfData hd = crossing_data(ec.co, th, n_max);
    s.results["delta_star"] = hd.delta_star;
    s.results["theta_star"] = hd.theta_star;
    s.results["omega"] = hd.omega;
    s.results["transversality_sign"] = hd.transversality_sign;
    s.results["xi_limit_re"] = hd.xi_limit.real();
    s.results["xi_limit_im"] = hd.xi_limit.imag();
    std::vector<std::vector<double>> rows;
    for (size_t n = 0; n < hd.sigma_ladder.size(); ++n)
      rows.push_back({static_cast<double>(n), hd.sigma_ladder[n]});
    mcli::write_csv(s.path("sigma_ladder.csv"), {"n", "sigma_n"}, rows);
    s.outputs.push_back(s.path("sigma_ladder.csv"));
  } catch (const SolverError& e) {
    if (e.code() != ErrorCode::OutOfRegime) throw;
    // boundary case 4 kappa0 = kappa: crossings exist but the closed forms
    // degenerate; report the condition without a ladder
    s.results["degenerate_boundary_case"] = true;
  }
}

void cmd_spectrum(Session& s) {
  mcli::TaskReader t(s.task());
  const double lambda = t.number("lambda", s.cfg.model.lambda);
  const double sigma = t.number("sigma", s.cfg.model.sigma);
  if (sigma < 0.0)
    fail(ErrorCode::InvalidConfig, "config field task.sigma: must be >= 0");

  const EigCo ec = eig_and_coeffs(s.cfg.model, s.grid);
  const SteadyState st = predictor_steady(s.cfg.model, s, lambda, ec);
  const LinearizedPair pair =
      assemble_linearization(s.cfg.model, s.grid, lambda, st.u_star);

  const SpectrumResult free = delay_free_spectrum(pair);
  std::vector<std::vector<double>> rows;
  for (const Complex& mu : free.eigenvalues)
    rows.push_back({mu.real(), mu.imag()});
  mcli::write_csv(s.path("delay_free_eigenvalues.csv"), {"re", "im"}, rows);
  s.outputs.push_back(s.path("delay_free_eigenvalues.csv"));

  const int count =
      sigma == 0.0 ? free.unstable_count : right_halfplane_count(pair, sigma);
  s.results["lambda"] = lambda;
  s.results["sigma"] = sigma;
  s.results["unstable_count"] = count;
  s.results["delay_free_unstable_count"] = free.unstable_count;
  s.results["delay_free_rightmost_re"] = free.eigenvalues.front().real();
  s.results["delay_free_rightmost_im"] = free.eigenvalues.front().imag();
  s.results["steady_residual_norm"] = st.residual_norm;
}

void run_sweep(Session& s, const LinearizedPair& pair, double sigma_max,
               int steps, const SweepOptions& so, const std::string& csv_name,
               json* crossings_out) {
  std::vector<double> sg(steps);
  for (int k = 0; k < steps; ++k)
    sg[k] = sigma_max * static_cast<double>(k) / (steps - 1);
  const auto res = continue_in_sigma(pair, s.grid, sg, so);
  unstable_count_profile(res);  // enforces the +2 jump rule

  std::vector<std::vector<double>> rows;
  json crossings = json::array();
  for (const SpectrumResult& r : res) {
    const double rre = r.eigenvalues.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : r.eigenvalues.front().real();
    const double rim = r.eigenvalues.empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : r.eigenvalues.front().imag();
    rows.push_back({r.sigma, static_cast<double>(r.unstable_count), rre, rim});
    if (r.crossing_sigma) {
      json c;
      c["sigma"] = *r.crossing_sigma;
      c["omega"] = r.crossing_omega.value_or(0.0);
      if (r.dmu_dsigma) {
        c["dmu_dsigma_re"] = r.dmu_dsigma->real();
        c["dmu_dsigma_im"] = r.dmu_dsigma->imag();
      }
      crossings.push_back(c);
    }
  }
  mcli::write_csv(s.path(csv_name),
                  {"sigma", "unstable_count", "rightmost_re", "rightmost_im"},
                  rows);
  s.outputs.push_back(s.path(csv_name));

  std::vector<std::vector<double>> crows;
  for (const auto& c : crossings)
    crows.push_back({c["sigma"].get<double>(), c["omega"].get<double>(),
                     c.value("dmu_dsigma_re", 0.0),
                     c.value("dmu_dsigma_im", 0.0)});
  mcli::write_csv(s.path("crossings.csv"),
                  {"sigma", "omega", "dmu_dsigma_re", "dmu_dsigma_im"}, crows);
  s.outputs.push_back(s.path("crossings.csv"));
  if (crossings_out) *crossings_out = crossings;
}

void cmd_sweep_sigma(Session& s) {
  mcli::TaskReader t(s.task());
  const double lambda = t.number("lambda", s.cfg.model.lambda);
  const double sigma_max = t.required("sigma_max");
  const int steps = t.integer("steps", 25);
  if (!(sigma_max > 0.0))
    fail(ErrorCode::InvalidConfig, "config field task.sigma_max: must be > 0");
  if (steps < 2)
    fail(ErrorCode::InvalidConfig, "config field task.steps: must be >= 2");
  SweepOptions so;
  so.track_k = t.integer("track_k", so.track_k);
  so.crossing_tol = t.number("crossing_tol", so.crossing_tol);
  so.guard_every = t.integer("guard_every", so.guard_every);
  so.max_newton = t.integer("max_newton", so.max_newton);

  const EigCo ec = eig_and_coeffs(s.cfg.model, s.grid);
  const SteadyState st = predictor_steady(s.cfg.model, s, lambda, ec);
  const LinearizedPair pair =
      assemble_linearization(s.cfg.model, s.grid, lambda, st.u_star);

  json crossings;
  run_sweep(s, pair, sigma_max, steps, so, "sweep.csv", &crossings);
  s.results["lambda"] = lambda;
  s.results["crossings"] = crossings;
}

void cmd_simulate(Session& s) {
  mcli::TaskReader t(s.task());
  ModelSpec m = s.cfg.model;
  m.lambda = t.number("lambda", m.lambda);
  m.sigma = t.number("sigma", m.sigma);
  if (m.sigma < 0.0)
    fail(ErrorCode::InvalidConfig, "config field task.sigma: must be >= 0");
  const double T = t.required("T");
  if (!(T > 0.0))
    fail(ErrorCode::InvalidConfig, "config field task.T: must be > 0");
  const double dt = t.number("dt", default_time_step(m, s.grid, T));
  if (!(dt > 0.0))
    fail(ErrorCode::InvalidConfig, "config field task.dt: must be > 0");

  IntegrateOptions io;
  io.sample_stride = t.integer("sample_stride", 0);
  if (s.task().contains("snapshot_times"))
    for (const auto& v : s.task()["snapshot_times"])
      io.snapshot_times.push_back(v.get<double>());
  if (s.task().contains("probe_nodes"))
    for (const auto& v : s.task()["probe_nodes"])
      io.probe_nodes.push_back(v.get<int>());

  Field init;
  const std::string history = t.text("history", "steady_plus_mode");
  if (history == "steady_plus_mode") {
    const double amp = t.number("perturbation", 1e-3);
    const EigCo ec = eig_and_coeffs(m, s.grid);
    const SteadyState st = predictor_steady(m, s, m.lambda, ec);
    init = st.u_star;
    for (int i = 0; i < s.grid.nodes(); ++i) init[i] += amp * ec.eig.phi1[i];
    io.reference_steady = st.u_star;
    s.results["steady_residual_norm"] = st.residual_norm;
  } else if (history == "constant") {
    init = constant_field(s.grid, t.required("history_value"));
  } else {
    fail(ErrorCode::InvalidConfig,
         "config field task.history: expected steady_plus_mode or constant");
  }

  const Trajectory tr = integrate(m, s.grid, init, T, dt, io);
  write_trajectory_csv(s, "trajectory.csv", tr);
  for (size_t k = 0; k < tr.snapshots.size(); ++k)
    write_field_csv(s, "snapshot_" + std::to_string(k) + ".csv",
                    tr.snapshots[k], "u");

  s.results["classification"] = behavior_name(tr.classification);
  s.results["period"] = tr.period;
  s.results["amplitude"] = tr.amplitude;
  s.results["mass_defect"] = mass_balance_check(tr);
  s.results["min_over_run"] = tr.min_over_run;
  s.results["final_time"] = tr.final_time;
  s.results["dt"] = dt;
  if (!io.reference_steady.empty())
    s.results["final_deviation"] =
        max_abs_diff(tr.final_state, io.reference_steady);
}

void cmd_reproduce(Session& s) {
  mcli::TaskReader t(s.task());
  const std::string scenario = t.text("scenario", "hopf-switch");
  if (scenario != "hopf-switch")
    fail(ErrorCode::InvalidConfig,
         "config field task.scenario: unknown scenario '" + scenario + "'");

  ModelSpec m = s.cfg.model;
  m.lambda = t.number("lambda", m.lambda);
  const EigCo ec = eig_and_coeffs(m, s.grid);
  const double th = ec.co.theta_predictor(m.lambda);
  const HopfData hd = crossing_data(ec.co, th, 1);
  const double sigma0 = hd.sigma_ladder.front();
  const double period_pred = kTwoPi / hd.omega;

  // sigma sweep across the first rung
  const SteadyState st = predictor_steady(m, s, m.lambda, ec);
  const LinearizedPair pair =
      assemble_linearization(m, s.grid, m.lambda, st.u_star);
  SweepOptions so;
  so.track_k = t.integer("track_k", so.track_k);
  so.guard_every = t.integer("guard_every", so.guard_every);
  const double sigma_max = t.number("sigma_max", 1.25 * sigma0);
  const int sweep_steps = t.integer("sweep_steps", 21);
  json crossings;
  run_sweep(s, pair, sigma_max, sweep_steps, so, "sweep.csv", &crossings);

  // two simulations bracketing the predicted first rung
  const double amp = t.number("perturbation", 1e-3);
  const double T = t.number("T", 40.0 * period_pred);
  Field init = st.u_star;
  for (int i = 0; i < s.grid.nodes(); ++i) init[i] += amp * ec.eig.phi1[i];

  ModelSpec m_below = m, m_above = m;
  m_below.sigma = t.number("sigma_below", 0.9 * sigma0);
  m_above.sigma = t.number("sigma_above", 1.1 * sigma0);
  IntegrateOptions io;
  io.reference_steady = st.u_star;
  const double dt_below =
      t.number("dt", default_time_step(m_below, s.grid, T));
  const double dt_above = t.has("dt") ? dt_below
                                      : default_time_step(m_above, s.grid, T);

  Trajectory below, above;
  if (s.cfg.threads >= 2) {
    std::exception_ptr ep_below, ep_above;
    std::thread tb([&] {
      try {
        below = integrate(m_below, s.grid, init, T, dt_below, io);
      } catch (...) {
        ep_below = std::current_exception();
      }
    });
    std::thread ta([&] {
      try {
        above = integrate(m_above, s.grid, init, T, dt_above, io);
      } catch (...) {
        ep_above = std::current_exception();
      }
    });
    tb.join();
    ta.join();
    if (ep_below) std::rethrow_exception(ep_below);
    if (ep_above) std::rethrow_exception(ep_above);
  } else {
    below = integrate(m_below, s.grid, init, T, dt_below, io);
    above = integrate(m_above, s.grid, init, T, dt_above, io);
  }
  write_trajectory_csv(s, "trajectory_below.csv", below);
  write_trajectory_csv(s, "trajectory_above.csv", above);

  auto label = [](LongTimeBehavior b) -> std::string {
    if (b == LongTimeBehavior::ConvergedToSteady) return "Stable";
    if (b == LongTimeBehavior::SustainedOscillation) return "Oscillating";
    return behavior_name(b);
  };
  s.results["lambda"] = m.lambda;
  s.results["lambda1"] = ec.co.lambda1;
  s.results["sigma0_predicted"] = sigma0;
  s.results["omega_predicted"] = hd.omega;
  s.results["period_predicted"] = period_pred;
  s.results["crossings"] = crossings;
  s.results["below"] = {{"sigma", m_below.sigma},
                        {"classification", behavior_name(below.classification)},
                        {"label", label(below.classification)},
                        {"final_deviation",
                         max_abs_diff(below.final_state, st.u_star)}};
  s.results["above"] = {{"sigma", m_above.sigma},
                        {"classification", behavior_name(above.classification)},
                        {"label", label(above.classification)},
                        {"period", above.period},
                        {"amplitude", above.amplitude}};
}

void dispatch(Session& s) {
  const std::string& c = s.cfg.command;
  if (c == "eigen") return cmd_eigen(s);
  if (c == "steady") return cmd_steady(s);
  if (c == "branch") return cmd_branch(s);
  if (c == "coeffs") return cmd_coeffs(s);
  if (c == "gamma1") return cmd_gamma1(s);
  if (c == "hopf") return cmd_hopf(s);
  if (c == "spectrum") return cmd_spectrum(s);
  if (c == "sweep-sigma") return cmd_sweep_sigma(s);
  if (c == "simulate") return cmd_simulate(s);
  if (c == "reproduce") return cmd_reproduce(s);
  fail(ErrorCode::InvalidConfig, "unknown command: " + c);
}

int exit_code(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Solver: return 3;
    case ErrorCategory::Regime: return 4;
  }
  return 3;
}

void print_error(const std::string& code, const std::string& category,
                 const std::string& message) {
  json e;
  e["error"] = {{"code", code}, {"category", category}, {"message", message}};
  std::cerr << e.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memdiff: numerical toolkit for a memory-delay "
               "reaction-diffusion model with nonlinear boundary flux"};
  std::string command, config_path, out_dir;
  int threads = 1;
  app.add_option("command", command,
                 "one of: eigen steady branch coeffs gamma1 hopf spectrum "
                 "sweep-sigma simulate reproduce")
      ->required();
  app.add_option("--config", config_path, "path to the JSON run configuration")
      ->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker threads for independent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("InvalidConfig", "Validation", e.what());
    return 2;
  }

  try {
    mcli::RunConfig cfg = mcli::load_config(command, config_path, out_dir, threads);
    const Grid1D grid(cfg.L, cfg.N);
    Session s{std::move(cfg), grid, {}, json::object()};
    dispatch(s);
    mcli::write_summary(s.cfg, s.results, s.outputs);
    std::cout << s.results.dump(2) << std::endl;
    return 0;
  } catch (const SolverError& e) {
    const ErrorCategory cat = e.error_category();
    const char* cname = cat == ErrorCategory::Validation ? "Validation"
                        : cat == ErrorCategory::Solver   ? "Solver"
                                                         : "Regime";
    print_error(to_string(e.code()), cname, e.what());
    return exit_code(cat);
  } catch (const std::exception& e) {
    print_error("Internal", "Solver", e.what());
    return 3;
  }
}
