#include "memdiff/steady.hpp"

#include <cmath>
#include <string>

#include "memdiff/errors.hpp"
#include "memdiff/linalg.hpp"
#include "memdiff/linearization.hpp"

namespace memdiff {

Field steady_residual(const ModelSpec& m, const Grid1D& grid, double lambda,
                      const Field& u) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const double b0 = lambda * m.r0 * m.g(u[0]);
  const double b1 = lambda * m.r1 * m.g(u[N]);

  Field R = laplacian(grid, u, b0, b1);
  if (m.d != 0.0) {
    const GhostPair gh = ghosts_from_flux(grid, u, b0, b1);
    const Field div = memory_flux_divergence(grid, u, u, gh, gh);
    for (int i = 0; i < n; ++i) R[i] += m.d * div[i];
  }
  for (int i = 0; i < n; ++i)
    R[i] += lambda * u[i] * m.f(grid.x(i), u[i]);
  return R;
}

namespace {

bool all_finite(const Field& u) {
  for (double v : u)
    if (!std::isfinite(v)) return false;
  return true;
}

bool dips_negative(const Field& u) {
  double lo = 0.0, hi = 0.0;
  for (double v : u) {
    lo = std::min(lo, v);
    hi = std::max(hi, std::fabs(v));
  }
  return lo < -1e-10 * (1.0 + hi);
}

double inner_phi1(const Grid1D& grid, const Field& phi1, const Field& u) {
  double s = 0.0;
  for (int i = 0; i < grid.nodes(); ++i)
    s += grid.weight(i) * phi1[i] * u[i];
  return s;
}

}  // namespace

SteadyState solve_steady(const ModelSpec& m, const Grid1D& grid, double lambda,
                         const Field& guess, const NewtonOptions& opts) {
  const int n = grid.nodes();
  if (static_cast<int>(guess.size()) != n || !all_finite(guess))
    fail(ErrorCode::InvalidConfig, "steady solve: guess not finite on the grid");

  Field u = guess;
  Field R = steady_residual(m, grid, lambda, u);
  double rn = max_abs(R);
  const double rn0 = rn;
  int it = 0;

  while (rn > opts.tol && it < opts.max_iter) {
    const LinearizedPair lin = assemble_linearization(m, grid, lambda, u);
    const TridiagLU<double> lu(add(lin.A, lin.B));
    Field rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -R[i];
    const Field du = lu.solve(rhs);

    // backtracking on the residual max-norm (factor 0.5, minimum step 1e-4)
    double t = 1.0;
    bool accepted = false;
    Field u_try(n), R_try;
    double rn_try = 0.0;
    while (t >= 1e-4) {
      for (int i = 0; i < n; ++i) u_try[i] = u[i] + t * du[i];
      R_try = steady_residual(m, grid, lambda, u_try);
      rn_try = max_abs(R_try);
      if (std::isfinite(rn_try) &&
          (rn_try <= (1.0 - 1e-4 * t) * rn || rn_try <= opts.tol)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      fail(ErrorCode::NewtonDiverged,
           "steady solve: line search stalled at lambda = " +
               std::to_string(lambda));
    u.swap(u_try);
    R.swap(R_try);
    rn = rn_try;
    ++it;
    if (rn > 1e8 * (1.0 + rn0))
      fail(ErrorCode::NewtonDiverged, "steady solve: residual diverged");
  }
  if (rn > opts.tol)
    fail(ErrorCode::NewtonDiverged,
         "steady solve: residual " + std::to_string(rn) + " above tolerance " +
             std::to_string(opts.tol) + " after " + std::to_string(it) +
             " iterations at lambda = " + std::to_string(lambda));

  SteadyState out;
  out.u_star = std::move(u);
  out.lambda = lambda;
  out.residual_norm = rn;
  out.newton_iterations = it;
  out.negative_solution = opts.require_positive && dips_negative(out.u_star);
  return out;
}

Branch continue_branch_gamma0(const ModelSpec& m, const Grid1D& grid,
                              const EigenPair& eig, const BifCoefficients& co,
                              double lambda_from, double lambda_to, int steps,
                              const NewtonOptions& opts) {
  if (steps < 1)
    fail(ErrorCode::InvalidConfig, "branch: need at least one step");
  const double kappa_scale =
      1e-10 * (1.0 + std::fabs(co.kappa0) + std::fabs(co.kappa1) +
               std::fabs(co.kappa2));
  if (std::fabs(co.kappa) <= kappa_scale)
    fail(ErrorCode::OutOfRegime,
         "branch: kappa vanishes at tolerance scale, the branch folds at "
         "lambda_1; sweep the amplitude instead");

  // the positive branch lives where the predictor amplitude is positive
  if (co.theta_predictor(lambda_from) <= 0.0 ||
      co.theta_predictor(lambda_to) <= 0.0)
    fail(ErrorCode::EmptyBranch,
         "branch: no positive solution on the requested side of lambda_1");

  NewtonOptions o = opts;
  o.require_positive = true;

  Branch br;
  br.origin = BranchOrigin::Gamma0;
  const int n = grid.nodes();
  Field guess(n);
  double theta_prev = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double lam =
        steps == 1 ? lambda_from
                   : lambda_from + (lambda_to - lambda_from) * j / (steps - 1);
    const double theta_pred = co.theta_predictor(lam);
    if (br.points.empty()) {
      for (int i = 0; i < n; ++i) guess[i] = theta_pred * eig.phi1[i];
    } else {
      // warm start: rescale the previous solution to the predicted amplitude
      const Field& prev = br.points.back().u_star;
      const double scale = theta_prev != 0.0 ? theta_pred / theta_prev : 1.0;
      for (int i = 0; i < n; ++i) guess[i] = scale * prev[i];
    }

    SteadyState st;
    try {
      st = solve_steady(m, grid, lam, guess, o);
    } catch (const SolverError& e) {
      if (e.code() == ErrorCode::NewtonDiverged && !br.points.empty())
        break;  // report the interval achieved so far
      throw;
    }
    const double theta = inner_phi1(grid, eig.phi1, st.u_star);
    // guard against collapse onto the trivial line u = 0
    if (st.negative_solution || theta < 0.25 * theta_pred) {
      if (br.points.empty())
        fail(ErrorCode::EmptyBranch,
             "branch: no positive nontrivial solution at the first point");
      break;
    }
    theta_prev = theta_pred;
    br.theta.push_back(theta);
    br.points.push_back(std::move(st));
  }
  return br;
}

Branch sweep_fold_gamma0(const ModelSpec& m, const Grid1D& grid,
                         const EigenPair& eig, const BifCoefficients& co,
                         double theta_from, double theta_to, int steps,
                         const NewtonOptions& opts) {
  if (steps < 1)
    fail(ErrorCode::InvalidConfig, "fold sweep: need at least one step");
  if (std::fabs(co.rho) == 0.0)
    fail(ErrorCode::OutOfRegime, "fold sweep: rho vanishes");
  const int n = grid.nodes();

  std::vector<double> brow(n);
  for (int i = 0; i < n; ++i) brow[i] = grid.weight(i) * eig.phi1[i];

  Branch br;
  br.origin = BranchOrigin::Gamma0;
  Field u(n);
  double lam = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double theta =
        steps == 1 ? theta_from
                   : theta_from + (theta_to - theta_from) * j / (steps - 1);
    if (br.points.empty()) {
      for (int i = 0; i < n; ++i) u[i] = theta * eig.phi1[i];
      // reduced-equation predictor rho (lambda - lambda_1) = -(kappa/2) theta
      //                                                      - (nu/6) theta^2
      lam = co.lambda1 -
            (0.5 * co.kappa * theta + co.nu * theta * theta / 6.0) / co.rho;
    } else {
      const double prev_theta = br.theta.back();
      const double scale = prev_theta != 0.0 ? theta / prev_theta : 1.0;
      for (int i = 0; i < n; ++i) u[i] *= scale;
    }

    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      Field R = steady_residual(m, grid, lam, u);
      double ctheta = inner_phi1(grid, eig.phi1, u);
      if (max_abs(R) <= opts.tol &&
          std::fabs(ctheta - theta) <= 1e-12 * (1.0 + std::fabs(theta))) {
        converged = true;
        break;
      }
      // dR/dlambda by central differences (exact: R is quadratic in lambda)
      const double dl = 1e-6 * (1.0 + std::fabs(lam));
      const Field Rp = steady_residual(m, grid, lam + dl, u);
      const Field Rm = steady_residual(m, grid, lam - dl, u);
      std::vector<double> dRdl(n), rhs(n);
      for (int i = 0; i < n; ++i) {
        dRdl[i] = (Rp[i] - Rm[i]) / (2.0 * dl);
        rhs[i] = -R[i];
      }
      const LinearizedPair lin = assemble_linearization(m, grid, lam, u);
      const TridiagLU<double> lu(add(lin.A, lin.B));
      auto [du, dlam] =
          bordered_solve(lu, dRdl, brow, 0.0, rhs, theta - ctheta);
      for (int i = 0; i < n; ++i) u[i] += du[i];
      lam += dlam;
      if (!all_finite(u) || !std::isfinite(lam))
        fail(ErrorCode::NewtonDiverged, "fold sweep: iterates diverged");
    }
    if (!converged) {
      if (!br.points.empty()) break;
      fail(ErrorCode::NewtonDiverged,
           "fold sweep: no convergence at the first amplitude");
    }
    SteadyState st;
    st.u_star = u;
    st.lambda = lam;
    st.residual_norm = max_abs(steady_residual(m, grid, lam, u));
    st.newton_iterations = opts.max_iter;
    st.negative_solution = opts.require_positive && dips_negative(u);
    br.theta.push_back(theta);
    br.points.push_back(std::move(st));
  }
  return br;
}

Branch continue_branch_gamma1(const ModelSpec& m, const Grid1D& grid,
                              const Gamma1Data& g1, double s_from, double s_to,
                              int steps, const NewtonOptions& opts) {
  if (steps < 1)
    fail(ErrorCode::InvalidConfig, "branch: need at least one step");
  const int n = grid.nodes();

  Branch br;
  br.origin = BranchOrigin::GammaU1;
  Field guess(n);
  double s_prev = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double s =
        steps == 1 ? s_from : s_from + (s_to - s_from) * j / (steps - 1);
    if (br.points.empty()) {
      for (int i = 0; i < n; ++i)
        guess[i] = g1.u1 + s * (g1.eta1 + g1.psi_star[i]);
    } else {
      const Field& prev = br.points.back().u_star;
      for (int i = 0; i < n; ++i)
        guess[i] = prev[i] + (s - s_prev) * (g1.eta1 + g1.psi_star[i]);
    }

    SteadyState st;
    try {
      st = solve_steady(m, grid, s, guess, opts);
    } catch (const SolverError& e) {
      if (e.code() == ErrorCode::NewtonDiverged && !br.points.empty()) break;
      throw;
    }
    Field dev(n);
    for (int i = 0; i < n; ++i) dev[i] = st.u_star[i] - g1.u1;
    br.theta.push_back(integrate(grid, dev) / grid.L());
    br.points.push_back(std::move(st));
    s_prev = s;
  }
  return br;
}

}  // namespace memdiff
