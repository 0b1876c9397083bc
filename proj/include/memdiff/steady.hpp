#pragma once
// Steady states and branch continuation.
//
// The steady problem reads
//
//   0 = Laplacian(u) + d div(u grad u) + lambda u f(x, u)   on the nodes,
//   dn u = lambda r g(u)                                    at the two ends,
//
// with the flux law eliminated through ghost nodes, so the residual lives on
// all N+1 nodes of the grid.  Solutions are found by damped Newton with the
// analytically assembled tridiagonal Jacobian (instantaneous + memory parts
// of the linearisation, which sum to the exact steady Jacobian).
//
// Two nontrivial branches are continued:
//  * through (u = 0, lambda_1): natural continuation in lambda with the
//    kernel-amplitude predictor theta_lambda = 2 rho (lambda_1 - lambda)/kappa
//    (requires kappa != 0; the positive branch exists where theta_lambda > 0);
//    when kappa = 0 the branch folds at lambda_1 and is swept in the amplitude
//    theta instead, solving for (u, lambda) jointly under the constraint
//    <phi1, u> = theta;
//  * through (u = u1, lambda = 0): natural continuation in s = lambda with the
//    tangent predictor u = u1 + s (eta1 + psi*).

#include <vector>

#include "memdiff/eigenproblem.hpp"
#include "memdiff/gamma0.hpp"
#include "memdiff/gamma1.hpp"
#include "memdiff/grid.hpp"
#include "memdiff/model.hpp"

namespace memdiff {

// Residual of the discrete steady problem at (u, lambda), boundary rows
// included via ghost elimination.
Field steady_residual(const ModelSpec& m, const Grid1D& grid, double lambda,
                      const Field& u);

struct NewtonOptions {
  double tol = 1e-11;  // max-norm residual target
  int max_iter = 50;
  bool require_positive = false;  // flag solutions dipping below zero
};

struct SteadyState {
  Field u_star;
  double lambda = 0.0;
  double residual_norm = 0.0;
  int newton_iterations = 0;
  // set when positivity was requested and min u < -1e-10 (1 + max |u|)
  bool negative_solution = false;
};

// Damped Newton from `guess`: backtracking factor 0.5 on the residual
// max-norm, minimum step 1e-4, at most opts.max_iter iterations.  Throws
// NewtonDiverged when the line search stalls, the residual blows up, or the
// iteration budget is exhausted above tolerance.
SteadyState solve_steady(const ModelSpec& m, const Grid1D& grid, double lambda,
                         const Field& guess, const NewtonOptions& opts = {});

enum class BranchOrigin { Gamma0, GammaU1 };

struct Branch {
  std::vector<SteadyState> points;  // lambda strictly monotone
  BranchOrigin origin = BranchOrigin::Gamma0;
  // kernel coordinate per point: <u*, phi1> for Gamma0 branches,
  // mean(u* - u1) for GammaU1 branches
  std::vector<double> theta;
};

// Positive branch through (0, lambda_1), kappa != 0 regime.  Marches lambda
// linearly from lambda_from to lambda_to in `steps` points, predictor
// theta_lambda phi1 at the first point and amplitude-rescaled warm starts
// afterwards.  Throws EmptyBranch when the requested window lies on the side
// of lambda_1 where the predictor amplitude is negative (no positive
// solution there), and OutOfRegime when kappa vanishes at tolerance scale
// (use sweep_fold_gamma0).  Stops early, returning the points achieved, when
// Newton fails or positivity breaks beyond the first point.
Branch continue_branch_gamma0(const ModelSpec& m, const Grid1D& grid,
                              const EigenPair& eig, const BifCoefficients& co,
                              double lambda_from, double lambda_to, int steps,
                              const NewtonOptions& opts = {});

// Fold sweep for the kappa = 0 case: the amplitude theta is the parameter and
// (u, lambda) solve jointly { R(u, lambda) = 0, <phi1, u> = theta } by a
// bordered Newton iteration (lambda-derivative of the residual by central
// differences, which is exact because the residual is quadratic in lambda).
Branch sweep_fold_gamma0(const ModelSpec& m, const Grid1D& grid,
                         const EigenPair& eig, const BifCoefficients& co,
                         double theta_from, double theta_to, int steps,
                         const NewtonOptions& opts = {});

// Branch through (u1, 0): lambda = s, predictor u = u1 + s (eta1 + psi*).
Branch continue_branch_gamma1(const ModelSpec& m, const Grid1D& grid,
                              const Gamma1Data& g1, double s_from, double s_to,
                              int steps, const NewtonOptions& opts = {});

}  // namespace memdiff
