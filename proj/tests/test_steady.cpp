// Steady-state solver and branch continuation tests: residual identities,
// analytic Jacobian vs dense finite differences, Newton behaviour on both
// sides of lambda_1, branch marching, and the fold sweep used when the
// quadratic branch coefficient vanishes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "memdiff/errors.hpp"
#include "memdiff/gamma0.hpp"
#include "memdiff/linearization.hpp"
#include "memdiff/steady.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace memdiff;

namespace {

double kernel_amplitude(const Grid1D& g, const Field& phi1, const Field& u) {
  double s = 0.0;
  for (int i = 0; i < g.nodes(); ++i) s += g.weight(i) * phi1[i] * u[i];
  return s;
}

// Logistic profile with d = 0 and the quadratic boundary reaction: the
// boundary weight drops out of the eigenproblem (g'(0) = 0), so r can be
// tuned to cancel kappa = 2 kappa1 + kappa2 without moving (lambda_1, phi_1).
ModelSpec kappa_null_model(const Grid1D& g, double* lambda1_out = nullptr) {
  ModelSpec m = make_logistic_heterogeneous(
      Expr::cosine(1.0, 1) + Expr::constant(-0.2), 1.0, -1.0, -1.0,
      /*d=*/0.0, /*lambda=*/4.5, /*sigma=*/0.0);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients c0 = compute_rho_kappa(m, g, e);
  // kappa = 2 kappa1 + lambda_1 g''(0) r (phi(0)^3 + phi(L)^3) with g'' = 2
  const double denom =
      2.0 * e.lambda1 *
      (std::pow(e.phi1.front(), 3) + std::pow(e.phi1.back(), 3));
  const double r_star = -2.0 * c0.kappa1 / denom;
  if (lambda1_out) *lambda1_out = e.lambda1;
  return make_logistic_heterogeneous(Expr::cosine(1.0, 1) + Expr::constant(-0.2),
                                     1.0, r_star, r_star, 0.0, 4.5, 0.0);
}

}  // namespace

TEST_CASE("the zero field is an exact steady state") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 64);
  const Field r = steady_residual(m, g, 5.0, zero_field(g));
  CHECK(max_abs(r) == 0.0);
}

TEST_CASE("assembled linearization matches a dense finite-difference Jacobian") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 32);
  const double lambda = 4.5;
  // smooth positive state, not a steady solution (the identity is pointwise
  // in u, no need to sit on the branch)
  Field u(g.nodes());
  for (int i = 0; i < g.nodes(); ++i)
    u[i] = 0.12 + 0.05 * std::cos(M_PI * g.x(i)) + 0.02 * g.x(i);

  const LinearizedPair lin = assemble_linearization(m, g, lambda, u);
  const auto fd = oracles::fd_steady_jacobian(m, g, lambda, u);

  const int n = g.nodes();
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::fabs(fd(i, j)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double a = 0.0;
      if (j == i) a = lin.A.diag[i] + lin.B.diag[i];
      else if (j == i - 1) a = lin.A.lower[i] + lin.B.lower[i];
      else if (j == i + 1) a = lin.A.upper[i] + lin.B.upper[i];
      CHECK(std::fabs(a - fd(i, j)) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("positive steady state just above lambda_1") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients co =
      compute_nu(m, g, e, compute_rho_kappa(m, g, e));

  const double lambda = 1.05 * e.lambda1;
  const double th = co.theta_predictor(lambda);
  REQUIRE(th > 0.0);
  Field guess(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) guess[i] = th * e.phi1[i];

  NewtonOptions opts;
  opts.require_positive = true;
  const SteadyState s = solve_steady(m, g, lambda, guess, opts);
  CHECK(s.residual_norm <= 1e-11);
  CHECK_FALSE(s.negative_solution);
  for (double v : s.u_star) CHECK(v > 0.0);
  // kernel amplitude agrees with the first-order predictor
  const double th_meas = kernel_amplitude(g, e.phi1, s.u_star);
  CHECK(std::fabs(th_meas - th) <= 0.15 * std::fabs(th));
}

TEST_CASE("newton reports failure when the iteration budget is too small") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 64);
  NewtonOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  const Field guess = constant_field(g, 0.5);
  CHECK_THROWS_AS(solve_steady(m, g, 1.05 * 4.2425, guess, opts), SolverError);
  try {
    solve_steady(m, g, 1.05 * 4.2425, guess, opts);
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::NewtonDiverged);
  }
}

TEST_CASE("below lambda_1 the signed predictor lands on the negative branch") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients co = compute_rho_kappa(m, g, e);

  const double lambda = 0.95 * e.lambda1;
  const double th = co.theta_predictor(lambda);
  REQUIRE(th < 0.0);
  Field guess(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) guess[i] = th * e.phi1[i];

  NewtonOptions opts;
  opts.require_positive = true;
  const SteadyState s = solve_steady(m, g, lambda, guess, opts);
  CHECK(s.residual_norm <= 1e-11);
  CHECK(s.negative_solution);
  double mean = 0.0;
  for (int i = 0; i < g.nodes(); ++i) mean += g.weight(i) * s.u_star[i];
  CHECK(mean < 0.0);
}

TEST_CASE("branch continuation above lambda_1") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients co = compute_rho_kappa(m, g, e);

  const Branch br = continue_branch_gamma0(m, g, e, co, 1.005 * e.lambda1,
                                           1.1 * e.lambda1, 11);
  REQUIRE(br.points.size() == 11);
  REQUIRE(br.theta.size() == 11);
  CHECK(br.origin == BranchOrigin::Gamma0);
  for (std::size_t k = 0; k < br.points.size(); ++k) {
    const SteadyState& p = br.points[k];
    CHECK(p.residual_norm <= 1e-11);
    for (double v : p.u_star) CHECK(v > 0.0);
    CHECK(br.theta[k] ==
          doctest::Approx(kernel_amplitude(g, e.phi1, p.u_star))
              .epsilon(1e-12));
    if (k > 0) {
      CHECK(br.points[k].lambda > br.points[k - 1].lambda);
      CHECK(br.theta[k] > br.theta[k - 1]);  // amplitude grows with the offset
    }
  }
}

TEST_CASE("branch continuation refuses a window on the negative side") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients co = compute_rho_kappa(m, g, e);
  CHECK_THROWS_AS(continue_branch_gamma0(m, g, e, co, 0.90 * e.lambda1,
                                         0.95 * e.lambda1, 6),
                  SolverError);
  try {
    continue_branch_gamma0(m, g, e, co, 0.90 * e.lambda1, 0.95 * e.lambda1, 6);
  } catch (const SolverError& err) {
    CHECK(err.code() == ErrorCode::EmptyBranch);
  }
}

TEST_CASE("symmetric heterogeneity yields a symmetric steady state") {
  const ModelSpec m = fixtures::even_profile();
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients co = compute_rho_kappa(m, g, e);
  const double lambda = 1.05 * e.lambda1;
  const double th = co.theta_predictor(lambda);
  REQUIRE(th > 0.0);
  Field guess(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) guess[i] = th * e.phi1[i];
  const SteadyState s = solve_steady(m, g, lambda, guess);
  const double scale = max_abs(s.u_star);
  for (int i = 0; i <= g.cells() / 2; ++i)
    CHECK(std::fabs(s.u_star[i] - s.u_star[g.cells() - i]) <= 1e-9 * scale);
}

TEST_CASE("vanishing quadratic coefficient: fold sweep in the amplitude") {
  const Grid1D g(1.0, 128);
  double lambda1 = 0.0;
  const ModelSpec m = kappa_null_model(g, &lambda1);
  const EigenPair e = principal_eigenpair(m, g);
  const BifCoefficients co = compute_nu(m, g, e, compute_rho_kappa(m, g, e));

  // r was tuned so the quadratic coefficient cancels
  const double kscale = 1.0 + std::fabs(co.kappa1) + std::fabs(co.kappa2);
  REQUIRE(std::fabs(co.kappa) <= 1e-10 * kscale);

  SUBCASE("lambda continuation is refused in this regime") {
    CHECK_THROWS_AS(continue_branch_gamma0(m, g, e, co, 1.01 * e.lambda1,
                                           1.05 * e.lambda1, 5),
                    SolverError);
    try {
      continue_branch_gamma0(m, g, e, co, 1.01 * e.lambda1, 1.05 * e.lambda1,
                             5);
    } catch (const SolverError& err) {
      CHECK(err.code() == ErrorCode::OutOfRegime);
    }
  }

  SUBCASE("amplitude sweep resolves the fold") {
    const int steps = 9;
    const Branch br = sweep_fold_gamma0(m, g, e, co, 0.02, 0.10, steps);
    REQUIRE(br.points.size() == static_cast<std::size_t>(steps));
    std::vector<double> thetas(steps), lambdas(steps);
    for (int k = 0; k < steps; ++k) {
      const SteadyState& p = br.points[k];
      const double th = 0.02 + (0.10 - 0.02) * k / (steps - 1);
      thetas[k] = th;
      lambdas[k] = p.lambda;
      // the amplitude constraint is enforced exactly by the bordered solve
      CHECK(std::fabs(kernel_amplitude(g, e.phi1, p.u_star) - th) <= 1e-10);
      CHECK(std::fabs(br.theta[k] - th) <= 1e-10);
      CHECK(max_abs(steady_residual(m, g, p.lambda, p.u_star)) <= 1e-10);
    }
    // fold shape lambda(theta) = lambda_1 - nu/(6 rho) theta^2 + O(theta^3):
    // extrapolate the even coefficient from the two smallest amplitudes
    const double c1 = (e.lambda1 - lambdas[0]) / (thetas[0] * thetas[0]);
    const double c2 = (e.lambda1 - lambdas[1]) / (thetas[1] * thetas[1]);
    const double c0 =
        (thetas[1] * c1 - thetas[0] * c2) / (thetas[1] - thetas[0]);
    const double want = co.nu / (6.0 * co.rho);
    CHECK(std::fabs(c0 - want) <= 0.10 * std::fabs(want));
  }
}
