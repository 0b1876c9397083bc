// Principal eigenpair tests: pencil assembly identities, the variational
// characterisation, and three independent routes to the principal eigenvalue
// (production inertia bisection vs continuous shooting vs dense QZ), plus
// O(h^2) mesh convergence and the failure-mode contracts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "memdiff/eigenproblem.hpp"
#include "memdiff/errors.hpp"
#include "memdiff/grid.hpp"
#include "memdiff/model.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace memdiff;

namespace {

double quad_form(const SymTridiag& K, const Field& u) {
  double s = 0.0;
  const int n = static_cast<int>(K.diag.size());
  for (int i = 0; i < n; ++i) {
    s += K.diag[i] * u[i] * u[i];
    if (i > 0) s += 2.0 * K.sub[i] * u[i] * u[i - 1];
  }
  return s;
}

}  // namespace

TEST_CASE("pencil entries follow the trapezoid-weighted formulas") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 8);
  const Pencil p = assemble_pencil(m, g);
  const double h = g.h();
  REQUIRE(p.K.diag.size() == 9);
  CHECK(p.K.diag[0] == doctest::Approx(1.0 / h).epsilon(1e-14));
  CHECK(p.K.diag[4] == doctest::Approx(2.0 / h).epsilon(1e-14));
  CHECK(p.K.diag[8] == doctest::Approx(1.0 / h).epsilon(1e-14));
  CHECK(p.K.sub[3] == doctest::Approx(-1.0 / h).epsilon(1e-14));
  // interior M: w_i f(x_i, 0); g'(0) = 0 for the quadratic reaction, so the
  // boundary weights do not enter
  CHECK(p.M[4] == doctest::Approx(h * m.f(g.x(4), 0.0)).epsilon(1e-14));
  CHECK(p.M[0] == doctest::Approx(0.5 * h * m.f(0.0, 0.0)).epsilon(1e-14));
}

TEST_CASE("boundary weights enter the pencil when g'(0) is nonzero") {
  const ModelSpec m = fixtures::saturating_unit();
  const Grid1D g(1.0, 8);
  const Pencil p = assemble_pencil(m, g);
  const double h = g.h();
  const double gp0 = m.g_u(0.0);
  CHECK(gp0 != doctest::Approx(0.0));
  CHECK(p.M[0] ==
        doctest::Approx(0.5 * h * m.f(0.0, 0.0) + gp0 * m.r0).epsilon(1e-14));
  CHECK(p.M[8] ==
        doctest::Approx(0.5 * h * m.f(1.0, 0.0) + gp0 * m.r1).epsilon(1e-14));
}

TEST_CASE("stiffness quadratic form equals the Dirichlet energy quadrature") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 97);
  const Pencil p = assemble_pencil(m, g);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Field u(g.nodes());
    for (double& v : u) v = U(rng);
    CHECK(quad_form(p.K, u) ==
          doctest::Approx(gradient_energy(g, u)).epsilon(1e-12));
  }
}

TEST_CASE("principal eigenpair on the cos-profile fixture") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 256);
  const EigenPair e = principal_eigenpair(m, g);

  CHECK(e.lambda1 == doctest::Approx(fixtures::cosref::lambda1).epsilon(1e-12));

  // positive eigenfunction, unit L^2 norm
  double nrm = 0.0;
  for (int i = 0; i < g.nodes(); ++i) {
    CHECK(e.phi1[i] > 0.0);
    nrm += g.weight(i) * e.phi1[i] * e.phi1[i];
  }
  CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));

  // residual at solver precision relative to the matrix scale
  const Pencil p = assemble_pencil(m, g);
  Field kphi(g.nodes());
  for (int i = 0; i < g.nodes(); ++i) {
    double s = p.K.diag[i] * e.phi1[i];
    if (i > 0) s += p.K.sub[i] * e.phi1[i - 1];
    if (i + 1 < g.nodes()) s += p.K.sub[i + 1] * e.phi1[i + 1];
    kphi[i] = s;
  }
  CHECK(e.residual_norm <= 1e-10 * max_abs(kphi));

  // the Rayleigh quotient of the eigenvector reproduces the eigenvalue
  CHECK(rayleigh_quotient(m, g, e.phi1) ==
        doctest::Approx(e.lambda1).epsilon(1e-10));
}

TEST_CASE("three independent routes agree on the principal eigenvalue") {
  const ModelSpec m = fixtures::cos_profile();

  SUBCASE("continuous shooting oracle") {
    const Grid1D g(1.0, 256);
    const EigenPair e = principal_eigenpair(m, g);
    const double shoot = oracles::shooting_lambda1(m, 1.0, 8.0);
    CHECK(std::fabs(e.lambda1 - shoot) / shoot < 1e-3);
  }
  SUBCASE("dense QZ on the same pencil") {
    const Grid1D g(1.0, 64);
    const EigenPair e = principal_eigenpair(m, g);
    const double qz = oracles::dense_pencil_lambda1(assemble_pencil(m, g));
    CHECK(e.lambda1 == doctest::Approx(qz).epsilon(1e-10));
  }
  SUBCASE("re-typed inertia bisection at the same resolution") {
    const Grid1D g(1.0, 128);
    const EigenPair e = principal_eigenpair(m, g);
    const double ib = oracles::inertia_lambda1_oracle(m, 1.0, 128);
    CHECK(e.lambda1 == doctest::Approx(ib).epsilon(1e-11));
  }
}

TEST_CASE("active boundary weight: all routes agree on the Robin problem") {
  // sign-changing interior weight with negative total mean keeps the
  // eigenproblem feasible, while the bistable boundary flux keeps the mass
  // corner entries active (r * g'(0) = 0.075 != 0)
  const ModelSpec m = make_saturating_bistable_boundary(
      Expr::cosine(1.0, 1) + Expr::constant(-0.2), 1.0, Expr::constant(1.0),
      0.3, 1.0, -0.25, -0.25, 0.0, 0.0, 0.0);
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  CHECK(e.lambda1 > 0.0);
  const double qz = oracles::dense_pencil_lambda1(assemble_pencil(m, g));
  CHECK(e.lambda1 == doctest::Approx(qz).epsilon(1e-10));
  const double shoot = oracles::shooting_lambda1(m, 1.0, 6.0 * e.lambda1);
  CHECK(std::fabs(e.lambda1 - shoot) / shoot < 2e-3);
}

TEST_CASE("principal eigenvalue converges at second order in h") {
  const ModelSpec m = fixtures::cos_profile();
  const double ref = principal_eigenpair(m, Grid1D(1.0, 2048)).lambda1;
  double err[3];
  const int ns[3] = {32, 64, 128};
  for (int k = 0; k < 3; ++k)
    err[k] = std::fabs(principal_eigenpair(m, Grid1D(1.0, ns[k])).lambda1 - ref);
  CHECK(oracles::order_from_errors(err[0], err[1]) ==
        doctest::Approx(2.0).epsilon(0.15));
  CHECK(oracles::order_from_errors(err[1], err[2]) ==
        doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("symmetric heterogeneity yields a symmetric eigenfunction") {
  const ModelSpec m = fixtures::even_profile();
  const Grid1D g(1.0, 128);
  const EigenPair e = principal_eigenpair(m, g);
  for (int i = 0; i <= g.cells() / 2; ++i)
    CHECK(e.phi1[i] ==
          doctest::Approx(e.phi1[g.cells() - i]).epsilon(1e-9));
}

TEST_CASE("rayleigh quotient rejects nonpositive weighted mass") {
  const ModelSpec m = fixtures::cos_profile();
  const Grid1D g(1.0, 64);
  // concentrate the field where f(x,0) < 0 (right half of the domain)
  Field u = zero_field(g);
  for (int i = 3 * g.cells() / 4; i < g.nodes(); ++i) u[i] = 1.0;
  CHECK_THROWS_AS(rayleigh_quotient(m, g, u), SolverError);
  try {
    rayleigh_quotient(m, g, u);
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::DenominatorNotPositive);
  }
}

TEST_CASE("infeasible weights are rejected") {
  const ModelSpec bad = make_logistic_heterogeneous(
      Expr::constant(-0.5), 1.0, -1.0, -1.0, 0.0, 1.0, 0.0);
  const Grid1D g(1.0, 64);
  CHECK_THROWS_AS(principal_eigenpair(bad, g), SolverError);
  try {
    principal_eigenpair(bad, g);
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::FeasibilityViolated);
  }
}
