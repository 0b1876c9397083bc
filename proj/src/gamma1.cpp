#include "memdiff/gamma1.hpp"

#include <cmath>

#include "memdiff/errors.hpp"
#include "memdiff/linalg.hpp"

namespace memdiff {

double phi_A1(const ModelSpec& m, const Grid1D& grid, double u1) {
  Field f(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i) f[i] = m.f(grid.x(i), u1);
  return u1 * integrate(grid, f) +
         (1.0 + m.d * u1) * m.g(u1) * boundary_sum(m.r0, m.r1);
}

namespace {

double refine_root(const std::function<double(double)>& F, double a, double b,
                   double fa, double fb) {
  // safeguarded secant: fall back to bisection whenever the secant step
  // leaves the bracket or stalls
  for (int it = 0; it < 200; ++it) {
    if (b - a <= 1e-13 * (1.0 + std::fabs(a) + std::fabs(b))) break;
    double c;
    const double denom = fb - fa;
    if (denom != 0.0) {
      c = b - fb * (b - a) / denom;
      if (!(c > a && c < b)) c = 0.5 * (a + b);
    } else {
      c = 0.5 * (a + b);
    }
    // keep strictly interior so the bracket shrinks
    const double mid = 0.5 * (a + b);
    if (std::fabs(c - mid) > 0.49 * (b - a)) c = mid;
    const double fc = F(c);
    if (fc == 0.0) return c;
    if ((fa < 0.0) != (fc < 0.0)) {
      b = c;
      fb = fc;
    } else {
      a = c;
      fa = fc;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> find_u1_roots(const ModelSpec& m, const Grid1D& grid,
                                  double lo, double hi, int n_scan) {
  auto F = [&](double u) { return phi_A1(m, grid, u); };
  std::vector<double> roots;
  double a = lo, fa = F(lo);
  for (int k = 1; k <= n_scan; ++k) {
    const double b = lo + (hi - lo) * k / n_scan;
    const double fb = F(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if ((fa < 0.0) != (fb < 0.0)) {
      roots.push_back(refine_root(F, a, b, fa, fb));
    }
    a = b;
    fa = fb;
  }
  if (fa == 0.0) roots.push_back(a);
  if (roots.empty())
    fail(ErrorCode::NoSignChange,
         "no sign change of the bifurcation-point function in the bracket");
  return roots;
}

double find_u1(const ModelSpec& m, const Grid1D& grid, double lo, double hi) {
  return find_u1_roots(m, grid, lo, hi).front();
}

PsiStarResult solve_psi_star(const ModelSpec& m, const Grid1D& grid, double u1) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const double h = grid.h();
  const double diff = 1.0 + m.d * u1;

  PsiStarResult out;
  out.a1_residual = phi_A1(m, grid, u1);
  double scale = std::fabs(u1) + std::fabs(diff * m.g(u1)) *
                                     (std::fabs(m.r0) + std::fabs(m.r1));
  if (std::fabs(out.a1_residual) > 1e-8 * (1.0 + scale))
    fail(ErrorCode::SolvabilityViolated,
         "psi_star solve: u1 does not satisfy the bifurcation-point condition");

  // Pure-Neumann operator rows: diff * second difference with homogeneous
  // flux ghosts; the inhomogeneous flux data moves to the right-hand side.
  Tridiag<double> Mmat(n);
  const double ih2 = diff / (h * h);
  Mmat.diag[0] = -2.0 * ih2;
  Mmat.upper[0] = 2.0 * ih2;
  for (int i = 1; i < N; ++i) {
    Mmat.lower[i] = ih2;
    Mmat.diag[i] = -2.0 * ih2;
    Mmat.upper[i] = ih2;
  }
  Mmat.lower[N] = 2.0 * ih2;
  Mmat.diag[N] = -2.0 * ih2;

  const double b0 = m.r0 * m.g(u1), b1 = m.r1 * m.g(u1);
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = -u1 * m.f(grid.x(i), u1);
  rhs[0] -= diff * 2.0 * b0 / h;
  rhs[N] -= diff * 2.0 * b1 / h;

  // The operator is exactly singular (constants span the kernel), so an LU
  // factorization is unusable.  Multiplying row i by its trapezoid weight puts
  // the system in conservative flux form,
  //   diff * (G_{i+1/2} - G_{i-1/2}) + mult * w_i = w_i * rhs_i,
  // with G the face slopes of psi and vanishing end fluxes, so the multiplier
  // absorbs the weighted mean of the data and two cumulative sums reconstruct
  // the face slopes and then psi itself.
  double wr = 0.0, wtot = 0.0;
  for (int i = 0; i < n; ++i) {
    wr += grid.weight(i) * rhs[i];
    wtot += grid.weight(i);
  }
  const double mult = wr / wtot;

  std::vector<double> psi(n);
  psi[0] = 0.0;
  double slope = 0.0;
  for (int i = 0; i < N; ++i) {
    slope += grid.weight(i) * (rhs[i] - mult) / diff;
    psi[i + 1] = psi[i] + h * slope;
  }

  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += grid.weight(i) * psi[i];
  mean /= wtot;
  for (int i = 0; i < n; ++i) psi[i] -= mean;

  const std::vector<double> Mp = Mmat.multiply(psi);
  double res = 0.0;
  for (int i = 0; i < n; ++i)
    res = std::max(res, std::fabs(Mp[i] + mult - rhs[i]));

  out.psi = std::move(psi);
  out.solve_residual = res;
  out.multiplier = mult;
  return out;
}

Gamma1Data compute_eta1(const ModelSpec& m, const Grid1D& grid, double u1) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const double diff = 1.0 + m.d * u1;

  PsiStarResult ps = solve_psi_star(m, grid, u1);
  const Field& psi = ps.psi;

  Gamma1Data g1;
  g1.u1 = u1;
  g1.a1_residual = ps.a1_residual;

  // quadratures against f(., u1) and f_u(., u1)
  Field fv(n), fuv(n), fpsi(n), fupsi(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(i);
    fv[i] = m.f(x, u1);
    fuv[i] = m.f_u(x, u1);
    fpsi[i] = fv[i] * psi[i];
    fupsi[i] = fuv[i] * psi[i];
  }

  const double gu1 = m.g(u1);
  const double b0 = m.r0 * gu1, b1 = m.r1 * gu1;  // dn psi at the endpoints
  const GhostPair pg = ghosts_from_flux(grid, psi, b0, b1);

  // d * int div(psi grad psi): conservative quadrature; its exact boundary
  // reduction d g(u1) (r0 psi(0) + r1 psi(L)) is asserted in the tests.
  const Field div_pp = memory_flux_divergence(grid, psi, psi, pg, pg);
  const double d_div_pp = m.d * integrate(grid, div_pp);

  const double gprime = m.g_u(u1);
  g1.zeta_star = d_div_pp + integrate(grid, fpsi) + u1 * integrate(grid, fupsi) +
                 diff * gprime * (m.r0 * psi[0] + m.r1 * psi[N]);

  // d * int Lap(psi) reduces exactly to d * (flux sum) under the quadrature
  const Field lap_psi = laplacian(grid, psi, b0, b1);
  const double d_lap = m.d * integrate(grid, lap_psi);

  g1.xi_star = d_lap + integrate(grid, fv) + u1 * integrate(grid, fuv) +
               diff * gprime * boundary_sum(m.r0, m.r1);

  if (std::fabs(g1.xi_star) <= 1e-10 * (1.0 + std::fabs(g1.zeta_star)))
    fail(ErrorCode::A2Violated,
         "branch slope undefined: the nondegeneracy coefficient vanishes");
  g1.eta1 = -g1.zeta_star / g1.xi_star;

  // <lbar, T_lu[1]>_2 = xi_star - d int Lap(psi)
  g1.pairing_lu1 = g1.xi_star - d_lap;

  g1.psi_star = std::move(ps.psi);
  return g1;
}

Gamma1Stability classify_gamma1_stability(const ModelSpec& m, const Grid1D& grid,
                                          const Gamma1Data& g1, double s) {
  (void)grid;
  const double coupling = m.d * m.g(g1.u1) * boundary_sum(m.r0, m.r1);
  if (std::fabs(coupling) > 1e-10 * (1.0 + std::fabs(m.d)))
    fail(ErrorCode::PreconditionViolated,
         "sigma=0 sign rule requires d g(u1) (r0+r1) = 0");
  const double slope = s * g1.pairing_lu1;
  if (std::fabs(slope) <= 1e-12 * (1.0 + std::fabs(g1.pairing_lu1)))
    fail(ErrorCode::OutOfRegime,
         "stability slope vanishes: no first-order verdict");
  return slope < 0.0 ? Gamma1Stability::Stable : Gamma1Stability::Unstable;
}

}  // namespace memdiff
