#include "memdiff/gamma0.hpp"

#include <cmath>

#include "memdiff/errors.hpp"
#include "memdiff/linalg.hpp"
#include "memdiff/linearization.hpp"

namespace memdiff {

Field assemble_pair(const Grid1D& grid, const Field& y1, double q0, double q1) {
  Field r = y1;
  const double lift = 2.0 / grid.h();
  r[0] -= lift * q0;
  r[grid.cells()] -= lift * q1;
  return r;
}

double pairing_psi(const Grid1D& grid, const Field& phi1, const Field& y1,
                   double q0, double q1) {
  Field prod(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i) prod[i] = phi1[i] * y1[i];
  return integrate(grid, prod) - phi1[0] * q0 - phi1[grid.cells()] * q1;
}

PairYA t_uu_pair(const ModelSpec& m, const Grid1D& grid, double lambda1,
                 const Field& v, const GhostPair& vg, const Field& w,
                 const GhostPair& wg) {
  const int n = grid.nodes();
  const int N = grid.cells();
  PairYA p;
  const Field dvw = memory_flux_divergence(grid, v, w, vg, wg);
  const Field dwv = memory_flux_divergence(grid, w, v, wg, vg);
  p.y1.resize(n);
  for (int i = 0; i < n; ++i) {
    p.y1[i] = m.d * (dvw[i] + dwv[i]) +
              2.0 * lambda1 * m.f_u(grid.x(i), 0.0) * v[i] * w[i];
  }
  const double guu = m.g_uu(0.0);
  p.q0 = -lambda1 * m.r0 * guu * v[0] * w[0];
  p.q1 = -lambda1 * m.r1 * guu * v[N] * w[N];
  return p;
}

namespace {

// ghosts of phi1 under its own boundary law dn phi1 = lambda1 r g'(0) phi1
GhostPair phi1_ghosts(const ModelSpec& m, const Grid1D& grid, double lambda1,
                      const Field& phi1) {
  const double gp0 = m.g_u(0.0);
  return ghosts_from_flux(grid, phi1, lambda1 * m.r0 * gp0 * phi1[0],
                          lambda1 * m.r1 * gp0 * phi1[grid.cells()]);
}

}  // namespace

BifCoefficients compute_rho_kappa(const ModelSpec& m, const Grid1D& grid,
                                  const EigenPair& eig) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const Field& p1 = eig.phi1;
  BifCoefficients co;
  co.lambda1 = eig.lambda1;

  Field tmp(n);
  for (int i = 0; i < n; ++i) tmp[i] = p1[i] * p1[i] * m.f(grid.x(i), 0.0);
  co.rho = integrate(grid, tmp) +
           m.g_u(0.0) * (m.r0 * p1[0] * p1[0] + m.r1 * p1[N] * p1[N]);

  const GhostPair pg = phi1_ghosts(m, grid, eig.lambda1, p1);
  const Field div_pp = memory_flux_divergence(grid, p1, p1, pg, pg);
  for (int i = 0; i < n; ++i) tmp[i] = p1[i] * div_pp[i];
  co.kappa0 = m.d * integrate(grid, tmp);

  for (int i = 0; i < n; ++i)
    tmp[i] = p1[i] * p1[i] * p1[i] * m.f_u(grid.x(i), 0.0);
  co.kappa1 = eig.lambda1 * integrate(grid, tmp);

  const double p0c = p1[0], p1c = p1[N];
  co.kappa2 = eig.lambda1 * m.g_uu(0.0) *
              (m.r0 * p0c * p0c * p0c + m.r1 * p1c * p1c * p1c);

  co.kappa = 2.0 * co.kappa0 + 2.0 * co.kappa1 + co.kappa2;

  const PairYA tuu = t_uu_pair(m, grid, eig.lambda1, p1, pg, p1, pg);
  co.t_uu_norm = std::max(max_abs(tuu.y1),
                          std::max(std::fabs(tuu.q0), std::fabs(tuu.q1)));
  return co;
}

double kappa_via_pairing(const ModelSpec& m, const Grid1D& grid,
                         const EigenPair& eig) {
  const GhostPair pg = phi1_ghosts(m, grid, eig.lambda1, eig.phi1);
  const PairYA p = t_uu_pair(m, grid, eig.lambda1, eig.phi1, pg, eig.phi1, pg);
  return pairing_psi(grid, eig.phi1, p.y1, p.q0, p.q1);
}

Field solve_sigma_correction(const ModelSpec& m, const Grid1D& grid,
                             const EigenPair& eig, double* multiplier,
                             double* residual) {
  const int n = grid.nodes();
  const Field zero = zero_field(grid);
  const LinearizedPair lin =
      assemble_linearization(m, grid, eig.lambda1, zero);

  const GhostPair pg = phi1_ghosts(m, grid, eig.lambda1, eig.phi1);
  const PairYA tuu = t_uu_pair(m, grid, eig.lambda1, eig.phi1, pg, eig.phi1, pg);
  Field rhs = assemble_pair(grid, tuu.y1, tuu.q0, tuu.q1);

  // Project onto the range: subtract <Psi, y> yhat with yhat = (phi1, 0, 0);
  // the assembled image of yhat is phi1 itself (its boundary parts vanish).
  const double pair = pairing_psi(grid, eig.phi1, tuu.y1, tuu.q0, tuu.q1);
  for (int i = 0; i < n; ++i) rhs[i] = -(rhs[i] - pair * eig.phi1[i]);

  // Bordered system: rows [A phi1; <phi1,.>_w 0], where the constraint row
  // carries the trapezoid weights so that it spells int phi1 sigma_c dx = 0.
  std::vector<double> border_row(n);
  for (int i = 0; i < n; ++i) border_row[i] = grid.weight(i) * eig.phi1[i];

  TridiagLU<double> lu(lin.A);
  auto [sigma_c, mult] =
      bordered_solve(lu, eig.phi1, border_row, 0.0, rhs, 0.0);

  // residual of the top block: A sigma_c + mult phi1 - rhs
  const std::vector<double> As = lin.A.multiply(sigma_c);
  double res = 0.0;
  for (int i = 0; i < n; ++i)
    res = std::max(res, std::fabs(As[i] + mult * eig.phi1[i] - rhs[i]));

  if (multiplier) *multiplier = mult;
  if (residual) *residual = res;
  return sigma_c;
}

BifCoefficients compute_nu(const ModelSpec& m, const Grid1D& grid,
                           const EigenPair& eig, BifCoefficients co) {
  const int n = grid.nodes();
  const int N = grid.cells();
  const Field& p1 = eig.phi1;
  const double l1 = eig.lambda1;

  const Field sc = solve_sigma_correction(m, grid, eig);

  // ghosts: dn phi1 = l1 r g'(0) phi1;  dn sigma_c = l1 r g'(0) sigma_c + l1 r g''(0) phi1^2
  const GhostPair pg = phi1_ghosts(m, grid, l1, p1);
  const double gp0 = m.g_u(0.0), gpp0 = m.g_uu(0.0);
  const GhostPair sg = ghosts_from_flux(
      grid, sc, l1 * m.r0 * (gp0 * sc[0] + gpp0 * p1[0] * p1[0]),
      l1 * m.r1 * (gp0 * sc[N] + gpp0 * p1[N] * p1[N]));

  Field tmp(n);
  for (int i = 0; i < n; ++i) {
    const double p2 = p1[i] * p1[i];
    tmp[i] = p2 * p2 * m.f_uu(grid.x(i), 0.0);
  }
  double nu = 3.0 * l1 * integrate(grid, tmp);

  const double p04 = std::pow(p1[0], 4), pN4 = std::pow(p1[N], 4);
  nu += l1 * m.g_uuu(0.0) * (m.r0 * p04 + m.r1 * pN4);

  const Field div_ps = memory_flux_divergence(grid, p1, sc, pg, sg);
  const Field div_sp = memory_flux_divergence(grid, sc, p1, sg, pg);
  for (int i = 0; i < n; ++i) tmp[i] = p1[i] * (div_ps[i] + div_sp[i]);
  nu += 3.0 * m.d * integrate(grid, tmp);

  for (int i = 0; i < n; ++i)
    tmp[i] = p1[i] * p1[i] * sc[i] * m.f_u(grid.x(i), 0.0);
  nu += 6.0 * l1 * integrate(grid, tmp);

  nu += 3.0 * l1 * gpp0 *
        (m.r0 * p1[0] * p1[0] * sc[0] + m.r1 * p1[N] * p1[N] * sc[N]);

  co.nu = nu;
  return co;
}

ZeroEigenvalue classify_zero_eigenvalue(const BifCoefficients& co) {
  const double scale =
      1e-10 * (1.0 + std::fabs(co.kappa0) + std::fabs(co.kappa1) +
               std::fabs(co.kappa2));
  if (std::fabs(co.kappa) > scale) return ZeroEigenvalue::NoZeroEig;
  if (co.t_uu_norm > scale) return ZeroEigenvalue::ZeroEig;
  fail(ErrorCode::Indeterminate,
       "zero-eigenvalue classification: kappa and the quadratic form both "
       "vanish at tolerance scale");
}

}  // namespace memdiff
