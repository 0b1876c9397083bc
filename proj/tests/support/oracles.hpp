#pragma once
// Independent oracles for the test suite.  Each one recomputes a production
// quantity through a different route -- a continuous shooting method, a dense
// QZ factorisation, a re-typed inertia bisection, finite differences of the
// nonlinear residual -- so agreement is evidence, not tautology.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "memdiff/eigenproblem.hpp"
#include "memdiff/grid.hpp"
#include "memdiff/model.hpp"
#include "memdiff/steady.hpp"

namespace oracles {

using memdiff::Field;
using memdiff::Grid1D;
using memdiff::ModelSpec;

// --- continuous shooting oracle for the principal eigenvalue --------------
//
// Integrate  phi'' = -lambda f(x,0) phi  from x = 0 with phi(0) = 1 and the
// left flux condition  -phi'(0) = lambda r0 g'(0) phi(0), and measure the
// right-end mismatch  phi'(L) - lambda r1 g'(0) phi(L).  For a feasible
// weight the mismatch is positive for small lambda > 0 and first vanishes at
// the principal eigenvalue; locate that zero by scan + bisection.  Pure
// continuum construction: no grid, no matrices shared with production.
inline double shooting_lambda1(const ModelSpec& m, double L, double lambda_hi,
                               int rk_steps = 4096, int scan = 400) {
  const double gp0 = m.g_u(0.0);
  auto mismatch = [&](double lam) {
    double phi = 1.0, dphi = -lam * m.r0 * gp0;
    const double h = L / rk_steps;
    auto rhs = [&](double x, double p) { return -lam * m.f(x, 0.0) * p; };
    for (int i = 0; i < rk_steps; ++i) {
      const double x = i * h;
      // classic RK4 on the first-order system (phi, dphi)
      const double k1p = dphi, k1d = rhs(x, phi);
      const double k2p = dphi + 0.5 * h * k1d,
                   k2d = rhs(x + 0.5 * h, phi + 0.5 * h * k1p);
      const double k3p = dphi + 0.5 * h * k2d,
                   k3d = rhs(x + 0.5 * h, phi + 0.5 * h * k2p);
      const double k4p = dphi + h * k3d, k4d = rhs(x + h, phi + h * k3p);
      phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      dphi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    }
    return dphi - lam * m.r1 * gp0 * phi;
  };
  // first sign change of the mismatch on (0, lambda_hi]
  double lo = 0.0, flo = 0.0, hi = 0.0;
  for (int k = 1; k <= scan; ++k) {
    const double lam = lambda_hi * k / scan;
    const double f = mismatch(lam);
    if (k > 1 && flo > 0.0 && f <= 0.0) {
      hi = lam;
      break;
    }
    lo = lam;
    flo = f;
  }
  if (hi == 0.0) return std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mismatch(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// --- dense QZ oracle on the assembled pencil -------------------------------
//
// Smallest positive real generalized eigenvalue of (K, M) by Eigen's QZ;
// usable at small N where a dense solve is cheap.
inline double dense_pencil_lambda1(const memdiff::Pencil& p) {
  const int n = static_cast<int>(p.K.diag.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = p.K.diag[i];
    if (i > 0) {
      K(i, i - 1) = p.K.sub[i];
      K(i - 1, i) = p.K.sub[i];
    }
    M(i, i) = p.M[i];
  }
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(K, M);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const std::complex<double> a = ges.alphas()(i);
    const double b = ges.betas()(i);
    if (std::abs(b) < 1e-12 * std::abs(a)) continue;  // infinite eigenvalue
    const std::complex<double> lam = a / b;
    if (std::abs(lam.imag()) > 1e-8 * (1.0 + std::abs(lam.real()))) continue;
    if (lam.real() > 1e-10 && lam.real() < best) best = lam.real();
  }
  return best;
}

// --- re-typed inertia bisection oracle -------------------------------------
//
// Assembles the trapezoid-weighted pencil from the defining formulas and
// bisects on its own Sturm count; shares no code with the production solver.
// Cheap enough to run at N = 4096.
inline double inertia_lambda1_oracle(const ModelSpec& m, double L, int N) {
  const double h = L / N;
  const int n = N + 1;
  std::vector<double> kd(n), ks(n), md(n);
  for (int i = 0; i < n; ++i) {
    kd[i] = (i == 0 || i == N) ? 1.0 / h : 2.0 / h;
    ks[i] = (i > 0) ? -1.0 / h : 0.0;
    const double w = (i == 0 || i == N) ? 0.5 * h : h;
    md[i] = w * m.f(i * h, 0.0);
  }
  md[0] += m.g_u(0.0) * m.r0;
  md[n - 1] += m.g_u(0.0) * m.r1;

  auto negatives = [&](double lam) {
    int count = 0;
    double piv = 1.0;
    for (int i = 0; i < n; ++i) {
      const double off = (i > 0) ? ks[i] : 0.0;
      piv = (kd[i] - lam * md[i]) - off * off / piv;
      if (piv == 0.0) piv = -std::numeric_limits<double>::min();
      if (piv < 0.0) ++count;
    }
    return count;
  };
  double lo = 0.0, hi = 1.0;
  while (negatives(hi) < 1 && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (negatives(mid) < 1)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// --- finite-difference Jacobian of the steady residual ---------------------
inline Eigen::MatrixXd fd_steady_jacobian(const ModelSpec& m,
                                          const Grid1D& grid, double lambda,
                                          const Field& u) {
  const int n = grid.nodes();
  Eigen::MatrixXd J(n, n);
  Field up = u, um = u;
  for (int j = 0; j < n; ++j) {
    const double eps = 1e-6 * std::max(1.0, std::fabs(u[j]));
    up[j] = u[j] + eps;
    um[j] = u[j] - eps;
    const Field rp = memdiff::steady_residual(m, grid, lambda, up);
    const Field rm = memdiff::steady_residual(m, grid, lambda, um);
    for (int i = 0; i < n; ++i) J(i, j) = (rp[i] - rm[i]) / (2.0 * eps);
    up[j] = u[j];
    um[j] = u[j];
  }
  return J;
}

// --- extrapolation helpers --------------------------------------------------

// Limit of a sequence whose error halves between consecutive entries
// (offsets 1, 1/2, 1/4): first-order Richardson on the last two.
inline double richardson_halving(double r2, double r3) {
  return r3 + (r3 - r2);
}

// Observed order from two successive error halvings.
inline double order_from_errors(double e_coarse, double e_fine) {
  return std::log2(e_coarse / e_fine);
}

}  // namespace oracles
