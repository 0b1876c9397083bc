#pragma once
// Bifurcation from the constant-state branch {(u1, lambda = 0)}.
//
// A constant u1 > 0 is a bifurcation point of the steady problem iff
//
//   (A1)  Phi(u1) := u1 int f(x,u1) dx + (1 + d u1) g(u1) (r0 + r1) = 0.
//
// At such a root the crossing branch is parameterised by lambda = s with
// tangent field  u(s) ~ u1 + s (eta1 + psi_star), where psi_star is the
// unique zero-mean solution of
//
//   (1 + d u1) Lap(psi) = -u1 f(x, u1),   dn psi = r g(u1),  int psi = 0,
//
// and the constant component eta1 = -zeta_star / xi_star comes from the
// second-order solvability coefficients
//
//   zeta_star = d int div(psi grad psi) + int f(.,u1) psi + u1 int f_u(.,u1) psi
//               + (1 + d u1) g'(u1) (r0 psi(0) + r1 psi(L)),
//   xi_star   = d int Lap(psi) + int f(.,u1) + u1 int f_u(.,u1)
//               + (1 + d u1) g'(u1) (r0 + r1),
//
// with the nondegeneracy requirement (A2): xi_star != 0.  The range of the
// linearisation at (u1, 0) is characterised by the functional
//
//   <lbar, y>_2 = int y1 dx - (1 + d u1) (y2(0) + y2(L)),
//
// and the slope of the near-zero eigenvalue along the branch satisfies
// |Omega| mu/s -> <lbar, T_lu[1]>_2, so at sigma = 0 the branch is linearly
// stable iff s * <lbar, T_lu[1]>_2 < 0 (valid under the structural condition
// d g(u1) (r0 + r1) = 0 that removes the memory coupling at this order).

#include "memdiff/grid.hpp"
#include "memdiff/model.hpp"

namespace memdiff {

// Phi(u1) of condition (A1), with the integral taken by trapezoid quadrature
// on the supplied grid (the same quadrature the linear solve is compatible
// with, so the discrete solvability is exact at the discrete root).
double phi_A1(const ModelSpec& m, const Grid1D& grid, double u1);

// All roots of Phi in [lo, hi]: the bracket is scanned in n_scan segments and
// each sign change is refined by a safeguarded secant/bisection hybrid to a
// relative width of 1e-13.  Throws NoSignChange when no root is found.
std::vector<double> find_u1_roots(const ModelSpec& m, const Grid1D& grid,
                                  double lo, double hi, int n_scan = 64);
double find_u1(const ModelSpec& m, const Grid1D& grid, double lo, double hi);

struct PsiStarResult {
  Field psi;             // zero-mean corrector field
  double a1_residual;    // Phi(u1) (must vanish for solvability)
  double solve_residual; // max row residual of the bordered solve
  double multiplier;     // mean-lift multiplier (Phi/|Omega| up to sign)
};

// Solve the zero-mean Neumann problem for psi_star at the root u1.  Throws
// SolvabilityViolated when (A1) fails beyond 1e-8 (scaled).
PsiStarResult solve_psi_star(const ModelSpec& m, const Grid1D& grid, double u1);

struct Gamma1Data {
  double u1 = 0.0;
  Field psi_star;
  double zeta_star = 0.0;
  double xi_star = 0.0;
  double eta1 = 0.0;
  double pairing_lu1 = 0.0;  // <lbar, T_lu[1]>_2, the stability slope
  double a1_residual = 0.0;
};

// zeta*, xi*, eta1 and the stability pairing.  Throws A2Violated when
// xi_star vanishes at tolerance scale 1e-10 (1 + |zeta*|).
Gamma1Data compute_eta1(const ModelSpec& m, const Grid1D& grid, double u1);

enum class Gamma1Stability { Stable, Unstable };

// Sign rule of the sigma = 0 eigenvalue slope.  Throws PreconditionViolated
// when d g(u1) (r0 + r1) != 0 (the memory correction enters at leading order
// and the plain sign rule does not apply), and OutOfRegime when the pairing
// vanishes at tolerance scale.
Gamma1Stability classify_gamma1_stability(const ModelSpec& m, const Grid1D& grid,
                                          const Gamma1Data& g1, double s);

}  // namespace memdiff
