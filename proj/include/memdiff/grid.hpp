#pragma once
// Uniform 1-D grid on [0, L] with trapezoid quadrature and finite-volume
// second-difference operators.
//
// Nodes are x_i = i*h, i = 0..N, h = L/N.  Trapezoid weights are
// w_0 = w_N = h/2 and w_i = h otherwise.  Outward normal derivatives at the
// two boundary points are
//     dn u(x_0) = -u'(0),      dn u(x_N) = +u'(L),
// and are imposed through ghost nodes:
//     u_{-1}  = u_1     + 2h * dn u(x_0),
//     u_{N+1} = u_{N-1} + 2h * dn u(x_N).
// With those ghosts the discrete operators below reproduce the divergence
// theorem *exactly* under trapezoid quadrature:
//     integrate(laplacian(u, b0, b1)) == b0 + b1    (to rounding),
// because the flux-difference form telescopes.

#include <cstddef>
#include <vector>

namespace memdiff {

using Field = std::vector<double>;

class Grid1D {
 public:
  Grid1D(double length, int n_cells);

  double L() const { return L_; }
  int cells() const { return N_; }       // number of intervals
  int nodes() const { return N_ + 1; }   // number of nodes
  double h() const { return h_; }
  double x(int i) const { return h_ * i; }
  // Trapezoid weight of node i.
  double weight(int i) const { return (i == 0 || i == N_) ? 0.5 * h_ : h_; }

 private:
  double L_;
  int N_;
  double h_;
};

// Trapezoid quadrature of a nodal field.
double integrate(const Grid1D& g, const Field& u);

// Sum of the two boundary contributions; kept as a named operation so that
// every boundary functional in the codebase spells the same way.
inline double boundary_sum(double q0, double q1) { return q0 + q1; }

// Ghost values for the two fictitious nodes x_{-1} and x_{N+1}.
struct GhostPair {
  double lo = 0.0;  // value at x_{-1}
  double hi = 0.0;  // value at x_{N+1}
};

// Ghost values implied by prescribed outward normal derivatives b0, b1.
GhostPair ghosts_from_flux(const Grid1D& g, const Field& u, double b0, double b1);

// Second difference with prescribed outward normal derivatives at the ends:
// (laplacian(u, b0, b1))_i ~ u''(x_i) with dn u(x_0) = b0, dn u(x_N) = b1.
Field laplacian(const Grid1D& g, const Field& u, double flux0, double flux1);

// Conservative discretisation of (u w')' using face-centred fluxes
//   F_{i+1/2} = (u_i + u_{i+1})/2 * (w_{i+1} - w_i)/h,
//   result_i  = (F_{i+1/2} - F_{i-1/2})/h.
// Boundary faces use caller-supplied ghost values for both fields, so the
// operator is usable with any boundary closure (steady-state ghosts, lagged
// time-stepping ghosts, linearised ghosts).
Field memory_flux_divergence(const Grid1D& g, const Field& u, const Field& w,
                             const GhostPair& u_ghost, const GhostPair& w_ghost);

// Dirichlet-energy quadrature  int |u'|^2 dx  via the staggered midpoint
// gradient; identical to the quadratic form of the stiffness matrix used by
// the eigenproblem module.
double gradient_energy(const Grid1D& g, const Field& u);

// Pointwise helpers -----------------------------------------------------

Field zero_field(const Grid1D& g);
Field constant_field(const Grid1D& g, double c);

double max_abs(const Field& u);
double max_abs_diff(const Field& a, const Field& b);

}  // namespace memdiff
