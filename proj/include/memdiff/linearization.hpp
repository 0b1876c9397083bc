#pragma once
// Linearisation of the model about a steady state u*.  A perturbation
// v(x,t) = psi(x) e^{mu t} satisfies the delayed eigenproblem
//
//   (A + e^{-mu sigma} B) psi = mu psi,
//
// where A collects the instantaneous terms
//
//   A psi = Laplacian(psi) + d div(psi grad u*) + lambda (f(x,u*) + u* f_u(x,u*)) psi,
//
// B the delayed memory term
//
//   B psi = d div(u* grad psi),
//
// and both operators carry the linearised boundary closure
// dn psi = lambda r g'(u*) psi through ghost elimination (the ghost of u*
// itself comes from the steady boundary condition dn u* = lambda r g(u*)).
//
// By construction A + B is exactly the Jacobian of the steady-state residual,
// and at u* = 0, lambda = lambda_1 the matrix A is similar (through the
// trapezoid weights) to -(K - lambda_1 M) of the symmetric eigenproblem
// pencil, so its kernel is spanned by the principal eigenfunction.

#include "memdiff/grid.hpp"
#include "memdiff/linalg.hpp"
#include "memdiff/model.hpp"

namespace memdiff {

struct LinearizedPair {
  Tridiag<double> A;  // instantaneous part
  Tridiag<double> B;  // delayed (memory) part
};

// Ghost values of a steady state implied by dn u = lambda r g(u).
GhostPair steady_ghosts(const ModelSpec& m, const Grid1D& grid, double lambda,
                        const Field& u);

LinearizedPair assemble_linearization(const ModelSpec& m, const Grid1D& grid,
                                      double lambda, const Field& u_star);

}  // namespace memdiff
