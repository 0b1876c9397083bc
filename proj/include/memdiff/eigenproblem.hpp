#pragma once
// Principal eigenpair of the weighted problem at the trivial state:
//
//   -u'' = lambda f(x,0) u   on (0,L),
//   dn u = lambda r g'(0) u  at the endpoints,
//
// discretised with trapezoid-weighted rows so the pencil (K, M) is symmetric:
// K is the P1 stiffness matrix (1/h) tridiag(-1, 2, -1) with corner value 1/h,
// and M = diag(w_i f(x_i,0)) plus g'(0) r0 / g'(0) r1 added to the two corner
// entries.  The discrete Rayleigh quotient
//
//   Q(u) = (u^T K u) / (u^T M u) = int |u'|^2 / (int f(.,0) u^2 + g'(0)(r0 u(0)^2 + r1 u(L)^2))
//
// then matches the quadrature formulas exactly, and lambda_1 = min{ Q(u) :
// denominator > 0 } is located by bisection on the inertia of K - lambda M
// (positive definite for 0 < lambda < lambda_1, first singular at lambda_1).
// The eigenvector is recovered by shifted inverse iteration and polished with
// a Rayleigh quotient.

#include "memdiff/grid.hpp"
#include "memdiff/model.hpp"

namespace memdiff {

struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> sub;  // sub[i] couples rows i-1, i; sub[0] unused
};

struct Pencil {
  SymTridiag K;           // stiffness
  std::vector<double> M;  // weight matrix (diagonal)
};

Pencil assemble_pencil(const ModelSpec& m, const Grid1D& grid);

struct EigenPair {
  double lambda1 = 0.0;
  Field phi1;                // positive, normalised so that int phi1^2 dx = 1
  double residual_norm = 0;  // ||K phi - lambda M phi||_inf
};

// Principal eigenpair.  Throws FeasibilityViolated when the weight conditions
// fail (no positive principal eigenvalue exists) and
// NoSignDefiniteEigenvector when the candidate eigenvector changes sign.
EigenPair principal_eigenpair(const ModelSpec& m, const Grid1D& grid);

// Discrete Rayleigh quotient of an arbitrary field; throws
// DenominatorNotPositive when the weighted mass is <= 0.
double rayleigh_quotient(const ModelSpec& m, const Grid1D& grid, const Field& u);

}  // namespace memdiff
