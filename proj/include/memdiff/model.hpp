#pragma once
// Problem data for the memory-based diffusion model
//
//   u_t = Laplacian(u) + d * div(u * grad u_sigma) + lambda * u * f(x, u)
//   dn u = lambda * r(x) * g(u)          at x = 0 and x = L
//
// where u_sigma(x,t) = u(x, t - sigma) is the delayed field and the boundary
// weight r(x) enters only through its endpoint values r0 = r(0), r1 = r(L).
//
// A ModelSpec bundles the interior growth rate f(x,u) (with u-derivatives),
// the boundary reaction g(u) (with derivatives up to third order), the two
// boundary weights, the memory coefficient d, and the configured values of
// lambda and sigma.  Spatial profiles used by the builtin models are drawn
// from a small closed-form expression set (constants, polynomials,
// cos(k pi x / L), sin(k pi x / L), sums and products) so that configurations
// are fully serialisable.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "memdiff/grid.hpp"

namespace memdiff {

// --- closed-form spatial profiles --------------------------------------

struct Expr {
  // One term is coeff * x^pow * prod_j cos(k_j pi x / L) * prod_j sin(k_j pi x / L).
  struct Term {
    double coeff = 0.0;
    int pow = 0;
    std::vector<int> cos_ks;
    std::vector<int> sin_ks;
  };
  std::vector<Term> terms;

  double eval(double x, double L) const;

  static Expr constant(double c);
  static Expr monomial(double c, int p);
  static Expr cosine(double amp, int k);  // amp * cos(k pi x / L)
  static Expr sine(double amp, int k);    // amp * sin(k pi x / L)

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
};

// --- model bundle -------------------------------------------------------

struct ModelSpec {
  std::string name;

  // interior growth rate and u-derivatives
  std::function<double(double, double)> f;     // f(x, u)
  std::function<double(double, double)> f_u;   // df/du
  std::function<double(double, double)> f_uu;  // d2f/du2

  // boundary reaction and derivatives
  std::function<double(double)> g;
  std::function<double(double)> g_u;
  std::function<double(double)> g_uu;
  std::function<double(double)> g_uuu;

  double r0 = 0.0, r1 = 0.0;  // boundary weights r(0), r(L)
  double d = 0.0;             // memory-diffusion coefficient
  double lambda = 1.0;        // configured bifurcation parameter
  double sigma = 0.0;         // configured delay

  // declared solution range, sampled by the admissibility check
  double u_lo = 0.0, u_hi = 2.0;
};

// Logistic interior kinetics f(x,u) = m_hat(x) - u with quadratic boundary
// reaction g(u) = u^2 (so g'(0) = 0: the boundary weight drops out of the
// principal eigenproblem but feeds the higher-order branch coefficients).
ModelSpec make_logistic_heterogeneous(const Expr& m_hat, double L, double r0,
                                      double r1, double d, double lambda,
                                      double sigma);

// Saturating interior kinetics f(x,u) = r_hat(x) (k_hat - u)/(k_hat + gamma_hat(x) u)
// with bistable boundary reaction g(u) = u (u - a_hat)(1 - u); g'(0) < 0, so
// the boundary weight is active at the trivial state.
ModelSpec make_saturating_bistable_boundary(const Expr& r_hat, double k_hat,
                                            const Expr& gamma_hat, double a_hat,
                                            double L, double r0, double r1,
                                            double d, double lambda, double sigma);

// Replace the u-derivatives of f (resp. g) by centred finite differences with
// relative step 1e-5 * max(1, |u|) (1e-3 for the third derivative of g).
// Accuracy of downstream coefficients degrades accordingly: quantities built
// from first/second derivatives are good to ~1e-9 instead of rounding.
void use_fd_f_derivatives(ModelSpec& m);
void use_fd_g_derivatives(ModelSpec& m);

// --- admissibility and regime checks ------------------------------------

// Sign condition on the boundary reaction: r(x) g(u) <= 0 over the declared
// solution range, sampled at n points; violations are merged into
// subintervals of u for reporting.
struct A0Report {
  bool pass = true;
  std::vector<std::array<double, 2>> violating_u_intervals;
};
A0Report check_A0(const ModelSpec& m, int n_samples = 1000);

// Feasibility of the principal eigenproblem at the trivial state:
//  (a) the weight pair (f(x,0), r g'(0)) must be positive somewhere, and
//  (b) the total mean  int f(x,0) dx + g'(0) (r0 + r1)  must be negative.
struct FeasibilityReport {
  bool positive_somewhere = false;
  bool mean_negative = false;
  double mean_value = 0.0;
  bool pass() const { return positive_somewhere && mean_negative; }
};
FeasibilityReport check_eigen_feasibility(const ModelSpec& m, const Grid1D& grid);

// Memory-coefficient bound |d| * max|u| < 1 along a branch of states (keeps
// the instantaneous diffusivity 1 + d*u positive, which the delayed spectral
// analysis relies on).  Returns the worst margin 1 - |d|*max|u|.
double a3_margin(const ModelSpec& m, const std::vector<Field>& branch);
bool check_A3(const ModelSpec& m, const std::vector<Field>& branch);

}  // namespace memdiff
