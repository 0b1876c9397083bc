#pragma once
// Delay-induced Hopf crossings near the branch point (0, lambda_1).
//
// On the small-amplitude branch the critical eigenvalue pair mu = i omega of
// the delayed linearisation crosses the imaginary axis when the rescaled
// crossing equation
//
//   F(delta, theta) = -i delta + kappa/2 - kappa0 + e^{-i theta} kappa0 = 0
//
// has a root with real delta != 0 and theta in [0, 2pi).  Such a root exists
// exactly when kappa (4 kappa0 - kappa) > 0 (strict case) or 4 kappa0 =
// kappa != 0 (boundary case); expanding kappa = 2 kappa0 + (2 kappa1 +
// kappa2) turns the strict form into 4 kappa0^2 - (2 kappa1 + kappa2)^2 > 0,
// an exact algebraic identity used here as a consistency check.
//
// Closed forms (strict case):
//   delta* = sgn(theta_amp) sqrt(kappa (4 kappa0 - kappa)) / 2,
//   e^{i theta*} = (kappa0 - kappa/2 - i delta*) / kappa0   (unit modulus),
//   theta*      = Arg of that ratio mapped into [0, 2pi),
// so F(delta*, theta*) = 0 and delta* = -kappa0 sin(theta*) hold identically.
// The leading-order crossing frequency is omega = theta_amp * delta* > 0 and
// the delay ladder is sigma_n = (theta* + 2 n pi)/omega, n = 0, 1, ...; each
// rung adds one crossing pair.  The simplicity/transversality quantity of the
// n-th rung has the small-amplitude limit
//
//   Xi_n -> 1 + ((theta* + 2 n pi)/delta*)(kappa0 - kappa/2 + i delta*),
//
// nonzero for every n, and the rescaled transversality limit is
// delta*^2 / |Xi_n|^2 > 0 (the eigenvalue pair always exits rightwards).

#include <complex>
#include <vector>

#include "memdiff/gamma0.hpp"

namespace memdiff {

struct HopfData {
  bool hopf_possible = false;
  double delta_star = 0.0;
  double theta_star = 0.0;  // in [0, 2 pi)
  double omega = 0.0;       // theta_amp * delta_star, positive
  std::vector<double> sigma_ladder;       // rungs n = 0 .. n_max
  double transversality_sign = 0.0;       // delta*^2 / |Xi_0|^2
  std::complex<double> xi_limit{0.0, 0.0};  // Xi_0 small-amplitude limit
};

// Crossing-equation solvability test; evaluates both the product form
// kappa (4 kappa0 - kappa) and the expanded form 4 kappa0^2 - (2 kappa1 +
// kappa2)^2 and requires their verdicts to agree (they are the same number
// algebraically).
bool hopf_condition(const BifCoefficients& co);

// Closed-form crossing data at signed branch amplitude theta_amp.  Throws
// AmplitudeZero when theta_amp vanishes (the crossing frequency scales with
// it) and OutOfRegime when called outside the strict admissible case.
HopfData crossing_data(const BifCoefficients& co, double theta_amp,
                       int n_max = 3);

// Small-amplitude limit of the simplicity quantity of rung n.
std::complex<double> xi_n_limit(const BifCoefficients& co, const HopfData& h,
                                int n);

// Rescaled transversality limit delta*^2 / |xi_n|^2 (strictly positive).
double transversality_sign(const BifCoefficients& co,
                           std::complex<double> xi_n);

enum class Gamma0Stability { Stable, Unstable, HopfPoint };

// Stability of the small-amplitude steady state at a given delay:
//   rho (lambda - lambda_1) < 0                  -> Unstable for every sigma;
//   crossing impossible and rho (lambda-l1) > 0  -> Stable for every sigma;
//   crossing admissible and rho (lambda-l1) > 0  -> Stable below the first
//     rung, HopfPoint at it, Unstable beyond.
// Throws OutOfRegime when no clause applies (degenerate signs).
Gamma0Stability classify_gamma0_stability(const BifCoefficients& co,
                                          double lambda, double lambda1,
                                          double sigma, const HopfData& hopf);

}  // namespace memdiff
