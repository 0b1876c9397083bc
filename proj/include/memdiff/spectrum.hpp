#pragma once
// Spectrum of the delayed linearisation about a steady state:
//
//   (A + e^{-mu sigma} B) psi = mu psi,
//
// with A the instantaneous part and B the memory part assembled by the
// linearization module.  The module provides
//
//  * the delay-free spectrum (sigma = 0) by a dense eigensolve of A + B;
//  * continuation of the rightmost eigenvalues in sigma by a bordered Newton
//    iteration on {(A + e^{-mu sigma} B - mu I) psi = 0, <psi_prev, psi> = 1},
//    with internal sigma sub-stepping when a step fails;
//  * an exact count of eigenvalues in the open right half-plane by the
//    argument principle: the characteristic determinant is entire in mu, and
//    every root with Re mu >= 0 lies in a certified rectangle whose size is
//    mesh-independent (quadratic-form bounds in the trapezoid metric; the
//    memory form is dominated edgewise by the instantaneous stiffness with
//    ratio q = max d u*/(1 + d u*) < 1, and the low-order remainders carry
//    inertia-certified shift constants).  The winding of
//    det(A + e^{-mu sigma} B - mu I) around that rectangle is marched with
//    the exact logarithmic derivative tr(M^{-1} M'), each segment accepted
//    only when the sampled phase jump, the endpoint phase rates, and their
//    trapezoid prediction agree, so sampled-phase aliasing cannot slip a
//    multiple of 2 pi.  The count audits the tracked set and adopts
//    eigenvalue pairs that enter from the far left (delay branches not
//    present among the sigma = 0 seeds);
//  * crossing detection: when the unstable count jumps by two across a grid
//    interval, the crossing delay is refined (Newton bisection on Re mu for a
//    tracked pair, winding bisection otherwise) and the crossing frequency,
//    eigenfunction, and the quadrature form of dmu/dsigma are reported:
//
//      dmu/dsigma = -i omega I0 conj(Xi) / |Xi|^2,
//      Xi = int psi^2 dx + sigma I0,   I0 = e^{-i omega sigma} int psi B psi dx,
//
//    with psi phase-normalised so that int psi^2 dx is real positive and
//    |psi|_{L^2} = 1.

#include <complex>
#include <optional>
#include <vector>

#include "memdiff/grid.hpp"
#include "memdiff/linearization.hpp"

namespace memdiff {

using Complex = std::complex<double>;

struct SpectrumResult {
  double sigma = 0.0;
  std::vector<Complex> eigenvalues;  // rightmost first, conjugation-closed
  int unstable_count = 0;            // # eigenvalues with Re mu > 0
  std::optional<double> crossing_sigma;  // crossing located in the preceding
  std::optional<double> crossing_omega;  //   grid interval, if any
  std::optional<Complex> dmu_dsigma;     // quadrature form at that crossing
};

// Dense eigensolve of A + B (the sigma = 0 problem).
SpectrumResult delay_free_spectrum(const LinearizedPair& pair);

// Exact number of eigenvalues of the delayed problem with Re mu > 0, by the
// argument principle over a rectangle enclosing all of them.  Throws
// CountJumpNotTwo when the contour phase fails to settle to an integer
// winding (an eigenvalue sitting on the contour).
int right_halfplane_count(const LinearizedPair& pair, double sigma);

struct SweepOptions {
  int track_k = 20;            // rightmost eigenvalues tracked from sigma = 0
  double crossing_tol = 1e-8;  // bisection tolerance in sigma
  int guard_every = 10;        // steps between exact-count audits
  int max_newton = 40;
};

// Continuation over an increasing sigma grid starting at 0.  One result per
// grid value; unstable counts are audited against the exact half-plane count
// (every guard_every steps and whenever a tracked eigenvalue crosses), and
// entrant pairs are adopted when the audit finds untracked unstable
// eigenvalues.  Throws NewtonLostEigenvalue when a tracked eigenvalue cannot
// be continued even with sub-stepping, and propagates CountJumpNotTwo from
// the audits.
std::vector<SpectrumResult> continue_in_sigma(const LinearizedPair& pair,
                                              const Grid1D& grid,
                                              const std::vector<double>& sigma_grid,
                                              const SweepOptions& opts = {});

// Step profile (sigma, unstable count); asserts the count changes only by +2
// and only across intervals where a crossing was detected, throwing
// CountJumpNotTwo otherwise (a missed crossing: refine the sigma grid).
std::vector<std::pair<double, int>> unstable_count_profile(
    const std::vector<SpectrumResult>& results);

}  // namespace memdiff
