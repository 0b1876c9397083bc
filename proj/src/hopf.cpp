#include "memdiff/hopf.hpp"

#include <cmath>
#include <limits>

#include "memdiff/errors.hpp"

namespace memdiff {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// rounding floor for sign decisions on the crossing products
double product_scale(const BifCoefficients& co) {
  const double beta = 2.0 * co.kappa1 + co.kappa2;
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (1.0 + 4.0 * co.kappa0 * co.kappa0 + co.kappa * co.kappa +
          beta * beta);
}

}  // namespace

bool hopf_condition(const BifCoefficients& co) {
  const double beta = 2.0 * co.kappa1 + co.kappa2;
  const double product = co.kappa * (4.0 * co.kappa0 - co.kappa);
  const double expanded = 4.0 * co.kappa0 * co.kappa0 - beta * beta;
  const double scale = product_scale(co);

  if (product > scale || expanded > scale) {
    // both routes must agree once clearly away from zero
    if (product < -scale || expanded < -scale)
      fail(ErrorCode::Indeterminate,
           "crossing condition: product and expanded forms disagree");
    return true;
  }
  if (product < -scale || expanded < -scale) return false;
  // boundary: 4 kappa0 = kappa != 0 still admits a (degenerate) crossing
  return std::fabs(4.0 * co.kappa0 - co.kappa) <= scale &&
         std::fabs(co.kappa) > scale;
}

HopfData crossing_data(const BifCoefficients& co, double theta_amp,
                       int n_max) {
  const double product = co.kappa * (4.0 * co.kappa0 - co.kappa);
  if (product <= product_scale(co))
    fail(ErrorCode::OutOfRegime,
         "crossing data: outside the strict admissible case "
         "kappa (4 kappa0 - kappa) > 0");
  if (!(std::fabs(theta_amp) > 0.0) || !std::isfinite(theta_amp))
    fail(ErrorCode::AmplitudeZero,
         "crossing data: branch amplitude vanishes (lambda = lambda_1?)");

  HopfData h;
  h.hopf_possible = true;
  const double mag = 0.5 * std::sqrt(product);
  h.delta_star = theta_amp > 0.0 ? mag : -mag;

  // e^{i theta*} = (kappa0 - kappa/2 - i delta*) / kappa0, unit modulus
  const std::complex<double> unit(
      (co.kappa0 - 0.5 * co.kappa) / co.kappa0, -h.delta_star / co.kappa0);
  double th = std::arg(unit);
  if (th < 0.0) th += kTwoPi;
  h.theta_star = th;

  h.omega = theta_amp * h.delta_star;
  h.sigma_ladder.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    h.sigma_ladder.push_back((h.theta_star + kTwoPi * n) / h.omega);

  h.xi_limit = xi_n_limit(co, h, 0);
  h.transversality_sign = transversality_sign(co, h.xi_limit);
  return h;
}

std::complex<double> xi_n_limit(const BifCoefficients& co, const HopfData& h,
                                int n) {
  const double phase = h.theta_star + kTwoPi * n;
  const std::complex<double> tail(co.kappa0 - 0.5 * co.kappa, h.delta_star);
  return 1.0 + (phase / h.delta_star) * tail;
}

double transversality_sign(const BifCoefficients& co,
                           std::complex<double> xi_n) {
  const double d2 = 0.25 * co.kappa * (4.0 * co.kappa0 - co.kappa);
  return d2 / std::norm(xi_n);
}

Gamma0Stability classify_gamma0_stability(const BifCoefficients& co,
                                          double lambda, double lambda1,
                                          double sigma, const HopfData& hopf) {
  const double side = co.rho * (lambda - lambda1);
  if (side < 0.0) return Gamma0Stability::Unstable;
  if (side == 0.0)
    fail(ErrorCode::OutOfRegime,
         "stability: rho (lambda - lambda_1) vanishes, no verdict");

  const double product = co.kappa * (4.0 * co.kappa0 - co.kappa);
  if (product < -product_scale(co)) return Gamma0Stability::Stable;

  if (hopf.hopf_possible && !hopf.sigma_ladder.empty()) {
    const double s0 = hopf.sigma_ladder.front();
    if (std::fabs(sigma - s0) <= 1e-9 * (1.0 + std::fabs(s0)))
      return Gamma0Stability::HopfPoint;
    return sigma < s0 ? Gamma0Stability::Stable : Gamma0Stability::Unstable;
  }
  fail(ErrorCode::OutOfRegime,
       "stability: crossing condition degenerate, no clause applies");
}

}  // namespace memdiff
