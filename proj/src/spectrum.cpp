#include "memdiff/spectrum.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "memdiff/errors.hpp"
#include "memdiff/linalg.hpp"

namespace memdiff {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;

double inf_norm(const Tridiag<double>& t) {
  double m = 0.0;
  for (int i = 0; i < t.n(); ++i)
    m = std::max(m, std::fabs(t.lower[i]) + std::fabs(t.diag[i]) +
                        std::fabs(t.upper[i]));
  return m;
}

// characteristic matrix A + e^{-mu sigma} B - mu I
Tridiag<Complex> char_matrix(const LinearizedPair& p, double sigma,
                             Complex mu) {
  const int n = p.A.n();
  const Complex w = std::exp(-mu * sigma);
  Tridiag<Complex> M(n);
  for (int i = 0; i < n; ++i) {
    M.lower[i] = p.A.lower[i] + w * p.B.lower[i];
    M.diag[i] = p.A.diag[i] + w * p.B.diag[i] - mu;
    M.upper[i] = p.A.upper[i] + w * p.B.upper[i];
  }
  return M;
}

std::vector<Complex> mul_real(const Tridiag<double>& t,
                              const std::vector<Complex>& x) {
  const int m = t.n();
  std::vector<Complex> y(m);
  for (int i = 0; i < m; ++i) {
    Complex s = t.diag[i] * x[i];
    if (i > 0) s += t.lower[i] * x[i - 1];
    if (i + 1 < m) s += t.upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

double max_mag(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const Complex& z : v) m = std::max(m, std::abs(z));
  return m;
}

// phase representative (in (-pi, pi]) of the characteristic determinant
double char_phase(const LinearizedPair& p, double sigma, Complex mu,
                  bool* on_zero) {
  const TridiagLU<Complex> lu(char_matrix(p, sigma, mu));
  if (on_zero) *on_zero = lu.singular();
  return std::remainder(lu.arg_det(), kTwoPi);
}

// Logarithmic derivative of the characteristic determinant,
// d/dmu log det M(mu) = tr(M^{-1} M'), with M' = -I - sigma e^{-mu sigma} B.
// The trace needs only the tridiagonal part of M^{-1}, which the two-sided
// pivot recurrences deliver in O(n):
//   p_0 = a_0,      p_i = a_i - c_i b_{i-1} / p_{i-1}   (leading pivots)
//   q_{n-1}=a_{n-1}, q_i = a_i - b_i c_{i+1} / q_{i+1}  (trailing pivots)
//   (M^{-1})_{ii}    = 1 / (p_i + q_i - a_i)
//   (M^{-1})_{i,i+1} = -(M^{-1})_{ii} b_i / q_{i+1}
//   (M^{-1})_{i+1,i} = -(M^{-1})_{i+1,i+1} c_{i+1} / p_i
// (b = entry (i,i+1), c = entry (i,i-1)).  Near-singular leading or trailing
// minors are floored to a tiny magnitude; that perturbs the value only when
// mu sits essentially on an eigenvalue curve, where the caller refuses the
// contour anyway.
Complex log_det_slope(const LinearizedPair& p, double sigma, Complex mu) {
  const Tridiag<Complex> m = char_matrix(p, sigma, mu);
  const int n = m.n();
  const Complex ew = std::exp(-mu * sigma);
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    scale = std::max({scale, std::abs(m.diag[i]), std::abs(m.upper[i]),
                      std::abs(m.lower[i])});
  const double tiny = std::max(scale, 1.0) * 1e-250;
  auto floored = [&](Complex z) {
    return (std::abs(z) < tiny) ? Complex(tiny, 0.0) : z;
  };
  std::vector<Complex> pf(n), qb(n);
  pf[0] = floored(m.diag[0]);
  for (int i = 1; i < n; ++i)
    pf[i] = floored(m.diag[i] - m.lower[i] * m.upper[i - 1] / pf[i - 1]);
  qb[n - 1] = floored(m.diag[n - 1]);
  for (int i = n - 2; i >= 0; --i)
    qb[i] = floored(m.diag[i] - m.upper[i] * m.lower[i + 1] / qb[i + 1]);

  const Complex dfac = -sigma * ew;
  Complex tr(0.0, 0.0);
  std::vector<Complex> dinv(n);
  for (int i = 0; i < n; ++i) {
    dinv[i] = 1.0 / floored(pf[i] + qb[i] - m.diag[i]);
    tr += dinv[i] * (-1.0 + dfac * p.B.diag[i]);
  }
  for (int i = 0; i + 1 < n; ++i) {
    const Complex inv_up = -dinv[i] * m.upper[i] / qb[i + 1];
    const Complex inv_lo = -dinv[i + 1] * m.lower[i + 1] / pf[i];
    tr += inv_up * (dfac * p.B.lower[i + 1]) + inv_lo * (dfac * p.B.upper[i]);
  }
  return tr;
}

// Winding number of the characteristic determinant around the rectangle
// [re_lo, re_hi] x [im_lo, im_hi], walked counter-clockwise.  Equals the
// number of eigenvalues inside (the determinant is entire in mu).
//
// Sampling the phase alone cannot be trusted: tr(M^{-1} B) picks up an O(1)
// contribution from every deep diffusion mode, so along the vertical edges
// the phase oscillates with amplitude ~ sigma * n, and a sparsely sampled
// walk aliases by whole turns while every sampled jump stays below pi/2.
// Each segment is therefore accepted only when three independent views
// agree: the wrapped phase jump is below pi/2, the endpoint phase rates
// (from the exact logarithmic derivative) say a wrap cannot fit, and the
// trapezoid integral of the rate reproduces the sampled jump.  Segments
// start from a grid finer than the e^{-mu sigma} oscillation period and are
// bisected until all three tests pass.
int winding_count(const LinearizedPair& p, double sigma, double re_lo,
                  double re_hi, double im_lo, double im_hi) {
  const Complex corners[5] = {{re_hi, im_lo},
                              {re_hi, im_hi},
                              {re_lo, im_hi},
                              {re_lo, im_lo},
                              {re_hi, im_lo}};
  long evals = 0;
  const long budget = 400000;
  struct Node {
    double t, phase, rate;
  };
  double total = 0.0;
  Node lo{0.0, 0.0, 0.0};
  auto sample = [&](Complex a, Complex dir, double t) {
    if (++evals > budget)
      fail(ErrorCode::CountJumpNotTwo,
           "eigenvalue count: contour winding did not settle in budget");
    const Complex mu = a + t * dir;
    bool on_zero = false;
    const double ph = char_phase(p, sigma, mu, &on_zero);
    if (on_zero)
      fail(ErrorCode::CountJumpNotTwo,
           "eigenvalue count: contour passes through an eigenvalue");
    const double rate = (log_det_slope(p, sigma, mu) * dir).imag();
    return Node{t, ph, rate};
  };

  lo = sample(corners[0], corners[1] - corners[0], 0.0);
  for (int e = 0; e < 4; ++e) {
    const Complex a = corners[e], dir = corners[e + 1] - a;
    const double len = std::abs(dir);
    long forced = 4;
    if (sigma > 0.0) {
      const double step = kTwoPi / (6.0 * sigma);
      const double k = std::ceil(len / step);
      if (k > static_cast<double>(budget))
        fail(ErrorCode::CountJumpNotTwo,
             "eigenvalue count: contour winding did not settle in budget");
      forced = std::max(forced, static_cast<long>(k));
    }
    std::vector<Node> pending;
    for (long j = forced; j >= 1; --j)
      pending.push_back(
          sample(a, dir, static_cast<double>(j) / static_cast<double>(forced)));
    if (e > 0) lo = sample(a, dir, 0.0);
    while (!pending.empty()) {
      const Node hi = pending.back();
      const double dt = hi.t - lo.t;
      const double dphi = std::remainder(hi.phase - lo.phase, kTwoPi);
      const double by_rate = 0.5 * (lo.rate + hi.rate) * dt;
      const bool small_jump = std::fabs(dphi) <= 0.5 * kPi;
      const bool slow = std::fabs(lo.rate) * dt <= kPi &&
                        std::fabs(hi.rate) * dt <= kPi;
      const bool consistent = std::fabs(dphi - by_rate) <= 0.5;
      if ((small_jump && slow && consistent) || dt < 1e-13) {
        if (dt < 1e-13 && !(small_jump && consistent))
          fail(ErrorCode::CountJumpNotTwo,
               "eigenvalue count: phase jump pinned at the contour "
               "(eigenvalue on or near the box edge)");
        total += dphi;
        lo = hi;
        pending.pop_back();
      } else {
        pending.push_back(sample(a, dir, 0.5 * (lo.t + hi.t)));
      }
    }
  }
  const double w = total / kTwoPi;
  const int wi = static_cast<int>(std::lround(w));
  if (std::fabs(w - wi) > 0.25)
    fail(ErrorCode::CountJumpNotTwo,
         "eigenvalue count: winding is not an integer");
  return wi;
}

double unstable_bound(const LinearizedPair& p) {
  return inf_norm(p.A) + inf_norm(p.B) + 1.0;
}

// Smallest shift t making  eps*S + t*diag(w) - R  positive semidefinite as a
// quadratic form, located by bisection on the Sturm inertia.  sub[i] couples
// rows i-1 and i (sub[0] unused).
double min_feasible_shift(const std::vector<double>& s_diag,
                          const std::vector<double>& s_sub, double eps,
                          const std::vector<double>& w,
                          const std::vector<double>& r_diag,
                          const std::vector<double>& r_sub) {
  const int m = static_cast<int>(s_diag.size());
  std::vector<double> d(m), e(m, 0.0);
  auto psd = [&](double t) {
    for (int i = 0; i < m; ++i) d[i] = eps * s_diag[i] + t * w[i] - r_diag[i];
    for (int i = 1; i < m; ++i) e[i] = eps * s_sub[i] - r_sub[i];
    return negative_inertia(d, e) == 0;
  };
  if (psd(0.0)) return 0.0;
  // generalized Gershgorin row bound brackets the largest pencil eigenvalue
  double hi = 1.0;
  for (int i = 0; i < m; ++i) {
    double row = std::fabs(r_diag[i]) + eps * std::fabs(s_diag[i]);
    if (i > 0) row += std::fabs(r_sub[i]) + eps * std::fabs(s_sub[i]);
    if (i + 1 < m) row += std::fabs(r_sub[i + 1]) + eps * std::fabs(s_sub[i + 1]);
    hi = std::max(hi, row / w[i]);
  }
  int guard = 0;
  while (!psd(hi)) {
    hi *= 2.0;
    if (++guard > 60) return hi;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (psd(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Certified enclosure of the unstable half of the delayed spectrum: every
// root mu = x + i y of det(A + e^{-mu sigma} B - mu I) = 0 with x >= 0
// satisfies x <= re_hi and |y| <= im_hi, uniformly in sigma >= 0 (there
// |e^{-mu sigma}| <= 1).  The crude norm box ||A|| + ||B|| + 1 also encloses
// the roots but grows like 1/h^2, which makes the contour walk hopeless once
// sigma > 0; this bound stays mesh-independent.
//
// Pair the eigenvalue relation with its eigenvector in the trapezoid-weight
// metric w = (1/2, 1, ..., 1, 1/2) (the mesh width cancels from every
// Rayleigh quotient), writing M = diag(w) * A etc.  The symmetric part of
// M_A splits as -S_A + R_A where S_A is the positive stiffness form built
// from the symmetrised off-diagonal couplings kA > 0 (the discrete
// (1 + d u*)/h^2 fluxes; the advective first-order term is exactly skew on
// the off-diagonals, so it never pollutes kA).  Likewise M_B = -S_B + W_B +
// R_B with edge dominance psi' S_B psi <= q * psi' S_A psi,
// q = max kB/kA < 1 -- precisely the memory-smallness d u* < 1 + d u*.
// Each remainder form is absorbed into eps * E + C(eps) with E = psi' S_A
// psi: the symmetric remainders through a Sturm-inertia certificate (which
// automatically discovers the boundary trace inequalities hiding in the
// O(1/h) ghost-closure corners), the skew parts through a per-edge Young
// split |2 t psi_i d_i| <= eps kA |d_i|^2 + (t^2/(eps kA)) |psi_i|^2.  Then
// Re mu >= 0 forces E <= (C_A + C_B + C_WB)/(1 - q - 3 eps) and
//   x <= C_A + C_B + C_WB,   |y| <= (q + 3 eps) E_cap + C_WA + C_B + C_WB.
// If the edge dominance degenerates (q ~ 1) we fall back to the crude box.
struct HalfplaneBox {
  double re_hi;
  double im_hi;
};

HalfplaneBox root_region(const LinearizedPair& p) {
  const int n = p.A.n();
  const double crude = unstable_bound(p);
  const HalfplaneBox fallback{crude, crude};
  if (n < 3) return fallback;

  std::vector<double> w(n, 1.0);
  w.front() = w.back() = 0.5;
  auto row_scale = [&](const Tridiag<double>& t) {
    Tridiag<double> m(n);
    for (int i = 0; i < n; ++i) {
      m.lower[i] = w[i] * t.lower[i];
      m.diag[i] = w[i] * t.diag[i];
      m.upper[i] = w[i] * t.upper[i];
    }
    return m;
  };
  const Tridiag<double> ma = row_scale(p.A), mb = row_scale(p.B);

  std::vector<double> ka(n - 1), kb(n - 1);
  double q = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    ka[i] = 0.5 * (ma.upper[i] + ma.lower[i + 1]);
    if (!(ka[i] > 0.0)) return fallback;
    kb[i] = std::max(0.0, 0.5 * (mb.upper[i] + mb.lower[i + 1]));
    q = std::max(q, kb[i] / ka[i]);
  }
  const double eps = std::min(0.1, (1.0 - q) / 6.0);
  const double margin = 1.0 - q - 3.0 * eps;
  if (!(margin > 0.05)) return fallback;

  std::vector<double> sa_diag(n, 0.0), sa_sub(n, 0.0);
  std::vector<double> sb_diag(n, 0.0), sb_sub(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    sa_diag[i] += ka[i];
    sa_diag[i + 1] += ka[i];
    sa_sub[i + 1] = -ka[i];
    sb_diag[i] += kb[i];
    sb_diag[i + 1] += kb[i];
    sb_sub[i + 1] = -kb[i];
  }
  std::vector<double> ra_diag(n), ra_sub(n, 0.0), rb_diag(n), rb_sub(n, 0.0);
  for (int i = 0; i < n; ++i) {
    ra_diag[i] = ma.diag[i] + sa_diag[i];
    rb_diag[i] = mb.diag[i] + sb_diag[i];
  }
  for (int i = 1; i < n; ++i) {
    ra_sub[i] = 0.5 * (ma.upper[i - 1] + ma.lower[i]) + sa_sub[i];
    rb_sub[i] = 0.5 * (mb.upper[i - 1] + mb.lower[i]) + sb_sub[i];
  }

  const double c_a =
      min_feasible_shift(sa_diag, sa_sub, eps, w, ra_diag, ra_sub);
  const double c_b_plus =
      min_feasible_shift(sa_diag, sa_sub, eps, w, rb_diag, rb_sub);
  std::vector<double> nrb_diag(n), nrb_sub(n);
  for (int i = 0; i < n; ++i) {
    nrb_diag[i] = -rb_diag[i];
    nrb_sub[i] = -rb_sub[i];
  }
  const double c_b =
      std::max(c_b_plus,
               min_feasible_shift(sa_diag, sa_sub, eps, w, nrb_diag, nrb_sub));

  auto skew_constant = [&](const Tridiag<double>& m) {
    double c = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      const double t = 0.5 * std::fabs(m.upper[i] - m.lower[i + 1]);
      c = std::max(c, t * t / (eps * ka[i]) / w[i]);
    }
    return c;
  };
  const double c_wa = skew_constant(ma);
  const double c_wb = skew_constant(mb);

  const double x_cap = c_a + c_b + c_wb;
  const double e_cap = x_cap / margin;
  const double y_cap = (q + 3.0 * eps) * e_cap + c_wa + c_b + c_wb;
  HalfplaneBox box{std::min(crude, x_cap * 1.02 + 1e-6),
                   std::min(crude, y_cap * 1.02 + 1e-6)};
  return box;
}

struct Track {
  Complex mu;
  std::vector<Complex> psi;  // unit weighted L2 norm
  bool active = true;
};

void normalize_w(const Grid1D& grid, std::vector<Complex>& psi) {
  double s = 0.0;
  for (int i = 0; i < grid.nodes(); ++i)
    s += grid.weight(i) * std::norm(psi[i]);
  s = std::sqrt(s);
  if (s == 0.0) return;
  for (Complex& z : psi) z /= s;
}

// Bordered Newton for one eigenpair at fixed sigma; (mu, psi) seed in/out.
bool newton_eig(const LinearizedPair& p, const Grid1D& grid, double sigma,
                Complex& mu, std::vector<Complex>& psi, int max_iter) {
  const int n = p.A.n();
  const double tol = 200.0 * std::numeric_limits<double>::epsilon() *
                     (unstable_bound(p) + std::abs(mu));
  normalize_w(grid, psi);
  std::vector<Complex> nrow(n);
  for (int i = 0; i < n; ++i) nrow[i] = grid.weight(i) * std::conj(psi[i]);

  Complex mu_c = mu;
  std::vector<Complex> psi_c = psi;
  for (int it = 0; it < max_iter; ++it) {
    const Tridiag<Complex> M = char_matrix(p, sigma, mu_c);
    const std::vector<Complex> r = M.multiply(psi_c);
    Complex cpsi(0.0);
    for (int i = 0; i < n; ++i) cpsi += nrow[i] * psi_c[i];
    if (max_mag(r) <= tol * std::max(1.0, max_mag(psi_c)) &&
        std::abs(cpsi - 1.0) <= 1e-10) {
      mu = mu_c;
      psi = psi_c;
      normalize_w(grid, psi);
      return true;
    }

    const Complex w = std::exp(-mu_c * sigma);
    const std::vector<Complex> Bp = mul_real(p.B, psi_c);
    std::vector<Complex> col(n), rhs(n);
    for (int i = 0; i < n; ++i) {
      col[i] = -sigma * w * Bp[i] - psi_c[i];
      rhs[i] = -r[i];
    }
    try {
      const TridiagLU<Complex> lu(M);
      auto [dpsi, dmu] =
          bordered_solve(lu, col, nrow, Complex(0.0), rhs, 1.0 - cpsi);
      for (int i = 0; i < n; ++i) psi_c[i] += dpsi[i];
      mu_c += dmu;
    } catch (const SolverError&) {
      return false;
    }
    if (!std::isfinite(mu_c.real()) || !std::isfinite(mu_c.imag()))
      return false;
  }
  return false;
}

// Continue a track from sigma_a to sigma_b (either direction) with step
// halving; returns false when even tiny steps fail.
bool continue_track(const LinearizedPair& p, const Grid1D& grid, Track& t,
                    double sigma_a, double sigma_b, const SweepOptions& o) {
  double s = sigma_a;
  const double dir = sigma_b >= sigma_a ? 1.0 : -1.0;
  double step = std::fabs(sigma_b - sigma_a);
  const double full = step;
  Complex mu = t.mu;
  std::vector<Complex> psi = t.psi;
  int fails = 0;
  while (dir * (sigma_b - s) > 1e-14 * (1.0 + std::fabs(sigma_b))) {
    const double target =
        dir > 0 ? std::min(sigma_b, s + step) : std::max(sigma_b, s - step);
    Complex mu_try = mu;
    std::vector<Complex> psi_try = psi;
    const bool ok = newton_eig(p, grid, target, mu_try, psi_try, o.max_newton);
    // reject convergence onto a far-away branch: cap the per-step move
    if (ok && std::abs(mu_try - mu) <= 0.5 * (1.0 + std::abs(mu))) {
      mu = mu_try;
      psi = std::move(psi_try);
      s = target;
      step = std::min(2.0 * step, full);
    } else {
      step *= 0.5;
      if (++fails > 60) return false;
    }
  }
  t.mu = mu;
  t.psi = std::move(psi);
  return true;
}

int count_unstable(const std::vector<Track>& tracks) {
  int c = 0;
  for (const Track& t : tracks)
    if (t.active && t.mu.real() > 0.0)
      c += (t.mu.imag() > 1e-12 * (1.0 + std::abs(t.mu))) ? 2 : 1;
  return c;
}

// Recursively subdivide a box until each eigenvalue inside is isolated in a
// small cell; returns Newton-polished eigenpairs.
void locate_in_box(const LinearizedPair& p, const Grid1D& grid, double sigma,
                   double re_lo, double re_hi, double im_lo, double im_hi,
                   int contained, int depth, int max_newton,
                   std::vector<std::pair<Complex, std::vector<Complex>>>* out) {
  if (contained <= 0) return;
  const Complex center(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
  const double size = (re_hi - re_lo) + (im_hi - im_lo);
  if ((contained == 1 && size <= 1e-3 * (1.0 + std::abs(center))) ||
      depth > 60) {
    // inverse iteration for the eigenvector seed, then Newton polish
    std::vector<Complex> psi(p.A.n(), Complex(1.0));
    for (int k = 0; k < 3; ++k) {
      const TridiagLU<Complex> lu(char_matrix(p, sigma, center));
      psi = lu.solve(psi);
      const double m = max_mag(psi);
      if (m == 0.0 || !std::isfinite(m)) break;
      for (Complex& z : psi) z /= m;
    }
    Complex mu = center;
    if (newton_eig(p, grid, sigma, mu, psi, max_newton))
      out->push_back({mu, std::move(psi)});
    return;
  }
  // split the longer side
  if (im_hi - im_lo >= re_hi - re_lo) {
    const double mid = 0.5 * (im_lo + im_hi);
    const int lowhalf = winding_count(p, sigma, re_lo, re_hi, im_lo, mid);
    locate_in_box(p, grid, sigma, re_lo, re_hi, im_lo, mid, lowhalf, depth + 1,
                  max_newton, out);
    locate_in_box(p, grid, sigma, re_lo, re_hi, mid, im_hi,
                  contained - lowhalf, depth + 1, max_newton, out);
  } else {
    const double mid = 0.5 * (re_lo + re_hi);
    const int lefthalf = winding_count(p, sigma, re_lo, mid, im_lo, im_hi);
    locate_in_box(p, grid, sigma, re_lo, mid, im_lo, im_hi, lefthalf,
                  depth + 1, max_newton, out);
    locate_in_box(p, grid, sigma, mid, re_hi, im_lo, im_hi,
                  contained - lefthalf, depth + 1, max_newton, out);
  }
}

// Phase-normalised crossing quadratures: dmu/dsigma, with psi rotated so
// int psi^2 dx is real positive and scaled to unit weighted L2 norm.
Complex crossing_slope(const LinearizedPair& p, const Grid1D& grid,
                       double sigma, Complex mu, std::vector<Complex> psi) {
  normalize_w(grid, psi);
  Complex s2(0.0);
  for (int i = 0; i < grid.nodes(); ++i)
    s2 += grid.weight(i) * psi[i] * psi[i];
  const Complex rot = std::exp(Complex(0.0, -0.5 * std::arg(s2)));
  for (Complex& z : psi) z *= rot;
  s2 = Complex(0.0);
  for (int i = 0; i < grid.nodes(); ++i)
    s2 += grid.weight(i) * psi[i] * psi[i];

  const double omega = mu.imag();
  const std::vector<Complex> Bp = mul_real(p.B, psi);
  Complex quad(0.0);
  for (int i = 0; i < grid.nodes(); ++i)
    quad += grid.weight(i) * psi[i] * Bp[i];
  const Complex I0 = std::exp(Complex(0.0, -omega * sigma)) * quad;
  const Complex Xi = s2 + sigma * I0;
  if (std::norm(Xi) == 0.0)
    fail(ErrorCode::SingularBorderedSystem,
         "crossing slope: vanishing simplicity quantity");
  return -Complex(0.0, omega) * I0 * std::conj(Xi) / std::norm(Xi);
}

}  // namespace

SpectrumResult delay_free_spectrum(const LinearizedPair& pair) {
  const int n = pair.A.n();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    D(i, i) = pair.A.diag[i] + pair.B.diag[i];
    if (i > 0) D(i, i - 1) = pair.A.lower[i] + pair.B.lower[i];
    if (i + 1 < n) D(i, i + 1) = pair.A.upper[i] + pair.B.upper[i];
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> es(D);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NewtonDiverged, "delay-free spectrum: dense solve failed");

  SpectrumResult out;
  out.sigma = 0.0;
  out.eigenvalues.reserve(n);
  for (int i = 0; i < n; ++i) out.eigenvalues.push_back(es.eigenvalues()[i]);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
            [](const Complex& a, const Complex& b) {
              if (a.real() != b.real()) return a.real() > b.real();
              if (std::fabs(a.imag()) != std::fabs(b.imag()))
                return std::fabs(a.imag()) < std::fabs(b.imag());
              return a.imag() > b.imag();
            });
  for (const Complex& mu : out.eigenvalues)
    if (mu.real() > 0.0) ++out.unstable_count;
  return out;
}

int right_halfplane_count(const LinearizedPair& pair, double sigma) {
  const HalfplaneBox box = root_region(pair);
  return winding_count(pair, sigma, 0.0, box.re_hi, -box.im_hi, box.im_hi);
}

std::vector<SpectrumResult> continue_in_sigma(
    const LinearizedPair& pair, const Grid1D& grid,
    const std::vector<double>& sigma_grid, const SweepOptions& opts) {
  if (sigma_grid.empty() || sigma_grid.front() != 0.0)
    fail(ErrorCode::InvalidConfig, "sigma sweep: grid must start at 0");
  for (size_t j = 1; j < sigma_grid.size(); ++j)
    if (sigma_grid[j] <= sigma_grid[j - 1])
      fail(ErrorCode::InvalidConfig, "sigma sweep: grid must increase");
  const int n = pair.A.n();
  if (grid.nodes() != n)
    fail(ErrorCode::InvalidConfig, "sigma sweep: grid does not match matrices");

  // --- seeds at sigma = 0 from the dense delay-free solve -----------------
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    D(i, i) = pair.A.diag[i] + pair.B.diag[i];
    if (i > 0) D(i, i - 1) = pair.A.lower[i] + pair.B.lower[i];
    if (i + 1 < n) D(i, i + 1) = pair.A.upper[i] + pair.B.upper[i];
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> es(D);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NewtonDiverged, "sigma sweep: dense seed solve failed");

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Complex za = es.eigenvalues()[a], zb = es.eigenvalues()[b];
    if (za.real() != zb.real()) return za.real() > zb.real();
    if (std::fabs(za.imag()) != std::fabs(zb.imag()))
      return std::fabs(za.imag()) < std::fabs(zb.imag());
    return za.imag() > zb.imag();
  });

  std::vector<Track> tracks;
  int represented = 0;
  int exact_count0 = 0;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()[order[i]].real() > 0.0) ++exact_count0;
  for (int idx = 0; idx < n && represented < opts.track_k; ++idx) {
    const Complex mu = es.eigenvalues()[order[idx]];
    if (mu.imag() < 0.0) continue;  // conjugate partner carries it
    Track t;
    t.mu = mu;
    t.psi.resize(n);
    for (int i = 0; i < n; ++i) t.psi[i] = es.eigenvectors().col(order[idx])[i];
    normalize_w(grid, t.psi);
    // polish the dense seed on the tridiagonal problem
    if (newton_eig(pair, grid, 0.0, t.mu, t.psi, opts.max_newton)) {
      tracks.push_back(std::move(t));
      represented += (mu.imag() > 0.0) ? 2 : 1;
    }
  }

  auto emit = [&](double sigma, int count) {
    SpectrumResult r;
    r.sigma = sigma;
    for (const Track& t : tracks) {
      if (!t.active) continue;
      r.eigenvalues.push_back(t.mu);
      if (t.mu.imag() > 1e-12 * (1.0 + std::abs(t.mu)))
        r.eigenvalues.push_back(std::conj(t.mu));
    }
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
              [](const Complex& a, const Complex& b) {
                if (a.real() != b.real()) return a.real() > b.real();
                if (std::fabs(a.imag()) != std::fabs(b.imag()))
                  return std::fabs(a.imag()) < std::fabs(b.imag());
                return a.imag() > b.imag();
              });
    r.unstable_count = count;
    return r;
  };

  std::vector<SpectrumResult> results;
  results.push_back(emit(0.0, exact_count0));

  // last sigma with an exact audited count (for retroactive reconciliation)
  double audited_sigma = 0.0;
  int audited_count = exact_count0;
  size_t audited_row = 0;

  for (size_t j = 1; j < sigma_grid.size(); ++j) {
    const double sa = sigma_grid[j - 1], sb = sigma_grid[j];

    bool lost = false;
    bool tracked_crossing = false;
    std::vector<std::pair<Complex, double>> re_before;  // mu, Re at sa
    for (Track& t : tracks) {
      if (!t.active) continue;
      // park tracks whose exponential factor would overflow
      // Newton on e^{-mu sigma} is hopeless (and eventually overflows) once
      // the factor dwarfs the matrix scale; the audits re-adopt any branch
      // that later swings back toward the axis, so parking early is safe.
      if (-t.mu.real() * sb > 60.0) {
        t.active = false;
        continue;
      }
      const double re_a = t.mu.real();
      Track back = t;  // state at sa, kept for crossing refinement
      if (!continue_track(pair, grid, t, sa, sb, opts)) {
        t.active = false;
        lost = true;
        continue;
      }
      if (re_a < 0.0 && t.mu.real() > 0.0) tracked_crossing = true;
      if (re_a > 0.0 && t.mu.real() < 0.0) tracked_crossing = true;
      re_before.emplace_back(back.mu, re_a);
    }

    // prune duplicates (two tracks converged onto one branch)
    for (size_t a = 0; a < tracks.size(); ++a) {
      if (!tracks[a].active) continue;
      for (size_t b = a + 1; b < tracks.size(); ++b) {
        if (!tracks[b].active) continue;
        if (std::abs(tracks[a].mu - tracks[b].mu) <
            1e-9 * (1.0 + std::abs(tracks[a].mu)))
          tracks[b].active = false;
      }
    }

    const bool audit = tracked_crossing || lost ||
                       (opts.guard_every > 0 &&
                        j % static_cast<size_t>(opts.guard_every) == 0) ||
                       j + 1 == sigma_grid.size();

    int count_b = count_unstable(tracks);
    if (audit) {
      const int exact = right_halfplane_count(pair, sb);
      if (exact < count_b)
        fail(ErrorCode::NewtonLostEigenvalue,
             "sigma sweep: tracked unstable eigenvalues exceed the exact "
             "count (stale track)");
      if (exact > count_b) {
        // adopt entrants: eigenvalues inside the right half-plane that no
        // track represents
        const HalfplaneBox box = root_region(pair);
        std::vector<std::pair<Complex, std::vector<Complex>>> found;
        locate_in_box(pair, grid, sb, 0.0, box.re_hi, -box.im_hi, box.im_hi,
                      exact, 0, opts.max_newton, &found);
        for (auto& [mu, psi] : found) {
          if (mu.imag() < -1e-12 * (1.0 + std::abs(mu))) continue;
          bool matched = false;
          for (const Track& t : tracks)
            if (t.active &&
                std::abs(t.mu - mu) < 1e-6 * (1.0 + std::abs(mu))) {
              matched = true;
              break;
            }
          if (!matched) {
            Track t;
            t.mu = mu;
            t.psi = std::move(psi);
            tracks.push_back(std::move(t));
          }
        }
        count_b = count_unstable(tracks);
        if (count_b != exact)
          fail(ErrorCode::NewtonLostEigenvalue,
               "sigma sweep: could not adopt all entrant eigenvalues");
      }
      count_b = exact;
    }

    SpectrumResult row = emit(sb, count_b);

    // --- crossing refinement -------------------------------------------
    if (tracked_crossing) {
      // bisect the first tracked pair that changed sign over (sa, sb]
      for (auto& [mu_a, re_a] : re_before) {
        // find the continued track matching this seed
        Track* now = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (Track& t : tracks) {
          if (!t.active) continue;
          const double d0 = std::abs(t.mu - mu_a);
          if (d0 < best) {
            best = d0;
            now = &t;
          }
        }
        if (!now || re_a * now->mu.real() >= 0.0) continue;

        // Newton bisection in sigma between (sa, state at sa) and sb
        Track lo;
        lo.mu = mu_a;
        lo.psi = now->psi;  // shape changes slowly; re-converge at lo
        double s_lo = sa, s_hi = sb;
        if (!newton_eig(pair, grid, s_lo, lo.mu, lo.psi, opts.max_newton))
          break;
        Track probe = lo;
        while (s_hi - s_lo > opts.crossing_tol) {
          const double sm = 0.5 * (s_lo + s_hi);
          Track mid = probe;
          if (!continue_track(pair, grid, mid, s_lo, sm, opts)) break;
          if (mid.mu.real() * re_a >= 0.0) {  // same side as at sa
            s_lo = sm;
            probe = std::move(mid);
          } else {
            s_hi = sm;
          }
        }
        Track at_cross = probe;
        continue_track(pair, grid, at_cross, s_lo, 0.5 * (s_lo + s_hi), opts);
        row.crossing_sigma = 0.5 * (s_lo + s_hi);
        row.crossing_omega = std::fabs(at_cross.mu.imag());
        row.dmu_dsigma = crossing_slope(pair, grid, *row.crossing_sigma,
                                        at_cross.mu, at_cross.psi);
        break;
      }
    } else if (audit && row.unstable_count > audited_count) {
      // an untracked pair crossed somewhere in (audited_sigma, sb]:
      // refine by bisection on the exact count
      double s_lo = audited_sigma, s_hi = sb;
      while (s_hi - s_lo > opts.crossing_tol) {
        const double sm = 0.5 * (s_lo + s_hi);
        if (right_halfplane_count(pair, sm) > audited_count)
          s_hi = sm;
        else
          s_lo = sm;
      }
      const double sc = 0.5 * (s_lo + s_hi);
      // retroactively correct rows emitted after the crossing
      for (size_t rr = audited_row + 1; rr < results.size(); ++rr)
        if (results[rr].sigma >= sc)
          results[rr].unstable_count = row.unstable_count;
      // walk the newest adopted track back to the crossing for omega/slope
      Track* entrant = nullptr;
      for (Track& t : tracks)
        if (t.active && t.mu.real() > 0.0) entrant = &t;
      if (entrant) {
        Track at_cross = *entrant;
        if (continue_track(pair, grid, at_cross, sb, sc, opts)) {
          // attach to the first row at or beyond the crossing (that is where
          // the retroactive count fix introduces the jump); the current row
          // takes it only when no emitted row lies past the crossing
          bool attached = false;
          for (size_t rr = audited_row + 1; rr < results.size(); ++rr) {
            if (results[rr].sigma >= sc) {
              results[rr].crossing_sigma = sc;
              results[rr].crossing_omega = std::fabs(at_cross.mu.imag());
              results[rr].dmu_dsigma = crossing_slope(
                  pair, grid, sc, at_cross.mu, at_cross.psi);
              attached = true;
              break;
            }
          }
          if (!attached) {
            row.crossing_sigma = sc;
            row.crossing_omega = std::fabs(at_cross.mu.imag());
            row.dmu_dsigma = crossing_slope(pair, grid, sc, at_cross.mu,
                                            at_cross.psi);
          }
        }
      }
    }
    if (audit) {
      audited_sigma = sb;
      audited_count = row.unstable_count;
      audited_row = results.size();
    }
    results.push_back(std::move(row));
  }
  return results;
}

std::vector<std::pair<double, int>> unstable_count_profile(
    const std::vector<SpectrumResult>& results) {
  std::vector<std::pair<double, int>> profile;
  profile.reserve(results.size());
  for (const SpectrumResult& r : results)
    profile.emplace_back(r.sigma, r.unstable_count);
  for (size_t j = 1; j < profile.size(); ++j) {
    const int jump = profile[j].second - profile[j - 1].second;
    if (jump == 0) continue;
    const bool crossing_here =
        results[j].crossing_sigma.has_value() &&
        *results[j].crossing_sigma > profile[j - 1].first &&
        *results[j].crossing_sigma <= profile[j].first;
    if (jump != 2 || !crossing_here)
      fail(ErrorCode::CountJumpNotTwo,
           "unstable count profile: count changed by " + std::to_string(jump) +
               " across (" + std::to_string(profile[j - 1].first) + ", " +
               std::to_string(profile[j].first) +
               "] without a matching detected crossing; refine the sigma "
               "grid");
  }
  return profile;
}

}  // namespace memdiff
