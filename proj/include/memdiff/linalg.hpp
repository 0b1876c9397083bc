#pragma once
// Tridiagonal linear algebra: storage, matrix-vector products, LU with
// partial pivoting (fill-in limited to a second superdiagonal), inertia
// counts for symmetric pencils, and bordered solves
//
//     [ T   b ] [x]   [r]
//     [ c^T d ] [y] = [s]
//
// used by the zero-eigenvalue correction solve, the pure-Neumann mean-zero
// solve, amplitude-parameterised continuation, and delayed-eigenvalue Newton
// iterations.  Everything is templated over the scalar so the same code runs
// in double and complex<double>.

#include <cassert>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "memdiff/errors.hpp"

namespace memdiff {

template <class T>
struct Tridiag {
  // Row i couples x[i-1], x[i], x[i+1] through lower[i], diag[i], upper[i].
  // lower[0] and upper[n-1] are unused and kept at zero.
  std::vector<T> lower, diag, upper;

  explicit Tridiag(int n = 0) : lower(n, T(0)), diag(n, T(0)), upper(n, T(0)) {}
  int n() const { return (int)diag.size(); }

  std::vector<T> multiply(const std::vector<T>& x) const {
    const int m = n();
    assert((int)x.size() == m);
    std::vector<T> y(m);
    for (int i = 0; i < m; ++i) {
      T s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < m) s += upper[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }
};

template <class T>
Tridiag<T> add(const Tridiag<T>& a, const Tridiag<T>& b) {
  assert(a.n() == b.n());
  Tridiag<T> r(a.n());
  for (int i = 0; i < a.n(); ++i) {
    r.lower[i] = a.lower[i] + b.lower[i];
    r.diag[i] = a.diag[i] + b.diag[i];
    r.upper[i] = a.upper[i] + b.upper[i];
  }
  return r;
}

inline double mag(double x) { return std::fabs(x); }
inline double mag(const std::complex<double>& x) { return std::abs(x); }

// LU factorisation of a tridiagonal matrix with partial pivoting.  Row swaps
// introduce a second superdiagonal (classic gttrf layout).
template <class T>
class TridiagLU {
 public:
  explicit TridiagLU(const Tridiag<T>& A) { factor(A); }

  bool singular() const { return singular_; }
  // Smallest pivot magnitude relative to the largest; a crude conditioning
  // witness used by callers that iterate near-singular systems on purpose.
  double min_pivot_ratio() const { return min_pivot_ratio_; }

  // log|det| and arg(det) accumulated from the pivots (sign flips from row
  // swaps included in the phase).  Used by the winding-number root counter.
  double log_abs_det() const { return log_abs_det_; }
  double arg_det() const { return arg_det_; }

  std::vector<T> solve(std::vector<T> b) const {
    const int m = n_;
    assert((int)b.size() == m);
    for (int i = 0; i < m - 1; ++i) {
      if (swapped_[i]) std::swap(b[i], b[i + 1]);
      b[i + 1] -= l_[i] * b[i];
    }
    // back substitution with two superdiagonals
    for (int i = m - 1; i >= 0; --i) {
      T s = b[i];
      if (i + 1 < m) s -= u1_[i] * b[i + 1];
      if (i + 2 < m) s -= u2_[i] * b[i + 2];
      b[i] = s / d_[i];
    }
    return b;
  }

 private:
  void factor(const Tridiag<T>& A) {
    const int m = A.n();
    n_ = m;
    d_.resize(m);
    u1_.assign(m, T(0));
    u2_.assign(m, T(0));
    l_.assign(std::max(0, m - 1), T(0));
    swapped_.assign(std::max(0, m - 1), false);

    // working copy of the three bands
    std::vector<T> a(m), b(m), c(m);
    for (int i = 0; i < m; ++i) {
      a[i] = A.lower[i];
      b[i] = A.diag[i];
      c[i] = A.upper[i];
    }

    double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
    log_abs_det_ = 0.0;
    arg_det_ = 0.0;
    for (int i = 0; i < m; ++i) {
      if (i < m - 1 && mag(a[i + 1]) > mag(b[i])) {
        // swap rows i and i+1
        swapped_[i] = true;
        std::swap(b[i], a[i + 1]);          // pivot column
        std::swap(c[i], b[i + 1]);          // next column
        u2_[i] = c[i + 1];                  // fill-in two to the right
        c[i + 1] = T(0);
        arg_det_ += M_PI;                   // row swap flips the sign
      }
      T piv = b[i];
      if (mag(piv) == 0.0) {
        // exact zero pivot: nudge so solves stay finite; flag singular
        singular_ = true;
        piv = T(1e-300);
      }
      d_[i] = piv;
      const double mp = mag(piv);
      max_pivot = std::max(max_pivot, mp);
      min_pivot = std::min(min_pivot, mp);
      log_abs_det_ += std::log(mp);
      arg_det_ += std::arg(std::complex<double>(piv));
      u1_[i] = (i + 1 < m) ? c[i] : T(0);
      if (i < m - 1) {
        const T mult = a[i + 1] / piv;
        l_[i] = mult;
        b[i + 1] -= mult * u1_[i];
        c[i + 1] -= mult * u2_[i];
      }
    }
    min_pivot_ratio_ = (max_pivot > 0.0) ? min_pivot / max_pivot : 0.0;
  }

  int n_ = 0;
  std::vector<T> d_, u1_, u2_, l_;
  std::vector<bool> swapped_;
  bool singular_ = false;
  double min_pivot_ratio_ = 1.0;
  double log_abs_det_ = 0.0;
  double arg_det_ = 0.0;
};

// Number of eigenvalues of the symmetric tridiagonal matrix with diagonal d
// and subdiagonal e (e[i] couples rows i-1, i) that are below zero: negative
// pivots of the unpivoted LDL^T factorisation (Sturm count).  An exact zero
// pivot is replaced by a tiny negative number (standard bisection safeguard);
// overflow through a tiny pivot self-corrects in IEEE arithmetic.
inline int negative_inertia(const std::vector<double>& diag, const std::vector<double>& sub) {
  const int m = (int)diag.size();
  assert((int)sub.size() == m);
  int count = 0;
  double piv = 1.0;
  for (int i = 0; i < m; ++i) {
    const double off = (i > 0) ? sub[i] : 0.0;
    piv = diag[i] - off * off / piv;
    if (piv == 0.0) piv = -std::numeric_limits<double>::min();
    if (piv < 0.0) ++count;
  }
  return count;
}

// Solve the bordered system [T b; c^T d][x;y] = [r;s] through the factored
// block: x = T^{-1}(r - b y), y from the Schur complement.  Throws
// SingularBorderedSystem when the Schur complement vanishes.
template <class T>
std::pair<std::vector<T>, T> bordered_solve(const TridiagLU<T>& lu,
                                            const std::vector<T>& border_col,
                                            const std::vector<T>& border_row,
                                            T corner,
                                            const std::vector<T>& rhs_top,
                                            T rhs_bottom) {
  std::vector<T> t1 = lu.solve(rhs_top);
  std::vector<T> t2 = lu.solve(border_col);
  T ct1(0), ct2(0);
  for (size_t i = 0; i < border_row.size(); ++i) {
    ct1 += border_row[i] * t1[i];
    ct2 += border_row[i] * t2[i];
  }
  const T schur = corner - ct2;
  if (mag(schur) == 0.0)
    fail(ErrorCode::SingularBorderedSystem, "bordered solve: zero Schur complement");
  const T y = (rhs_bottom - ct1) / schur;
  std::vector<T> x(t1.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = t1[i] - y * t2[i];
  return {x, y};
}

}  // namespace memdiff
