#include "memdiff/model.hpp"

#include <cmath>

namespace memdiff {

// --- Expr ----------------------------------------------------------------

double Expr::eval(double x, double L) const {
  double s = 0.0;
  for (const Term& t : terms) {
    double v = t.coeff;
    for (int p = 0; p < t.pow; ++p) v *= x;
    for (int k : t.cos_ks) v *= std::cos(k * M_PI * x / L);
    for (int k : t.sin_ks) v *= std::sin(k * M_PI * x / L);
    s += v;
  }
  return s;
}

Expr Expr::constant(double c) {
  Expr e;
  e.terms.push_back(Term{c, 0, {}, {}});
  return e;
}

Expr Expr::monomial(double c, int p) {
  Expr e;
  e.terms.push_back(Term{c, p, {}, {}});
  return e;
}

Expr Expr::cosine(double amp, int k) {
  Expr e;
  e.terms.push_back(Term{amp, 0, {k}, {}});
  return e;
}

Expr Expr::sine(double amp, int k) {
  Expr e;
  e.terms.push_back(Term{amp, 0, {}, {k}});
  return e;
}

Expr operator+(const Expr& a, const Expr& b) {
  Expr e = a;
  e.terms.insert(e.terms.end(), b.terms.begin(), b.terms.end());
  return e;
}

Expr operator*(const Expr& a, const Expr& b) {
  Expr e;
  for (const Expr::Term& s : a.terms)
    for (const Expr::Term& t : b.terms) {
      Expr::Term p;
      p.coeff = s.coeff * t.coeff;
      p.pow = s.pow + t.pow;
      p.cos_ks = s.cos_ks;
      p.cos_ks.insert(p.cos_ks.end(), t.cos_ks.begin(), t.cos_ks.end());
      p.sin_ks = s.sin_ks;
      p.sin_ks.insert(p.sin_ks.end(), t.sin_ks.begin(), t.sin_ks.end());
      e.terms.push_back(p);
    }
  return e;
}

// --- builtin models ------------------------------------------------------

ModelSpec make_logistic_heterogeneous(const Expr& m_hat, double L, double r0,
                                      double r1, double d, double lambda,
                                      double sigma) {
  ModelSpec m;
  m.name = "logistic_heterogeneous";
  m.f = [m_hat, L](double x, double u) { return m_hat.eval(x, L) - u; };
  m.f_u = [](double, double) { return -1.0; };
  m.f_uu = [](double, double) { return 0.0; };
  m.g = [](double u) { return u * u; };
  m.g_u = [](double u) { return 2.0 * u; };
  m.g_uu = [](double) { return 2.0; };
  m.g_uuu = [](double) { return 0.0; };
  m.r0 = r0;
  m.r1 = r1;
  m.d = d;
  m.lambda = lambda;
  m.sigma = sigma;
  return m;
}

ModelSpec make_saturating_bistable_boundary(const Expr& r_hat, double k_hat,
                                            const Expr& gamma_hat, double a_hat,
                                            double L, double r0, double r1,
                                            double d, double lambda, double sigma) {
  ModelSpec m;
  m.name = "saturating_bistable_boundary";
  m.f = [r_hat, gamma_hat, k_hat, L](double x, double u) {
    return r_hat.eval(x, L) * (k_hat - u) / (k_hat + gamma_hat.eval(x, L) * u);
  };
  // With D = k_hat + gamma*u:  f_u = -r k (1+gamma)/D^2,  f_uu = 2 r k gamma (1+gamma)/D^3.
  m.f_u = [r_hat, gamma_hat, k_hat, L](double x, double u) {
    const double ga = gamma_hat.eval(x, L);
    const double D = k_hat + ga * u;
    return -r_hat.eval(x, L) * k_hat * (1.0 + ga) / (D * D);
  };
  m.f_uu = [r_hat, gamma_hat, k_hat, L](double x, double u) {
    const double ga = gamma_hat.eval(x, L);
    const double D = k_hat + ga * u;
    return 2.0 * r_hat.eval(x, L) * k_hat * ga * (1.0 + ga) / (D * D * D);
  };
  // g(u) = u (u - a)(1 - u) = -u^3 + (1+a) u^2 - a u
  m.g = [a_hat](double u) { return u * (u - a_hat) * (1.0 - u); };
  m.g_u = [a_hat](double u) { return -3.0 * u * u + 2.0 * (1.0 + a_hat) * u - a_hat; };
  m.g_uu = [a_hat](double u) { return -6.0 * u + 2.0 * (1.0 + a_hat); };
  m.g_uuu = [](double) { return -6.0; };
  m.r0 = r0;
  m.r1 = r1;
  m.d = d;
  m.lambda = lambda;
  m.sigma = sigma;
  return m;
}

// --- finite-difference fallbacks ----------------------------------------

void use_fd_f_derivatives(ModelSpec& m) {
  auto f = m.f;
  m.f_u = [f](double x, double u) {
    const double h = 1e-5 * std::max(1.0, std::fabs(u));
    return (f(x, u + h) - f(x, u - h)) / (2.0 * h);
  };
  m.f_uu = [f](double x, double u) {
    const double h = 1e-5 * std::max(1.0, std::fabs(u));
    return (f(x, u + h) - 2.0 * f(x, u) + f(x, u - h)) / (h * h);
  };
}

void use_fd_g_derivatives(ModelSpec& m) {
  auto g = m.g;
  m.g_u = [g](double u) {
    const double h = 1e-5 * std::max(1.0, std::fabs(u));
    return (g(u + h) - g(u - h)) / (2.0 * h);
  };
  m.g_uu = [g](double u) {
    const double h = 1e-5 * std::max(1.0, std::fabs(u));
    return (g(u + h) - 2.0 * g(u) + g(u - h)) / (h * h);
  };
  m.g_uuu = [g](double u) {
    // wider step: third difference loses ~3 digits per halving otherwise
    const double h = 1e-3 * std::max(1.0, std::fabs(u));
    return (g(u + 2.0 * h) - 2.0 * g(u + h) + 2.0 * g(u - h) - g(u - 2.0 * h)) /
           (2.0 * h * h * h);
  };
}

// --- admissibility checks ------------------------------------------------

A0Report check_A0(const ModelSpec& m, int n_samples) {
  A0Report rep;
  const double lo = m.u_lo, hi = m.u_hi;
  bool in_violation = false;
  double vstart = 0.0, ulast = lo;
  for (int i = 0; i <= n_samples; ++i) {
    const double u = lo + (hi - lo) * i / n_samples;
    const double gu = m.g(u);
    const bool bad = (m.r0 * gu > 0.0) || (m.r1 * gu > 0.0);
    if (bad && !in_violation) {
      in_violation = true;
      vstart = u;
    } else if (!bad && in_violation) {
      in_violation = false;
      rep.violating_u_intervals.push_back({vstart, ulast});
    }
    ulast = u;
  }
  if (in_violation) rep.violating_u_intervals.push_back({vstart, hi});
  rep.pass = rep.violating_u_intervals.empty();
  return rep;
}

FeasibilityReport check_eigen_feasibility(const ModelSpec& m, const Grid1D& grid) {
  FeasibilityReport rep;
  const double gp0 = m.g_u(0.0);
  Field f0(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i) {
    f0[i] = m.f(grid.x(i), 0.0);
    if (f0[i] > 0.0) rep.positive_somewhere = true;
  }
  if (m.r0 * gp0 > 0.0 || m.r1 * gp0 > 0.0) rep.positive_somewhere = true;
  rep.mean_value = integrate(grid, f0) + gp0 * boundary_sum(m.r0, m.r1);
  rep.mean_negative = rep.mean_value < 0.0;
  return rep;
}

double a3_margin(const ModelSpec& m, const std::vector<Field>& branch) {
  double worst = 1.0;
  for (const Field& u : branch)
    worst = std::min(worst, 1.0 - std::fabs(m.d) * max_abs(u));
  return worst;
}

bool check_A3(const ModelSpec& m, const std::vector<Field>& branch) {
  return a3_margin(m, branch) > 0.0;
}

}  // namespace memdiff
