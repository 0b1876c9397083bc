#include "memdiff/grid.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace memdiff {

Grid1D::Grid1D(double length, int n_cells) : L_(length), N_(n_cells) {
  if (!(length > 0.0)) throw std::invalid_argument("Grid1D: length must be positive");
  if (n_cells < 2) throw std::invalid_argument("Grid1D: need at least 2 cells");
  h_ = L_ / N_;
}

double integrate(const Grid1D& g, const Field& u) {
  assert((int)u.size() == g.nodes());
  const int N = g.cells();
  double s = 0.5 * (u[0] + u[N]);
  for (int i = 1; i < N; ++i) s += u[i];
  return s * g.h();
}

GhostPair ghosts_from_flux(const Grid1D& g, const Field& u, double b0, double b1) {
  const int N = g.cells();
  const double h = g.h();
  return GhostPair{u[1] + 2.0 * h * b0, u[N - 1] + 2.0 * h * b1};
}

Field laplacian(const Grid1D& g, const Field& u, double flux0, double flux1) {
  assert((int)u.size() == g.nodes());
  const int N = g.cells();
  const double h2 = g.h() * g.h();
  Field r(g.nodes());
  const GhostPair gh = ghosts_from_flux(g, u, flux0, flux1);
  r[0] = (gh.lo - 2.0 * u[0] + u[1]) / h2;
  for (int i = 1; i < N; ++i) r[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / h2;
  r[N] = (u[N - 1] - 2.0 * u[N] + gh.hi) / h2;
  return r;
}

Field memory_flux_divergence(const Grid1D& g, const Field& u, const Field& w,
                             const GhostPair& u_ghost, const GhostPair& w_ghost) {
  assert((int)u.size() == g.nodes());
  assert((int)w.size() == g.nodes());
  const int N = g.cells();
  const double h = g.h();

  // Face flux F_{i+1/2} for i = -1..N, stored at index i+1.
  std::vector<double> F(N + 2);
  F[0] = 0.5 * (u_ghost.lo + u[0]) * (w[0] - w_ghost.lo) / h;
  for (int i = 0; i < N; ++i)
    F[i + 1] = 0.5 * (u[i] + u[i + 1]) * (w[i + 1] - w[i]) / h;
  F[N + 1] = 0.5 * (u[N] + u_ghost.hi) * (w_ghost.hi - w[N]) / h;

  Field r(g.nodes());
  for (int i = 0; i <= N; ++i) r[i] = (F[i + 1] - F[i]) / h;
  return r;
}

double gradient_energy(const Grid1D& g, const Field& u) {
  assert((int)u.size() == g.nodes());
  const int N = g.cells();
  const double h = g.h();
  double s = 0.0;
  for (int i = 0; i < N; ++i) {
    const double du = u[i + 1] - u[i];
    s += du * du;
  }
  return s / h;
}

Field zero_field(const Grid1D& g) { return Field(g.nodes(), 0.0); }

Field constant_field(const Grid1D& g, double c) { return Field(g.nodes(), c); }

double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::fabs(v));
  return m;
}

double max_abs_diff(const Field& a, const Field& b) {
  assert(a.size() == b.size());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace memdiff
