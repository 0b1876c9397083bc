#include "memdiff/linearization.hpp"

namespace memdiff {

GhostPair steady_ghosts(const ModelSpec& m, const Grid1D& grid, double lambda,
                        const Field& u) {
  const int N = grid.cells();
  return ghosts_from_flux(grid, u, lambda * m.r0 * m.g(u[0]),
                          lambda * m.r1 * m.g(u[N]));
}

LinearizedPair assemble_linearization(const ModelSpec& m, const Grid1D& grid,
                                      double lambda, const Field& u_star) {
  const int N = grid.cells();
  const int n = grid.nodes();
  const double h = grid.h();
  const double h2 = h * h;
  const double d = m.d;

  LinearizedPair lin{Tridiag<double>(n), Tridiag<double>(n)};
  Tridiag<double>& A = lin.A;
  Tridiag<double>& B = lin.B;

  const GhostPair ug = steady_ghosts(m, grid, lambda, u_star);
  // linearised boundary coefficients: dn psi = b * psi at each endpoint
  const double b0 = lambda * m.r0 * m.g_u(u_star[0]);
  const double b1 = lambda * m.r1 * m.g_u(u_star[N]);

  // face differences and means of u*, including ghost faces
  auto du_face = [&](int i) {  // u*_{i+1} - u*_i for faces i = -1..N
    if (i < 0) return u_star[0] - ug.lo;
    if (i >= N) return ug.hi - u_star[N];
    return u_star[i + 1] - u_star[i];
  };
  auto mean_face = [&](int i) {
    if (i < 0) return 0.5 * (ug.lo + u_star[0]);
    if (i >= N) return 0.5 * (u_star[N] + ug.hi);
    return 0.5 * (u_star[i] + u_star[i + 1]);
  };
  auto reaction = [&](int i) {
    const double x = grid.x(i);
    const double u = u_star[i];
    return lambda * (m.f(x, u) + u * m.f_u(x, u));
  };

  for (int i = 1; i < N; ++i) {
    const double dm = du_face(i - 1), dp = du_face(i);
    const double um = mean_face(i - 1), up = mean_face(i);
    A.lower[i] = 1.0 / h2 - d * dm / (2.0 * h2);
    A.diag[i] = -2.0 / h2 + d * (dp - dm) / (2.0 * h2) + reaction(i);
    A.upper[i] = 1.0 / h2 + d * dp / (2.0 * h2);
    B.lower[i] = d * um / h2;
    B.diag[i] = -d * (up + um) / h2;
    B.upper[i] = d * up / h2;
  }

  {  // node 0: ghost psi_{-1} = psi_1 + 2 h b0 psi_0
    const double dm = du_face(-1), dp = du_face(0);
    const double um = mean_face(-1), up = mean_face(0);
    A.diag[0] = (-2.0 + 2.0 * h * b0) / h2 +
                d * (dp - (1.0 + 2.0 * h * b0) * dm) / (2.0 * h2) + reaction(0);
    A.upper[0] = 2.0 / h2 + d * (dp - dm) / (2.0 * h2);
    B.diag[0] = d * (-up - (1.0 - 2.0 * h * b0) * um) / h2;
    B.upper[0] = d * (up + um) / h2;
  }

  {  // node N: ghost psi_{N+1} = psi_{N-1} + 2 h b1 psi_N
    const double dm = du_face(N - 1), dp = du_face(N);
    const double um = mean_face(N - 1), up = mean_face(N);
    A.diag[N] = (-2.0 + 2.0 * h * b1) / h2 +
                d * ((1.0 + 2.0 * h * b1) * dp - dm) / (2.0 * h2) + reaction(N);
    A.lower[N] = 2.0 / h2 + d * (dp - dm) / (2.0 * h2);
    B.diag[N] = d * ((2.0 * h * b1 - 1.0) * up - um) / h2;
    B.lower[N] = d * (up + um) / h2;
  }

  return lin;
}

}  // namespace memdiff
