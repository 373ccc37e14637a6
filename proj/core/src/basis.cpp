#include <cmath>

#include "sbpsat/reference.hpp"

// Orthonormal basis on the triangle built from Jacobi polynomials in
// collapsed coordinates.  Normalized so that the L2 inner product over the
// reference triangle (area 1/2) of two basis functions is the identity.

namespace sbpsat {

namespace {

// Orthonormal Jacobi polynomial P_n^{alpha,beta} on [-1,1].
double jacobi_p(double x, double alpha, double beta, int n) {
  const double g0 = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                    std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                    std::tgamma(alpha + beta + 1.0);
  double pm1 = 1.0 / std::sqrt(g0);
  if (n == 0) return pm1;
  const double g1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * g0;
  double p = ((alpha + beta + 2.0) * x / 2.0 + (alpha - beta) / 2.0) / std::sqrt(g1);
  if (n == 1) return p;
  double aold = 2.0 / (2.0 + alpha + beta) *
                std::sqrt((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    const double anew =
        2.0 / (h1 + 2.0) *
        std::sqrt((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) *
                  (i + 1.0 + beta) / ((h1 + 1.0) * (h1 + 3.0)));
    const double bnew = -(alpha * alpha - beta * beta) / (h1 * (h1 + 2.0));
    const double pnext = (-aold * pm1 + (x - bnew) * p) / anew;
    pm1 = p;
    p = pnext;
    aold = anew;
  }
  return p;
}

double grad_jacobi_p(double x, double alpha, double beta, int n) {
  if (n == 0) return 0.0;
  return std::sqrt(n * (n + alpha + beta + 1.0)) *
         jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

// Collapsed coordinates on the (-1,-1),(1,-1),(-1,1) triangle.
void rs_to_ab(double r, double s, double& a, double& b) {
  a = (s != 1.0) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
  b = s;
}

double simplex_p(double a, double b, int m, int n) {
  return std::sqrt(2.0) * jacobi_p(a, 0.0, 0.0, m) *
         jacobi_p(b, 2.0 * m + 1.0, 0.0, n) * std::pow(1.0 - b, m);
}

void grad_simplex_p(double a, double b, int m, int n, double& dr, double& ds) {
  const double fa = jacobi_p(a, 0.0, 0.0, m);
  const double dfa = grad_jacobi_p(a, 0.0, 0.0, m);
  const double gb = jacobi_p(b, 2.0 * m + 1.0, 0.0, n);
  const double dgb = grad_jacobi_p(b, 2.0 * m + 1.0, 0.0, n);
  const double hb = 0.5 * (1.0 - b);

  dr = dfa * gb;
  if (m > 0) dr *= std::pow(hb, m - 1);

  ds = dfa * gb * 0.5 * (1.0 + a);
  if (m > 0) ds *= std::pow(hb, m - 1);
  double tmp = dgb * std::pow(hb, m);
  if (m > 0) tmp -= 0.5 * m * gb * std::pow(hb, m - 1);
  ds += fa * tmp;

  const double scale = std::pow(2.0, m + 0.5);
  dr *= scale;
  ds *= scale;
}

// graded mode list: total degree ascending, first index ascending within
void mode_indices(int degree, std::vector<std::pair<int, int>>& modes) {
  modes.clear();
  for (int d = 0; d <= degree; ++d)
    for (int m = 0; m <= d; ++m) modes.emplace_back(m, d - m);
}

}  // namespace

Matrix evaluate_basis(const Points& pts, int degree) {
  if (degree < 0) throw Error("evaluate_basis: negative degree");
  std::vector<std::pair<int, int>> modes;
  mode_indices(degree, modes);
  const int np = static_cast<int>(pts.rows());
  Matrix V(np, static_cast<int>(modes.size()));
  for (int i = 0; i < np; ++i) {
    const double r = 2.0 * pts(i, 0) - 1.0;
    const double s = 2.0 * pts(i, 1) - 1.0;
    double a, b;
    rs_to_ab(r, s, a, b);
    for (size_t k = 0; k < modes.size(); ++k)
      V(i, static_cast<int>(k)) =
          2.0 * simplex_p(a, b, modes[k].first, modes[k].second);
  }
  return V;
}

BasisGradient evaluate_basis_gradient(const Points& pts, int degree) {
  if (degree < 0) throw Error("evaluate_basis_gradient: negative degree");
  std::vector<std::pair<int, int>> modes;
  mode_indices(degree, modes);
  const int np = static_cast<int>(pts.rows());
  BasisGradient g;
  g.dx.resize(np, static_cast<int>(modes.size()));
  g.dy.resize(np, static_cast<int>(modes.size()));
  for (int i = 0; i < np; ++i) {
    const double r = 2.0 * pts(i, 0) - 1.0;
    const double s = 2.0 * pts(i, 1) - 1.0;
    double a, b;
    rs_to_ab(r, s, a, b);
    for (size_t k = 0; k < modes.size(); ++k) {
      double dr, ds;
      grad_simplex_p(a, b, modes[k].first, modes[k].second, dr, ds);
      // phi = 2 psi(2x-1, 2y-1)
      g.dx(i, static_cast<int>(k)) = 4.0 * dr;
      g.dy(i, static_cast<int>(k)) = 4.0 * ds;
    }
  }
  return g;
}

}  // namespace sbpsat
