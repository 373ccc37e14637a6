#include "sbpsat/solvers.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace sbpsat {

Vector solve_steady(const GlobalSystem& sys) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.a);
  if (ldlt.info() != Eigen::Success)
    throw Error("steady solve: factorization failed");
  if ((ldlt.vectorD().array() <= 0.0).any())
    throw Error(
        "steady solve: matrix not positive definite; relaxed penalties "
        "require the eigenvalue scan instead");
  Vector u = ldlt.solve(sys.b);
  if (!u.allFinite()) throw Error("steady solve: non-finite solution");
  // One step of iterative refinement; functional errors on fine meshes sit
  // close to the bare-solve rounding floor.
  u += ldlt.solve(sys.b - sys.a * u);
  // Backward-error check: a stable factorization keeps the residual near
  // eps * (|A| |u| + |b|) even when the system is badly conditioned.
  const double rnorm = (sys.a * u - sys.b).norm();
  const double scale = sys.a.norm() * u.norm() + sys.b.norm();
  if (rnorm > 1e-10 * scale && scale > 0.0) {
    std::ostringstream msg;
    msg << "steady solve: residual " << std::scientific << rnorm
        << " exceeds tolerance " << 1e-10 * scale;
    throw Error(msg.str());
  }
  return u;
}

namespace {

Vector seeded_unit_vector(Eigen::Index n, uint64_t seed) {
  std::mt19937_64 eng(seed);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
  v.normalize();
  return v;
}

/// Extreme Ritz values of a symmetric operator by Lanczos with full
/// reorthogonalization. `want_max` selects which end must converge.
template <typename Apply>
double lanczos_extreme(Apply&& apply, Eigen::Index n, bool want_max,
                       uint64_t seed, double tol, int max_iter) {
  if (n == 1) {
    Vector e = Vector::Ones(1);
    return apply(e)(0);
  }
  std::vector<Vector> basis;
  std::vector<double> alpha, beta;
  Vector v = seeded_unit_vector(n, seed);
  basis.push_back(v);
  double prev = 0.0;
  const int limit = std::min<Eigen::Index>(max_iter, n);
  for (int k = 0; k < limit; ++k) {
    Vector w = apply(basis.back());
    const double a = basis.back().dot(w);
    alpha.push_back(a);
    w -= a * basis.back();
    if (k > 0) w -= beta.back() * basis[basis.size() - 2];
    for (const auto& q : basis) w -= q.dot(w) * q;  // full reorthogonalization
    const double b = w.norm();

    Matrix t = Matrix::Zero(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
      t(i, i) = alpha[static_cast<size_t>(i)];
      if (i > 0) {
        t(i, i - 1) = beta[static_cast<size_t>(i - 1)];
        t(i - 1, i) = beta[static_cast<size_t>(i - 1)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const double ritz =
        want_max ? es.eigenvalues()(k) : es.eigenvalues()(0);
    const double scale = std::max(std::abs(ritz), 1e-300);
    if (k > 2 && std::abs(ritz - prev) <= tol * scale) return ritz;
    prev = ritz;

    if (b < 1e-13 * std::max(1.0, std::abs(a))) return ritz;  // invariant subspace
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return prev;
}

}  // namespace

double largest_eigenvalue(const Eigen::SparseMatrix<double>& a, uint64_t seed,
                          double tol, int max_iter) {
  return lanczos_extreme([&a](const Vector& v) { return Vector(a * v); },
                         a.rows(), true, seed, tol, max_iter);
}

double smallest_eigenvalue(const Eigen::SparseMatrix<double>& a, uint64_t seed,
                           double tol, int max_iter) {
  return lanczos_extreme([&a](const Vector& v) { return Vector(a * v); },
                         a.rows(), false, seed, tol, max_iter);
}

double condition_number(const Eigen::SparseMatrix<double>& a, uint64_t seed) {
  const double lmax = largest_eigenvalue(a, seed, 1e-8, 400);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  if (ldlt.info() != Eigen::Success ||
      (ldlt.vectorD().array() <= 0.0).any())
    throw Error("condition_number requires a positive definite matrix");
  // Largest eigenvalue of A^-1 = 1 / lambda_min(A).
  const double inv_lmin = lanczos_extreme(
      [&ldlt](const Vector& v) { return Vector(ldlt.solve(v)); }, a.rows(),
      true, seed, 1e-8, 400);
  if (!(inv_lmin > 0.0))
    throw Error("condition_number: shift-invert iteration failed");
  return lmax * inv_lmin;
}

MinEigReport min_magnitude_eigenvalue(const Eigen::SparseMatrix<double>& a,
                                      uint64_t seed, double tol) {
  MinEigReport rep;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
  if (lu.info() != Eigen::Success) {
    rep.singular = true;
    return rep;
  }
  // Most-magnified eigenvalue of A^-1; track the Ritz value of largest
  // absolute value from both ends of the Lanczos spectrum.
  const double right = lanczos_extreme(
      [&lu](const Vector& v) { return Vector(lu.solve(v)); }, a.rows(), true,
      seed, tol, 400);
  const double left = lanczos_extreme(
      [&lu](const Vector& v) { return Vector(lu.solve(v)); }, a.rows(), false,
      seed, tol, 400);
  const double mu = std::abs(right) >= std::abs(left) ? right : left;
  const double scale = a.coeffs().abs().maxCoeff();
  if (std::abs(mu) * scale > 1e13) {  // numerically singular
    rep.singular = true;
    return rep;
  }
  rep.system_eig = 1.0 / mu;
  rep.bilinear_eig = -rep.system_eig;
  return rep;
}

}  // namespace sbpsat
