#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbpsat/reference.hpp"

using namespace sbpsat;

namespace {

int space_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

}  // namespace

TEST_CASE("basis is orthonormal under exact integration") {
  for (int degree = 1; degree <= 5; ++degree) {
    CAPTURE(degree);
    const VolumeCubature cub = collapsed_cubature(2 * degree + 2);
    const Matrix v = evaluate_basis(cub.nodes, degree);
    REQUIRE(v.cols() == space_dim(degree));
    const Matrix gram = v.transpose() * cub.weights.asDiagonal() * v;
    const Matrix eye = Matrix::Identity(v.cols(), v.cols());
    CHECK((gram - eye).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("first modes match closed forms") {
  // Mode 0 is the constant 1/area^(1/2) = sqrt(2); the degree-1 modes are
  // linear, so they integrate to zero against the constant.
  Points pts(3, 2);
  pts << 0.25, 0.25, 0.5, 0.1, 0.1, 0.6;
  const Matrix v = evaluate_basis(pts, 1);
  for (int i = 0; i < 3; ++i)
    CHECK(v(i, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("gradients match finite differences") {
  const double eps = 1e-6;
  Points pts(4, 2);
  pts << 0.3, 0.2, 0.15, 0.55, 0.6, 0.25, 0.05, 0.05;
  for (int degree = 1; degree <= 5; ++degree) {
    CAPTURE(degree);
    const BasisGradient g = evaluate_basis_gradient(pts, degree);
    Points xp = pts, xm = pts, yp = pts, ym = pts;
    xp.col(0).array() += eps;
    xm.col(0).array() -= eps;
    yp.col(1).array() += eps;
    ym.col(1).array() -= eps;
    const Matrix dx_fd =
        (evaluate_basis(xp, degree) - evaluate_basis(xm, degree)) / (2 * eps);
    const Matrix dy_fd =
        (evaluate_basis(yp, degree) - evaluate_basis(ym, degree)) / (2 * eps);
    CHECK((g.dx - dx_fd).lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK((g.dy - dy_fd).lpNorm<Eigen::Infinity>() < 1e-7);
  }
}

TEST_CASE("basis spans monomials: projection reproduces them exactly") {
  const int degree = 3;
  const VolumeCubature cub = collapsed_cubature(2 * degree + 2);
  const Matrix v = evaluate_basis(cub.nodes, degree);
  Points probe(5, 2);
  probe << 0.2, 0.3, 0.7, 0.1, 0.05, 0.9, 0.33, 0.33, 0.5, 0.5;
  const Matrix vp = evaluate_basis(probe, degree);
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; i + j <= degree; ++j) {
      Vector mono(cub.size());
      for (int q = 0; q < cub.size(); ++q)
        mono(q) = std::pow(cub.nodes(q, 0), i) * std::pow(cub.nodes(q, 1), j);
      // Orthonormality turns projection into plain quadrature sums.
      const Vector coeffs =
          v.transpose() * cub.weights.cwiseProduct(mono);
      for (int q = 0; q < probe.rows(); ++q) {
        const double exact =
            std::pow(probe(q, 0), i) * std::pow(probe(q, 1), j);
        CHECK(vp.row(q).dot(coeffs) == doctest::Approx(exact).epsilon(1e-11));
      }
    }
}
