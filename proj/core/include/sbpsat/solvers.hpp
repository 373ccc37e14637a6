#pragma once

#include <cstdint>

#include <Eigen/Sparse>

#include "sbpsat/assembly.hpp"
#include "sbpsat/common.hpp"

namespace sbpsat {

/// Direct sparse solve of A u = b with one step of iterative refinement.
/// Requires A symmetric positive definite (alpha_relax = 1 penalties);
/// throws a definiteness error otherwise and verifies the backward error
/// |A u - b| <= 1e-10 (|A||u| + |b|).
Vector solve_steady(const GlobalSystem& sys);

/// Largest eigenvalue of a symmetric sparse matrix by Lanczos iteration
/// with full reorthogonalization and a seeded start vector.
double largest_eigenvalue(const Eigen::SparseMatrix<double>& a,
                          uint64_t seed = 20240915, double tol = 1e-8,
                          int max_iter = 400);

/// Smallest (leftmost) eigenvalue, from Lanczos on -A.
double smallest_eigenvalue(const Eigen::SparseMatrix<double>& a,
                           uint64_t seed = 20240915, double tol = 1e-8,
                           int max_iter = 400);

/// lambda_max / lambda_min of a symmetric positive definite matrix;
/// lambda_min via shift-invert at zero.
double condition_number(const Eigen::SparseMatrix<double>& a,
                        uint64_t seed = 20240915);

struct MinEigReport {
  double system_eig = 0.0;    // eigenvalue of A nearest zero
  double bilinear_eig = 0.0;  // same eigenvalue of -A (sign flip)
  bool singular = false;
};

/// Eigenvalue of symmetric A with the smallest magnitude, via shift-invert
/// Lanczos at zero (sparse LU). Singular A is reported, not thrown.
MinEigReport min_magnitude_eigenvalue(const Eigen::SparseMatrix<double>& a,
                                      uint64_t seed = 20240915,
                                      double tol = 1e-8);

}  // namespace sbpsat
