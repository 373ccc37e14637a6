#pragma once

#include <array>
#include <iosfwd>

#include "sbpsat/reference.hpp"

namespace sbpsat {

/// Trace operators of one reference face: interpolation R to the face
/// cubature nodes, face weights b (scaled by reference face length), and the
/// constant outward unit normal.
struct FaceOperatorBundle {
  Matrix R;     // n_f x n
  Vector b;     // n_f, diag of B
  double nx = 0.0, ny = 0.0;

  Eigen::DiagonalMatrix<double, Eigen::Dynamic> B() const {
    return Eigen::DiagonalMatrix<double, Eigen::Dynamic>(b);
  }
};

/// Diagonal-norm operator pair (Dx, Dy) on the reference triangle together
/// with the pieces of its decomposition: H, Qx = Sx + Ex/2, and the boundary
/// matrices Ex = sum_f R' Nx B R.
struct SbpOperator {
  Family family = Family::Omega;
  int p = 0;
  int n = 0;
  VolumeCubature cubature;  // nodes double as operator nodes; weights = diag H
  Vector h;
  Matrix Qx, Qy, Dx, Dy, Ex, Ey;
  std::array<FaceOperatorBundle, 3> face;
};

/// R, B, N for every face of the reference element.  Gamma: R is the 1D
/// polynomial interpolation from the p+1 on-face nodes (zero elsewhere);
/// Omega: R is the minimum-norm solution of the degree-p exactness equations
/// in the H^-1 metric.
std::array<FaceOperatorBundle, 3> build_face_operators(const VolumeCubature& cub,
                                                       const FaceCubature& fc);

/// Ex, Ey from the face decomposition.
void build_boundary_matrices(const std::array<FaceOperatorBundle, 3>& face,
                             int n, Matrix& Ex, Matrix& Ey);

/// Full operator: solves for the skew parts as the minimum-Frobenius-norm
/// least-squares solution of the degree-p accuracy conditions.  Throws if
/// the accuracy system is inconsistent with the cubature.
SbpOperator build_sbp_operator(const VolumeCubature& cub);

/// Same, starting from the frozen node table for (family, p).
SbpOperator build_sbp_operator(Family family, int p);

/// Worst-case defects of the defining properties.
struct SbpDiagnostics {
  double accuracy = 0.0;        // max |Dx v - dv/dx| over degree-p basis, both dirs
  double skew = 0.0;            // ||Qx + Qx' - Ex||_max, both dirs
  double decomposition = 0.0;   // ||Ex - sum R' Nx B R||_max, both dirs
  double boundary = 0.0;        // max |p' Ex q - exact edge integral|, degree-p pairs
  double min_h = 0.0;           // smallest norm weight (positivity)
  bool pass = false;
};

SbpDiagnostics verify_sbp(const SbpOperator& op, double tol_accuracy = 1e-10,
                          double tol_skew = 1e-14, double tol_boundary = 1e-10);

/// Plain-text archive (17 significant digits) with per-matrix FNV-1a
/// checksums.  load_operator throws on checksum or shape mismatch.
void dump_operator(std::ostream& out, const SbpOperator& op);
SbpOperator load_operator(std::istream& in);

}  // namespace sbpsat
