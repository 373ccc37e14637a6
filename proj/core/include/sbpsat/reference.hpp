#pragma once

#include <array>
#include <iosfwd>

#include "sbpsat/common.hpp"

namespace sbpsat {

/// Reference triangle with vertices (0,0), (1,0), (0,1).
/// Face k runs from vertex k to vertex (k+1)%3; normals point outward.
struct ReferenceTriangle {
  static constexpr std::array<std::array<double, 2>, 3> vertices{
      {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};

  static std::array<double, 2> face_normal(int face);
  static double face_length(int face);
  static constexpr double area = 0.5;

  /// Map an arc-length parameter t in [0,1] along face k to reference coords.
  static std::array<double, 2> face_point(int face, double t);
};

/// Volume cubature: nodes and positive weights on the reference triangle.
/// The node set doubles as the operator node set; weights form the norm H.
struct VolumeCubature {
  Family family = Family::Omega;
  int p = 0;       // operator degree the node set belongs to
  int degree = 0;  // polynomial degree of cubature exactness
  Points nodes;    // n x 2
  Vector weights;  // n, strictly positive

  int size() const { return static_cast<int>(weights.size()); }
};

/// Face cubature on the parameter interval [0,1]; weights sum to one.
struct FaceCubature {
  Vector t;
  Vector weights;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Frozen node table for (family, p); p in 1..4.  Throws Error otherwise.
VolumeCubature volume_cubature(Family family, int p);

/// (p+1)-node Legendre-Gauss rule, exact for degree 2p+1 integrands.
FaceCubature face_cubature(int p);

/// Plain-text table format: '#' comments, header keys family/p/degree/nodes,
/// then one "x y w" record per node at 17 significant digits.
VolumeCubature read_cubature_table(std::istream& in);
VolumeCubature load_cubature_table(const std::string& path);
void write_cubature_table(std::ostream& out, const VolumeCubature& cub);

/// Orthonormal graded basis of total degree <= degree on the reference
/// triangle: V(i,k) = phi_k at point i.  Modes are ordered by total degree.
Matrix evaluate_basis(const Points& pts, int degree);

struct BasisGradient {
  Matrix dx, dy;
};
BasisGradient evaluate_basis_gradient(const Points& pts, int degree);

/// Exact integral of x^i y^j over the reference triangle: i! j! / (i+j+2)!.
double monomial_moment(int i, int j);

/// Tensor-product Gauss rule collapsed onto the triangle, exact for the
/// requested total degree.  Independent of the frozen tables; used as an
/// oracle and for error integration.
VolumeCubature collapsed_cubature(int exact_degree);

}  // namespace sbpsat
