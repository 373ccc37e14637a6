#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sbpsat/common.hpp"

namespace sbpsat {

/// Unstructured conforming triangulation.  Elements are counterclockwise
/// vertex triples; boundary_markers are (va, vb, tag) records for every hull
/// edge (unordered pair).
struct TriangleMesh {
  Points vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> elements;
  std::vector<std::array<int, 3>> boundary_markers;

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_elements() const { return static_cast<int>(elements.rows()); }
};

/// n x n squares on the unit square, each split along the same diagonal into
/// two triangles; 2n^2 elements.  Boundary tags: 0 bottom, 1 right, 2 top,
/// 3 left.
TriangleMesh structured_mesh(int n);

/// Displace interior vertices by a uniform draw from the box
/// [-magnitude*h, magnitude*h]^2, where h is the shortest edge incident to
/// the vertex in the input mesh.  A displacement producing a nonpositive
/// element area is redrawn; more than max_retries redraws for one vertex is
/// an error.  Generator: std::mt19937_64 seeded with `seed`; uniforms take
/// the top 53 bits of each draw, so results are identical across platforms.
void perturb_mesh(TriangleMesh& mesh, double magnitude, uint64_t seed,
                  int max_retries = 1000);

/// Uniform refinement: every element splits into four congruent children by
/// connecting edge midpoints; children keep the parent orientation.  Input
/// vertices keep their indices, each boundary marker splits into two halves
/// with the same tag.  Repeated subdivision yields a nested family with 4x
/// elements per level.
TriangleMesh midpoint_subdivide(const TriangleMesh& mesh);

/// Interior face: elem_n's trace nodes traverse the shared edge in reverse
/// order relative to elem_k (both elements are counterclockwise and the face
/// cubature is symmetric, so the alignment permutation is index reversal).
struct InteriorFace {
  int elem_k, face_k, elem_n, face_n;
};

struct BoundaryFace {
  int elem, face, tag;
};

struct Connectivity {
  std::vector<InteriorFace> interior;
  std::vector<BoundaryFace> boundary;
};

/// Face lists from shared vertex pairs.  Throws on non-manifold edges
/// (more than two incident elements), inconsistent orientation, or hull
/// edges without a boundary marker.
Connectivity build_connectivity(const TriangleMesh& mesh);

/// Constant metric data of the affine map from the reference triangle.
struct ElementGeometry {
  Eigen::Matrix2d jac;      // d(x,y)/d(xi,eta)
  Eigen::Matrix2d inv_jac;  // d(xi,eta)/d(x,y)
  double det_j = 0.0;       // > 0
  std::array<double, 3> face_length{};
  std::array<std::array<double, 2>, 3> face_normal{};  // outward unit
  std::array<double, 3> face_scale{};          // physical / reference length
  std::array<double, 3> contravariant_scale{}; // face_scale / det_j
};

/// Throws on nonpositive element area (degenerate or clockwise element).
ElementGeometry element_metrics(const TriangleMesh& mesh, int elem);

/// Largest interior angle over all elements, in degrees.
double max_interior_angle(const TriangleMesh& mesh);

/// Plain-text mesh format: vertices/elements/boundary sections.
void write_mesh(std::ostream& out, const TriangleMesh& mesh);
TriangleMesh read_mesh(std::istream& in);

}  // namespace sbpsat
