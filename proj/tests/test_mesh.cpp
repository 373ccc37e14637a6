#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sbpsat/mesh.hpp"

using namespace sbpsat;

TEST_CASE("structured mesh counts") {
  SUBCASE("n=1") {
    const TriangleMesh mesh = structured_mesh(1);
    CHECK(mesh.num_vertices() == 4);
    CHECK(mesh.num_elements() == 2);
    const Connectivity conn = build_connectivity(mesh);
    CHECK(conn.interior.size() == 1);
    CHECK(conn.boundary.size() == 4);
  }
  SUBCASE("n=2") {
    const TriangleMesh mesh = structured_mesh(2);
    CHECK(mesh.num_elements() == 8);
    const Connectivity conn = build_connectivity(mesh);
    CHECK(conn.interior.size() == 8);
    CHECK(conn.boundary.size() == 8);
  }
  SUBCASE("n=8 gives K=128") {
    CHECK(structured_mesh(8).num_elements() == 128);
  }
  SUBCASE("n=64 gives K=8192") {
    CHECK(structured_mesh(64).num_elements() == 8192);
  }
}

TEST_CASE("euler identity on structured meshes") {
  for (int n : {1, 2, 5, 8}) {
    const TriangleMesh mesh = structured_mesh(n);
    const Connectivity conn = build_connectivity(mesh);
    const int v = mesh.num_vertices();
    const int e = static_cast<int>(conn.interior.size() + conn.boundary.size());
    const int f = mesh.num_elements();
    CHECK(v - e + f == 1);  // planar triangulation of a disk
  }
}

TEST_CASE("areas and metrics") {
  const TriangleMesh mesh = structured_mesh(8);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeometry g = element_metrics(mesh, e);
    CHECK(g.det_j == doctest::Approx(1.0 / 64).epsilon(1e-13));
    total += g.det_j * 0.5;
    for (int f = 0; f < 3; ++f) {
      const auto& nrm = g.face_normal[static_cast<size_t>(f)];
      CHECK(std::hypot(nrm[0], nrm[1]) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interior face geometry agrees from both sides") {
  TriangleMesh mesh = structured_mesh(4);
  perturb_mesh(mesh, 0.3, 123);
  const Connectivity conn = build_connectivity(mesh);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    total += element_metrics(mesh, e).det_j * 0.5;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  for (const auto& face : conn.interior) {
    const ElementGeometry gk = element_metrics(mesh, face.elem_k);
    const ElementGeometry gn = element_metrics(mesh, face.elem_n);
    const auto fk = static_cast<size_t>(face.face_k);
    const auto fn = static_cast<size_t>(face.face_n);
    CHECK(gk.face_length[fk] == doctest::Approx(gn.face_length[fn]).epsilon(1e-12));
    // Antiparallel unit normals.
    CHECK(gk.face_normal[fk][0] ==
          doctest::Approx(-gn.face_normal[fn][0]).epsilon(1e-12));
    CHECK(gk.face_normal[fk][1] ==
          doctest::Approx(-gn.face_normal[fn][1]).epsilon(1e-12));
  }
}

TEST_CASE("interior faces pair reversed vertex order") {
  const TriangleMesh mesh = structured_mesh(3);
  const Connectivity conn = build_connectivity(mesh);
  for (const auto& face : conn.interior) {
    const int ka = mesh.elements(face.elem_k, face.face_k);
    const int kb = mesh.elements(face.elem_k, (face.face_k + 1) % 3);
    const int na = mesh.elements(face.elem_n, face.face_n);
    const int nb = mesh.elements(face.elem_n, (face.face_n + 1) % 3);
    CHECK(ka == nb);
    CHECK(kb == na);
  }
}

TEST_CASE("perturbation is deterministic, bounded, and boundary-fixed") {
  TriangleMesh a = structured_mesh(16);
  TriangleMesh b = structured_mesh(16);
  const TriangleMesh base = a;
  perturb_mesh(a, 0.25, 7913);
  perturb_mesh(b, 0.25, 7913);
  CHECK((a.vertices - b.vertices).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.vertices - base.vertices).lpNorm<Eigen::Infinity>() > 0.0);
  const double h = 1.0 / 16;
  CHECK((a.vertices - base.vertices).lpNorm<Eigen::Infinity>() <= 0.25 * h);
  for (int v = 0; v < base.num_vertices(); ++v) {
    const double x = base.vertices(v, 0), y = base.vertices(v, 1);
    const bool on_boundary = x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0;
    if (on_boundary) {
      CHECK(a.vertices(v, 0) == x);
      CHECK(a.vertices(v, 1) == y);
    }
  }
  for (int e = 0; e < a.num_elements(); ++e)
    CHECK(element_metrics(a, e).det_j > 0.0);
}

TEST_CASE("zero magnitude leaves the mesh untouched") {
  TriangleMesh a = structured_mesh(5);
  const TriangleMesh base = a;
  perturb_mesh(a, 0.0, 42);
  CHECK((a.vertices - base.vertices).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("strong perturbation reaches a near-degenerate angle") {
  TriangleMesh mesh = structured_mesh(16);
  perturb_mesh(mesh, 0.45, 7913);
  for (int e = 0; e < mesh.num_elements(); ++e)
    CHECK(element_metrics(mesh, e).det_j > 0.0);
  const double angle = max_interior_angle(mesh);
  CHECK(angle > 120.0);
  CHECK(angle < 180.0);
}

TEST_CASE("midpoint subdivision refines a perturbed mesh") {
  TriangleMesh coarse = structured_mesh(4);
  perturb_mesh(coarse, 0.3, 99);
  const TriangleMesh fine = midpoint_subdivide(coarse);

  CHECK(fine.num_elements() == 4 * coarse.num_elements());
  CHECK(fine.boundary_markers.size() == 2 * coarse.boundary_markers.size());
  // Coarse vertices keep their indices.
  CHECK((fine.vertices.topRows(coarse.num_vertices()) - coarse.vertices)
            .lpNorm<Eigen::Infinity>() == 0.0);

  // Each child covers a quarter of its parent, in the parent's orientation.
  for (int k = 0; k < coarse.num_elements(); ++k) {
    const double parent = element_metrics(coarse, k).det_j;
    for (int c = 0; c < 4; ++c)
      CHECK(element_metrics(fine, 4 * k + c).det_j ==
            doctest::Approx(0.25 * parent).epsilon(1e-13));
  }

  const Connectivity conn = build_connectivity(fine);
  const int v = fine.num_vertices();
  const int e = static_cast<int>(conn.interior.size() + conn.boundary.size());
  CHECK(v - e + fine.num_elements() == 1);
  for (const auto& bf : conn.boundary) CHECK(bf.tag >= 0);
}

TEST_CASE("subdivision of the structured mesh is the finer structured mesh") {
  // Same diagonal in every square, so subdividing n=2 reproduces n=4 up to
  // ordering; compare total area and boundary-edge multiset sizes per tag.
  const TriangleMesh fine = midpoint_subdivide(structured_mesh(2));
  CHECK(fine.num_elements() == structured_mesh(4).num_elements());
  double total = 0.0;
  for (int e = 0; e < fine.num_elements(); ++e)
    total += element_metrics(fine, e).det_j * 0.5;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  int per_tag[4] = {0, 0, 0, 0};
  for (const auto& bm : fine.boundary_markers) per_tag[bm[2]]++;
  for (int t = 0; t < 4; ++t) CHECK(per_tag[t] == 4);
}

TEST_CASE("mesh io round-trips") {
  TriangleMesh mesh = structured_mesh(3);
  perturb_mesh(mesh, 0.2, 5);
  std::ostringstream out;
  write_mesh(out, mesh);
  std::istringstream in(out.str());
  const TriangleMesh back = read_mesh(in);
  CHECK((back.vertices - mesh.vertices).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.elements - mesh.elements).lpNorm<Eigen::Infinity>() == 0);
  REQUIRE(back.boundary_markers.size() == mesh.boundary_markers.size());
  for (size_t i = 0; i < back.boundary_markers.size(); ++i)
    CHECK(back.boundary_markers[i] == mesh.boundary_markers[i]);
}
