#include "sbpsat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "sbpsat/reference.hpp"

namespace sbpsat {

TriangleMesh structured_mesh(int n) {
  if (n < 1) throw Error("structured_mesh: n must be >= 1");
  TriangleMesh m;
  const int nv = (n + 1) * (n + 1);
  m.vertices.resize(nv, 2);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      m.vertices(vid(i, j), 0) = static_cast<double>(i) / n;
      m.vertices(vid(i, j), 1) = static_cast<double>(j) / n;
    }
  m.elements.resize(2 * n * n, 3);
  int e = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1),
                d = vid(i, j + 1);
      m.elements.row(e++) << a, b, c;  // same diagonal a-c in every square
      m.elements.row(e++) << a, c, d;
    }
  for (int i = 0; i < n; ++i) {
    m.boundary_markers.push_back({vid(i, 0), vid(i + 1, 0), 0});
    m.boundary_markers.push_back({vid(n, i), vid(n, i + 1), 1});
    m.boundary_markers.push_back({vid(i, n), vid(i + 1, n), 2});
    m.boundary_markers.push_back({vid(0, i), vid(0, i + 1), 3});
  }
  return m;
}

namespace {

double signed_area2(const TriangleMesh& m, int e) {
  const auto a = m.vertices.row(m.elements(e, 0));
  const auto b = m.vertices.row(m.elements(e, 1));
  const auto c = m.vertices.row(m.elements(e, 2));
  return (b(0) - a(0)) * (c(1) - a(1)) - (b(1) - a(1)) * (c(0) - a(0));
}

// top 53 bits -> [0,1); keeps draws identical across platforms
double unit_uniform(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace

void perturb_mesh(TriangleMesh& mesh, double magnitude, uint64_t seed,
                  int max_retries) {
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();

  std::vector<char> on_boundary(static_cast<size_t>(nv), 0);
  std::map<std::pair<int, int>, int> edge_count;
  for (int e = 0; e < ne; ++e)
    for (int f = 0; f < 3; ++f) {
      int a = mesh.elements(e, f), b = mesh.elements(e, (f + 1) % 3);
      if (a > b) std::swap(a, b);
      edge_count[{a, b}]++;
    }
  for (const auto& [edge, cnt] : edge_count)
    if (cnt == 1) {
      on_boundary[static_cast<size_t>(edge.first)] = 1;
      on_boundary[static_cast<size_t>(edge.second)] = 1;
    }

  // shortest incident edge in the unperturbed mesh
  std::vector<double> hv(static_cast<size_t>(nv),
                         std::numeric_limits<double>::max());
  for (const auto& [edge, cnt] : edge_count) {
    const double len =
        (mesh.vertices.row(edge.first) - mesh.vertices.row(edge.second)).norm();
    hv[static_cast<size_t>(edge.first)] = std::min(hv[static_cast<size_t>(edge.first)], len);
    hv[static_cast<size_t>(edge.second)] = std::min(hv[static_cast<size_t>(edge.second)], len);
  }

  std::vector<std::vector<int>> incident(static_cast<size_t>(nv));
  for (int e = 0; e < ne; ++e)
    for (int k = 0; k < 3; ++k)
      incident[static_cast<size_t>(mesh.elements(e, k))].push_back(e);

  std::mt19937_64 eng(seed);
  for (int v = 0; v < nv; ++v) {
    if (on_boundary[static_cast<size_t>(v)]) continue;
    const double x0 = mesh.vertices(v, 0), y0 = mesh.vertices(v, 1);
    const double box = magnitude * hv[static_cast<size_t>(v)];
    bool placed = false;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
      const double dx = (2.0 * unit_uniform(eng) - 1.0) * box;
      const double dy = (2.0 * unit_uniform(eng) - 1.0) * box;
      mesh.vertices(v, 0) = x0 + dx;
      mesh.vertices(v, 1) = y0 + dy;
      bool ok = true;
      for (int e : incident[static_cast<size_t>(v)])
        if (signed_area2(mesh, e) <= 0.0) {
          ok = false;
          break;
        }
      if (ok) {
        placed = true;
        break;
      }
    }
    if (!placed) {
      mesh.vertices(v, 0) = x0;
      mesh.vertices(v, 1) = y0;
      throw Error("perturb_mesh: vertex " + std::to_string(v) +
                  " rejected after " + std::to_string(max_retries) + " redraws");
    }
  }
}

TriangleMesh midpoint_subdivide(const TriangleMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::map<std::pair<int, int>, int> midpoint;
  int next = nv;
  auto mid = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    const auto [it, inserted] = midpoint.try_emplace(key, next);
    if (inserted) ++next;
    return it->second;
  };

  TriangleMesh out;
  out.elements.resize(4 * mesh.num_elements(), 3);
  int e = 0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const int a = mesh.elements(k, 0), b = mesh.elements(k, 1),
              c = mesh.elements(k, 2);
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.elements.row(e++) << a, ab, ca;
    out.elements.row(e++) << ab, b, bc;
    out.elements.row(e++) << ca, bc, c;
    out.elements.row(e++) << ab, bc, ca;
  }
  for (const auto& bm : mesh.boundary_markers) {
    const int m = mid(bm[0], bm[1]);
    out.boundary_markers.push_back({bm[0], m, bm[2]});
    out.boundary_markers.push_back({m, bm[1], bm[2]});
  }
  out.vertices.resize(next, 2);
  out.vertices.topRows(nv) = mesh.vertices;
  for (const auto& [key, id] : midpoint)
    out.vertices.row(id) =
        0.5 * (mesh.vertices.row(key.first) + mesh.vertices.row(key.second));
  return out;
}

Connectivity build_connectivity(const TriangleMesh& mesh) {
  struct Side {
    int elem, face, va, vb;  // directed traversal va -> vb
  };
  std::map<std::pair<int, int>, std::vector<Side>> edges;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int f = 0; f < 3; ++f) {
      const int a = mesh.elements(e, f), b = mesh.elements(e, (f + 1) % 3);
      edges[{std::min(a, b), std::max(a, b)}].push_back({e, f, a, b});
    }

  std::map<std::pair<int, int>, int> marker;
  for (const auto& bm : mesh.boundary_markers)
    marker[{std::min(bm[0], bm[1]), std::max(bm[0], bm[1])}] = bm[2];

  Connectivity conn;
  for (const auto& [key, sides] : edges) {
    if (sides.size() > 2)
      throw Error("build_connectivity: non-manifold edge (" +
                  std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    if (sides.size() == 2) {
      const Side& k = sides[0];
      const Side& n = sides[1];
      if (k.va != n.vb || k.vb != n.va)
        throw Error("build_connectivity: inconsistent orientation on shared edge");
      conn.interior.push_back({k.elem, k.face, n.elem, n.face});
    } else {
      const auto it = marker.find(key);
      if (it == marker.end())
        throw Error("build_connectivity: hull edge without boundary marker");
      conn.boundary.push_back({sides[0].elem, sides[0].face, it->second});
    }
  }
  return conn;
}

ElementGeometry element_metrics(const TriangleMesh& mesh, int elem) {
  if (elem < 0 || elem >= mesh.num_elements())
    throw Error("element_metrics: element index out of range");
  ElementGeometry g;
  const auto p0 = mesh.vertices.row(mesh.elements(elem, 0));
  const auto p1 = mesh.vertices.row(mesh.elements(elem, 1));
  const auto p2 = mesh.vertices.row(mesh.elements(elem, 2));
  g.jac << p1(0) - p0(0), p2(0) - p0(0), p1(1) - p0(1), p2(1) - p0(1);
  g.det_j = g.jac.determinant();
  if (g.det_j <= 0.0)
    throw Error("element_metrics: nonpositive area in element " +
                std::to_string(elem));
  g.inv_jac = g.jac.inverse();
  for (int f = 0; f < 3; ++f) {
    const auto a = mesh.vertices.row(mesh.elements(elem, f));
    const auto b = mesh.vertices.row(mesh.elements(elem, (f + 1) % 3));
    const double tx = b(0) - a(0), ty = b(1) - a(1);
    const double len = std::hypot(tx, ty);
    g.face_length[static_cast<size_t>(f)] = len;
    g.face_normal[static_cast<size_t>(f)] = {ty / len, -tx / len};
    g.face_scale[static_cast<size_t>(f)] = len / ReferenceTriangle::face_length(f);
    g.contravariant_scale[static_cast<size_t>(f)] =
        g.face_scale[static_cast<size_t>(f)] / g.det_j;
  }
  return g;
}

double max_interior_angle(const TriangleMesh& mesh) {
  double worst = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int k = 0; k < 3; ++k) {
      const auto o = mesh.vertices.row(mesh.elements(e, k));
      const auto a = mesh.vertices.row(mesh.elements(e, (k + 1) % 3));
      const auto b = mesh.vertices.row(mesh.elements(e, (k + 2) % 3));
      const Eigen::Vector2d u = (a - o).transpose(), v = (b - o).transpose();
      const double c = u.dot(v) / (u.norm() * v.norm());
      worst = std::max(worst, std::acos(std::clamp(c, -1.0, 1.0)));
    }
  return worst * 180.0 / M_PI;
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
  out << "# triangle mesh v1\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  char buf[80];
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", mesh.vertices(v, 0),
                  mesh.vertices(v, 1));
    out << buf;
  }
  out << "elements " << mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e)
    out << mesh.elements(e, 0) << ' ' << mesh.elements(e, 1) << ' '
        << mesh.elements(e, 2) << "\n";
  out << "boundary " << mesh.boundary_markers.size() << "\n";
  for (const auto& bm : mesh.boundary_markers)
    out << bm[0] << ' ' << bm[1] << ' ' << bm[2] << "\n";
}

TriangleMesh read_mesh(std::istream& in) {
  TriangleMesh mesh;
  std::string line, key;
  long count = 0;
  auto next_section = [&](const std::string& want) -> long {
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      ls >> key >> count;
      if (!ls || key != want)
        throw Error("mesh file: expected '" + want + "' section, got '" + line + "'");
      return count;
    }
    throw Error("mesh file: missing '" + want + "' section");
  };

  const long nv = next_section("vertices");
  mesh.vertices.resize(nv, 2);
  for (long v = 0; v < nv; ++v) {
    if (!(in >> mesh.vertices(v, 0) >> mesh.vertices(v, 1)))
      throw Error("mesh file: malformed vertex record");
  }
  const long ne = next_section("elements");
  mesh.elements.resize(ne, 3);
  for (long e = 0; e < ne; ++e) {
    if (!(in >> mesh.elements(e, 0) >> mesh.elements(e, 1) >> mesh.elements(e, 2)))
      throw Error("mesh file: malformed element record");
    for (int k = 0; k < 3; ++k)
      if (mesh.elements(e, k) < 0 || mesh.elements(e, k) >= nv)
        throw Error("mesh file: element vertex index out of range");
  }
  const long nb = next_section("boundary");
  for (long b = 0; b < nb; ++b) {
    std::array<int, 3> bm{};
    if (!(in >> bm[0] >> bm[1] >> bm[2]))
      throw Error("mesh file: malformed boundary record");
    mesh.boundary_markers.push_back(bm);
  }
  return mesh;
}

}  // namespace sbpsat
