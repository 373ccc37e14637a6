#include "sbpsat/reference.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace sbpsat {

#include "cubature_tables.inc"
#include "gauss_face_tables.inc"

Family family_from_string(const std::string& s) {
  if (s == "omega") return Family::Omega;
  if (s == "gamma") return Family::Gamma;
  throw Error("unknown family '" + s + "' (expected omega or gamma)");
}

std::string to_string(Family f) {
  return f == Family::Omega ? "omega" : "gamma";
}

std::array<double, 2> ReferenceTriangle::face_normal(int face) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (face) {
    case 0: return {0.0, -1.0};
    case 1: return {s, s};
    case 2: return {-1.0, 0.0};
    default: throw Error("face index out of range");
  }
}

double ReferenceTriangle::face_length(int face) {
  if (face == 1) return std::sqrt(2.0);
  if (face == 0 || face == 2) return 1.0;
  throw Error("face index out of range");
}

std::array<double, 2> ReferenceTriangle::face_point(int face, double t) {
  const auto& a = vertices[static_cast<size_t>(face)];
  const auto& b = vertices[static_cast<size_t>((face + 1) % 3)];
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
}

double monomial_moment(int i, int j) {
  // 1 / (C(i+j,i) * (i+j+1) * (i+j+2)); exact in double for i+j <= 40
  double binom = 1.0;
  for (int k = 1; k <= j; ++k) binom *= static_cast<double>(i + k) / k;
  return 1.0 / (binom * (i + j + 1) * (i + j + 2));
}

static std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

VolumeCubature read_cubature_table(std::istream& in) {
  VolumeCubature cub;
  int declared = -1;
  std::vector<std::array<double, 3>> records;
  bool have_family = false, have_p = false, have_degree = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (std::isalpha(static_cast<unsigned char>(line[0]))) {
      std::string key;
      ls >> key;
      if (key == "family") {
        std::string v;
        ls >> v;
        cub.family = family_from_string(v);
        have_family = true;
      } else if (key == "p") {
        ls >> cub.p;
        have_p = true;
      } else if (key == "degree") {
        ls >> cub.degree;
        have_degree = true;
      } else if (key == "nodes") {
        ls >> declared;
      } else {
        throw Error("cubature table: unknown header key '" + key + "'");
      }
      if (!ls) throw Error("cubature table: malformed header line '" + line + "'");
    } else {
      std::array<double, 3> rec{};
      ls >> rec[0] >> rec[1] >> rec[2];
      if (!ls) throw Error("cubature table: malformed record '" + line + "'");
      records.push_back(rec);
    }
  }
  if (!have_family || !have_p || !have_degree)
    throw Error("cubature table: missing family/p/degree header");
  if (declared >= 0 && declared != static_cast<int>(records.size()))
    throw Error("cubature table: node count mismatch");
  if (records.empty()) throw Error("cubature table: no node records");
  const int n = static_cast<int>(records.size());
  cub.nodes.resize(n, 2);
  cub.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    cub.nodes(i, 0) = records[static_cast<size_t>(i)][0];
    cub.nodes(i, 1) = records[static_cast<size_t>(i)][1];
    cub.weights(i) = records[static_cast<size_t>(i)][2];
    if (!(cub.weights(i) > 0.0))
      throw Error("cubature table: nonpositive weight");
  }
  return cub;
}

VolumeCubature load_cubature_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open cubature table '" + path + "'");
  return read_cubature_table(f);
}

void write_cubature_table(std::ostream& out, const VolumeCubature& cub) {
  out << "# symmetric triangle cubature on reference vertices (0,0) (1,0) (0,1)\n"
      << "# format v1: header keys, then one 'x y w' record per node\n"
      << "family " << to_string(cub.family) << "\n"
      << "p " << cub.p << "\n"
      << "degree " << cub.degree << "\n"
      << "nodes " << cub.size() << "\n";
  char buf[128];
  for (int i = 0; i < cub.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", cub.nodes(i, 0),
                  cub.nodes(i, 1), cub.weights(i));
    out << buf;
  }
}

VolumeCubature volume_cubature(Family family, int p) {
  if (p < 1 || p > 4)
    throw Error("volume_cubature: p must be in 1..4, got " + std::to_string(p));
  static const std::map<std::pair<Family, int>, const char*> tables = {
      {{Family::Omega, 1}, k_table_omega_p1},
      {{Family::Omega, 2}, k_table_omega_p2},
      {{Family::Omega, 3}, k_table_omega_p3},
      {{Family::Omega, 4}, k_table_omega_p4},
      {{Family::Gamma, 1}, k_table_gamma_p1},
      {{Family::Gamma, 2}, k_table_gamma_p2},
      {{Family::Gamma, 3}, k_table_gamma_p3},
      {{Family::Gamma, 4}, k_table_gamma_p4},
  };
  std::istringstream in(tables.at({family, p}));
  VolumeCubature cub = read_cubature_table(in);
  if (cub.family != family || cub.p != p)
    throw Error("volume_cubature: embedded table header mismatch");
  return cub;
}

FaceCubature face_cubature(int p) {
  if (p < 1 || p > 4)
    throw Error("face_cubature: p must be in 1..4, got " + std::to_string(p));
  const int n = p + 1;
  const double* xs[] = {kGaussX2, kGaussX3, kGaussX4, kGaussX5};
  const double* ws[] = {kGaussW2, kGaussW3, kGaussW4, kGaussW5};
  FaceCubature fc;
  fc.t.resize(n);
  fc.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    fc.t(i) = xs[p - 1][i];
    fc.weights(i) = ws[p - 1][i];
  }
  return fc;
}

// Gauss-Legendre on [0,1] for arbitrary n; used only by the collapsed oracle.
static void gauss_legendre_01(int n, Vector& t, Vector& w) {
  t.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    t(i) = (1.0 - x) / 2.0;  // ascending in t
    w(i) = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

VolumeCubature collapsed_cubature(int exact_degree) {
  const int nu = exact_degree / 2 + 1;
  const int nv = (exact_degree + 1) / 2 + 1;
  Vector tu, wu, tv, wv;
  gauss_legendre_01(nu, tu, wu);
  gauss_legendre_01(nv, tv, wv);
  VolumeCubature cub;
  cub.family = Family::Omega;
  cub.p = 0;
  cub.degree = exact_degree;
  cub.nodes.resize(nu * nv, 2);
  cub.weights.resize(nu * nv);
  int k = 0;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j, ++k) {
      // x = u(1-v), y = v; Jacobian (1-v)
      cub.nodes(k, 0) = tu(i) * (1.0 - tv(j));
      cub.nodes(k, 1) = tv(j);
      cub.weights(k) = wu(i) * wv(j) * (1.0 - tv(j));
    }
  }
  return cub;
}

}  // namespace sbpsat
