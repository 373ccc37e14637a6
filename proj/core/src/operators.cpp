#include "sbpsat/operators.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace sbpsat {

namespace {

double binom(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b *= static_cast<double>(n - k + i) / i;
  return b;
}

// int_0^1 (1-t)^a t^b dt
double beta_moment(int a, int b) { return 1.0 / (binom(a + b, a) * (a + b + 1)); }

// Analytic boundary moments of the reference triangle for x^a y^b.
double edge_moment_x(int a, int b) {
  double v = beta_moment(a, b);              // hypotenuse, nx dGamma = dt
  if (a == 0) v -= 1.0 / (b + 1);            // left edge, nx = -1
  return v;
}
double edge_moment_y(int a, int b) {
  double v = beta_moment(a, b);
  if (b == 0) v -= 1.0 / (a + 1);
  return v;
}

constexpr double kFaceNodeTol = 1e-10;  // distance for on-face membership

struct FaceTrace {
  std::vector<int> idx;  // volume node indices on the face
  std::vector<double> t; // arc parameters in [0,1]
};

FaceTrace face_trace_nodes(const VolumeCubature& cub, int face) {
  const auto& a = ReferenceTriangle::vertices[static_cast<size_t>(face)];
  const auto& b = ReferenceTriangle::vertices[static_cast<size_t>((face + 1) % 3)];
  const double ex = b[0] - a[0], ey = b[1] - a[1];
  const double len2 = ex * ex + ey * ey;
  const double len = std::sqrt(len2);
  FaceTrace tr;
  for (int i = 0; i < cub.size(); ++i) {
    const double dx = cub.nodes(i, 0) - a[0], dy = cub.nodes(i, 1) - a[1];
    const double dist = std::abs(ex * dy - ey * dx) / len;
    if (dist >= kFaceNodeTol) continue;
    const double t = (dx * ex + dy * ey) / len2;
    if (t < -kFaceNodeTol || t > 1.0 + kFaceNodeTol) continue;
    tr.idx.push_back(i);
    tr.t.push_back(t);
  }
  return tr;
}

}  // namespace

std::array<FaceOperatorBundle, 3> build_face_operators(const VolumeCubature& cub,
                                                       const FaceCubature& fc) {
  const int n = cub.size();
  const int nf = fc.size();
  std::array<FaceOperatorBundle, 3> out;

  // Omega: shared pieces of the H^-1-metric minimum-norm solve R V = V_f.
  Matrix proj;  // (V' H V)^-1 V' H, maps nodal values to modal coefficients
  if (cub.family == Family::Omega) {
    const Matrix V = evaluate_basis(cub.nodes, cub.p);
    const Matrix VtH = V.transpose() * cub.weights.asDiagonal();
    proj = (VtH * V).ldlt().solve(VtH);
  }

  for (int face = 0; face < 3; ++face) {
    FaceOperatorBundle& fb = out[static_cast<size_t>(face)];
    const auto normal = ReferenceTriangle::face_normal(face);
    fb.nx = normal[0];
    fb.ny = normal[1];
    fb.b = fc.weights * ReferenceTriangle::face_length(face);

    Points fpts(nf, 2);
    for (int j = 0; j < nf; ++j) {
      const auto xy = ReferenceTriangle::face_point(face, fc.t(j));
      fpts(j, 0) = xy[0];
      fpts(j, 1) = xy[1];
    }

    if (cub.family == Family::Gamma) {
      const FaceTrace tr = face_trace_nodes(cub, face);
      if (static_cast<int>(tr.idx.size()) != cub.p + 1)
        throw Error("build_face_operators: expected " + std::to_string(cub.p + 1) +
                    " nodes on face " + std::to_string(face) + ", found " +
                    std::to_string(tr.idx.size()));
      fb.R = Matrix::Zero(nf, n);
      for (int j = 0; j < nf; ++j) {
        for (size_t k = 0; k < tr.idx.size(); ++k) {
          double lk = 1.0;  // 1D Lagrange basis at the face cubature parameter
          for (size_t m = 0; m < tr.idx.size(); ++m) {
            if (m == k) continue;
            lk *= (fc.t(j) - tr.t[m]) / (tr.t[k] - tr.t[m]);
          }
          fb.R(j, tr.idx[k]) = lk;
        }
      }
    } else {
      const Matrix Vf = evaluate_basis(fpts, cub.p);
      fb.R = Vf * proj;
    }
  }
  return out;
}

void build_boundary_matrices(const std::array<FaceOperatorBundle, 3>& face,
                             int n, Matrix& Ex, Matrix& Ey) {
  Ex = Matrix::Zero(n, n);
  Ey = Matrix::Zero(n, n);
  for (const auto& fb : face) {
    const Matrix RtB = fb.R.transpose() * fb.b.asDiagonal();
    Ex += fb.nx * RtB * fb.R;
    Ey += fb.ny * RtB * fb.R;
  }
}

namespace {

// Minimum-Frobenius-norm solve of S V = Rhs over skew-symmetric S.
Matrix solve_skew_part(const Matrix& V, const Matrix& Rhs) {
  const int n = static_cast<int>(V.rows());
  const int nb = static_cast<int>(V.cols());
  const int nu = n * (n - 1) / 2;
  Matrix A = Matrix::Zero(n * nb, nu);
  Vector rhs(n * nb);
  for (int j = 0; j < nb; ++j)
    for (int i = 0; i < n; ++i) rhs(j * n + i) = Rhs(i, j);
  int col = 0;
  for (int i = 1; i < n; ++i) {
    for (int k = 0; k < i; ++k, ++col) {
      // unknown s_ik sits at S(i,k) = +s and S(k,i) = -s
      for (int j = 0; j < nb; ++j) {
        A(j * n + i, col) += V(k, j);
        A(j * n + k, col) -= V(i, j);
      }
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  const Vector s = cod.solve(rhs);
  const double resid = (A * s - rhs).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  if (resid > 1e-11 * scale)
    throw Error("build_sbp_operator: accuracy system inconsistent (residual " +
                std::to_string(resid) + "); cubature is not degree 2p-1");
  Matrix S = Matrix::Zero(n, n);
  col = 0;
  for (int i = 1; i < n; ++i)
    for (int k = 0; k < i; ++k, ++col) {
      S(i, k) = s(col);
      S(k, i) = -s(col);
    }
  return S;
}

}  // namespace

SbpOperator build_sbp_operator(const VolumeCubature& cub) {
  SbpOperator op;
  op.family = cub.family;
  op.p = cub.p;
  op.cubature = cub;
  op.n = op.cubature.size();
  op.h = op.cubature.weights;
  const int p = op.p;
  op.face = build_face_operators(op.cubature, face_cubature(p));
  build_boundary_matrices(op.face, op.n, op.Ex, op.Ey);

  const Matrix V = evaluate_basis(op.cubature.nodes, p);
  const BasisGradient G = evaluate_basis_gradient(op.cubature.nodes, p);
  const Matrix Sx = solve_skew_part(V, op.h.asDiagonal() * G.dx - 0.5 * op.Ex * V);
  const Matrix Sy = solve_skew_part(V, op.h.asDiagonal() * G.dy - 0.5 * op.Ey * V);
  op.Qx = Sx + 0.5 * op.Ex;
  op.Qy = Sy + 0.5 * op.Ey;
  op.Dx = op.h.cwiseInverse().asDiagonal() * op.Qx;
  op.Dy = op.h.cwiseInverse().asDiagonal() * op.Qy;
  return op;
}

SbpOperator build_sbp_operator(Family family, int p) {
  return build_sbp_operator(volume_cubature(family, p));
}

SbpDiagnostics verify_sbp(const SbpOperator& op, double tol_accuracy,
                          double tol_skew, double tol_boundary) {
  SbpDiagnostics d;
  const Matrix V = evaluate_basis(op.cubature.nodes, op.p);
  const BasisGradient G = evaluate_basis_gradient(op.cubature.nodes, op.p);
  d.accuracy = std::max((op.Dx * V - G.dx).lpNorm<Eigen::Infinity>(),
                        (op.Dy * V - G.dy).lpNorm<Eigen::Infinity>());
  d.skew = std::max((op.Qx + op.Qx.transpose() - op.Ex).lpNorm<Eigen::Infinity>(),
                    (op.Qy + op.Qy.transpose() - op.Ey).lpNorm<Eigen::Infinity>());
  Matrix Ex2, Ey2;
  build_boundary_matrices(op.face, op.n, Ex2, Ey2);
  d.decomposition = std::max((op.Ex - Ex2).lpNorm<Eigen::Infinity>(),
                             (op.Ey - Ey2).lpNorm<Eigen::Infinity>());
  // boundary moments against analytic edge integrals of monomial pairs
  d.boundary = 0.0;
  for (int a1 = 0; a1 <= op.p; ++a1)
    for (int b1 = 0; a1 + b1 <= op.p; ++b1)
      for (int a2 = 0; a2 <= op.p; ++a2)
        for (int b2 = 0; a2 + b2 <= op.p; ++b2) {
          Vector pv(op.n), qv(op.n);
          for (int i = 0; i < op.n; ++i) {
            const double x = op.cubature.nodes(i, 0), y = op.cubature.nodes(i, 1);
            pv(i) = std::pow(x, a1) * std::pow(y, b1);
            qv(i) = std::pow(x, a2) * std::pow(y, b2);
          }
          const double ex = pv.dot(op.Ex * qv) - edge_moment_x(a1 + a2, b1 + b2);
          const double ey = pv.dot(op.Ey * qv) - edge_moment_y(a1 + a2, b1 + b2);
          d.boundary = std::max({d.boundary, std::abs(ex), std::abs(ey)});
        }
  d.min_h = op.h.minCoeff();
  d.pass = d.accuracy < tol_accuracy && d.skew < tol_skew &&
           d.decomposition < tol_skew && d.boundary < tol_boundary && d.min_h > 0.0;
  return d;
}

// ---------------------------------------------------------------------------
// text archive

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string matrix_payload(const Matrix& M) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
      out += buf;
      out += (j + 1 < M.cols()) ? ' ' : '\n';
    }
  }
  return out;
}

void put_matrix(std::ostream& out, const std::string& name, const Matrix& M) {
  const std::string payload = matrix_payload(M);
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(payload)));
  out << "matrix " << name << ' ' << M.rows() << ' ' << M.cols() << ' ' << hex
      << '\n'
      << payload;
}

Matrix get_matrix(std::istream& in, const std::string& want) {
  std::string line;
  do {
    if (!std::getline(in, line)) throw Error("operator archive: truncated");
  } while (line.empty() || line[0] == '#');
  std::istringstream hs(line);
  std::string kw, name, hex;
  long rows = 0, cols = 0;
  hs >> kw >> name >> rows >> cols >> hex;
  if (!hs || kw != "matrix" || name != want)
    throw Error("operator archive: expected matrix '" + want + "', got '" + line + "'");
  std::string payload;
  Matrix M(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw Error("operator archive: truncated payload");
    payload += line;
    payload += '\n';
    std::istringstream ls(line);
    for (long j = 0; j < cols; ++j) ls >> M(i, j);
    if (!ls) throw Error("operator archive: malformed row in '" + want + "'");
  }
  char hex2[24];
  std::snprintf(hex2, sizeof hex2, "%016llx",
                static_cast<unsigned long long>(fnv1a(payload)));
  if (hex != hex2)
    throw Error("operator archive: checksum mismatch for '" + want + "'");
  return M;
}

}  // namespace

void dump_operator(std::ostream& out, const SbpOperator& op) {
  out << "# sbp operator archive v1\n"
      << "family " << to_string(op.family) << "\n"
      << "p " << op.p << "\n"
      << "n " << op.n << "\n";
  put_matrix(out, "nodes", op.cubature.nodes);
  put_matrix(out, "H", op.h);
  put_matrix(out, "Qx", op.Qx);
  put_matrix(out, "Qy", op.Qy);
  for (int f = 0; f < 3; ++f) {
    put_matrix(out, "R" + std::to_string(f), op.face[static_cast<size_t>(f)].R);
    put_matrix(out, "b" + std::to_string(f), op.face[static_cast<size_t>(f)].b);
  }
}

SbpOperator load_operator(std::istream& in) {
  SbpOperator op;
  std::string line;
  int got = 0;
  while (got < 3 && std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "family") {
      std::string v;
      ls >> v;
      op.family = family_from_string(v);
    } else if (key == "p") {
      ls >> op.p;
    } else if (key == "n") {
      ls >> op.n;
    } else {
      throw Error("operator archive: unexpected header '" + line + "'");
    }
    if (!ls) throw Error("operator archive: malformed header '" + line + "'");
    ++got;
  }
  if (got != 3) throw Error("operator archive: incomplete header");

  const Matrix nodes = get_matrix(in, "nodes");
  const Matrix H = get_matrix(in, "H");
  op.Qx = get_matrix(in, "Qx");
  op.Qy = get_matrix(in, "Qy");
  if (nodes.rows() != op.n || H.rows() != op.n || op.Qx.rows() != op.n)
    throw Error("operator archive: shape mismatch with declared n");
  op.cubature.family = op.family;
  op.cubature.p = op.p;
  op.cubature.degree = 0;  // not stored; properties are re-verified below
  op.cubature.nodes = nodes;
  op.cubature.weights = H.col(0);
  op.h = H.col(0);
  for (int f = 0; f < 3; ++f) {
    auto& fb = op.face[static_cast<size_t>(f)];
    fb.R = get_matrix(in, "R" + std::to_string(f));
    fb.b = get_matrix(in, "b" + std::to_string(f)).col(0);
    const auto nrm = ReferenceTriangle::face_normal(f);
    fb.nx = nrm[0];
    fb.ny = nrm[1];
  }
  build_boundary_matrices(op.face, op.n, op.Ex, op.Ey);
  op.Dx = op.h.cwiseInverse().asDiagonal() * op.Qx;
  op.Dy = op.h.cwiseInverse().asDiagonal() * op.Qy;
  const SbpDiagnostics d = verify_sbp(op);
  if (!d.pass) throw Error("operator archive: loaded operator fails verification");
  return op;
}

}  // namespace sbpsat
