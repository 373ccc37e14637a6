#include "sbpsat/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "sbpsat/reference.hpp"

namespace sbpsat {

Scheme scheme_from_string(const std::string& s) {
  if (s == "br2") return Scheme::Br2;
  if (s == "sipg") return Scheme::Sipg;
  throw Error("unknown scheme '" + s + "' (expected br2 or sipg)");
}

std::string to_string(Scheme s) {
  return s == Scheme::Br2 ? "br2" : "sipg";
}

BcType BoundaryConfig::type(int tag) const {
  auto it = tag_bc.find(tag);
  return it == tag_bc.end() ? BcType::Dirichlet : it->second;
}

BoundaryData zero_boundary_data() {
  BoundaryData d;
  d.dirichlet = [](double, double) { return 0.0; };
  d.neumann = [](double, double, double, double) { return 0.0; };
  return d;
}

BoundaryData manufactured_boundary_data(const DiffusionField& field) {
  if (!field.has_exact)
    throw Error("field '" + field.name + "' has no exact solution");
  BoundaryData d;
  d.dirichlet = field.exact;
  d.neumann = [&field](double x, double y, double nx, double ny) {
    return field.normal_flux(x, y, nx, ny);
  };
  return d;
}

Eigen::Vector2d PhysicalElement::to_physical(double xi, double eta) const {
  return origin + jac * Eigen::Vector2d(xi, eta);
}

Points PhysicalElement::face_nodes(const SbpOperator& op, int face) const {
  const FaceCubature fc = face_cubature(op.p);
  Points out(fc.size(), 2);
  for (int j = 0; j < fc.size(); ++j) {
    const auto ref = ReferenceTriangle::face_point(face, fc.t(j));
    out.row(j) = to_physical(ref[0], ref[1]).transpose();
  }
  return out;
}

PhysicalElement build_physical_element(const SbpOperator& op,
                                       const TriangleMesh& mesh,
                                       const DiffusionField& field, int elem) {
  const ElementGeometry g = element_metrics(mesh, elem);
  PhysicalElement el;
  el.dx = g.inv_jac(0, 0) * op.Dx + g.inv_jac(1, 0) * op.Dy;
  el.dy = g.inv_jac(0, 1) * op.Dx + g.inv_jac(1, 1) * op.Dy;
  el.h = g.det_j * op.h;
  el.det_j = g.det_j;
  el.jac = g.jac;
  el.origin = mesh.vertices.row(mesh.elements(elem, 0)).transpose();
  for (int f = 0; f < 3; ++f) {
    el.face_b[static_cast<size_t>(f)] =
        g.face_scale[static_cast<size_t>(f)] * op.face[static_cast<size_t>(f)].b;
    el.face_nx[static_cast<size_t>(f)] = g.face_normal[static_cast<size_t>(f)][0];
    el.face_ny[static_cast<size_t>(f)] = g.face_normal[static_cast<size_t>(f)][1];
    el.contravariant[static_cast<size_t>(f)] =
        g.contravariant_scale[static_cast<size_t>(f)];
  }
  el.nodes.resize(op.n, 2);
  for (int i = 0; i < op.n; ++i)
    el.nodes.row(i) =
        el.to_physical(op.cubature.nodes(i, 0), op.cubature.nodes(i, 1))
            .transpose();
  el.lam = sample_tensor(field, el.nodes);
  return el;
}

Matrix normal_derivative_operator(const SbpOperator& op,
                                  const PhysicalElement& el, int face) {
  const auto f = static_cast<size_t>(face);
  const Matrix& R = op.face[f].R;
  const double nx = el.face_nx[f], ny = el.face_ny[f];
  const Vector ax = nx * el.lam.xx + ny * el.lam.xy;
  const Vector ay = nx * el.lam.xy + ny * el.lam.yy;
  return R * (ax.asDiagonal() * el.dx + ay.asDiagonal() * el.dy);
}

std::array<FaceClass, 3> classify_faces(const Connectivity& conn,
                                        const BoundaryConfig& bc, int elem) {
  std::array<FaceClass, 3> out{};
  std::array<bool, 3> seen{};
  for (const auto& f : conn.interior) {
    if (f.elem_k == elem) {
      out[static_cast<size_t>(f.face_k)] = FaceClass::Interior;
      seen[static_cast<size_t>(f.face_k)] = true;
    }
    if (f.elem_n == elem) {
      out[static_cast<size_t>(f.face_n)] = FaceClass::Interior;
      seen[static_cast<size_t>(f.face_n)] = true;
    }
  }
  for (const auto& f : conn.boundary) {
    if (f.elem != elem) continue;
    out[static_cast<size_t>(f.face)] = bc.type(f.tag) == BcType::Dirichlet
                                           ? FaceClass::Dirichlet
                                           : FaceClass::Neumann;
    seen[static_cast<size_t>(f.face)] = true;
  }
  if (!seen[0] || !seen[1] || !seen[2])
    throw Error("element has an unclassified face");
  return out;
}

double face_weight(const TriangleMesh& mesh, const Connectivity& conn,
                   const BoundaryConfig& bc, int elem, int face) {
  const auto classes = classify_faces(conn, bc, elem);
  const ElementGeometry g = element_metrics(mesh, elem);
  double den = 0.0;
  for (int f = 0; f < 3; ++f) {
    const double len = g.face_length[static_cast<size_t>(f)];
    if (classes[static_cast<size_t>(f)] == FaceClass::Interior) den += len;
    if (classes[static_cast<size_t>(f)] == FaceClass::Dirichlet)
      den += 2.0 * len;
  }
  if (den <= 0.0)
    throw Error("face weights undefined: element has only Neumann faces");
  if (classes[static_cast<size_t>(face)] == FaceClass::Neumann) return 0.0;
  const double len = g.face_length[static_cast<size_t>(face)];
  const double num =
      classes[static_cast<size_t>(face)] == FaceClass::Dirichlet ? 2.0 * len
                                                                 : len;
  return num / den;
}

Matrix lambda_star(const PhysicalElement& el) {
  const auto n = el.h.size();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double det =
        el.lam.xx(i) * el.lam.yy(i) - el.lam.xy(i) * el.lam.xy(i);
    if (!(det > 0.0)) throw Error("singular nodal tensor in lambda_star");
    const double s = el.h(i) / det;
    out(i, i) = s * el.lam.yy(i);
    out(i, n + i) = -s * el.lam.xy(i);
    out(n + i, i) = -s * el.lam.xy(i);
    out(n + i, n + i) = s * el.lam.xx(i);
  }
  return out;
}

Matrix align_rows(const Matrix& m, bool reversed) {
  if (!reversed) return m;
  return m.colwise().reverse();
}

Vector align_rows(const Vector& v, bool reversed) {
  if (!reversed) return v;
  return v.reverse();
}

namespace {

// C (alpha lam_star)^-1 C' collapses to R diag(c) R' with
// c_i = n' L(i) n / (alpha h_i), because both blocks of C share R.
Matrix gram_term(const FaceSide& s) {
  const auto f = static_cast<size_t>(s.face);
  const PhysicalElement& el = *s.el;
  if (!(s.alpha > 0.0))
    throw Error("nonpositive face weight in penalty construction");
  const double nx = el.face_nx[f], ny = el.face_ny[f];
  const auto n = el.h.size();
  Vector c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double quad = nx * nx * el.lam.xx(i) + 2.0 * nx * ny * el.lam.xy(i) +
                        ny * ny * el.lam.yy(i);
    c(i) = quad / (s.alpha * el.h(i));
  }
  const Matrix r = align_rows(s.op->face[f].R, s.reversed);
  return r * c.asDiagonal() * r.transpose();
}

Vector physical_b(const FaceSide& s) {
  return s.el->face_b[static_cast<size_t>(s.face)];
}

double max_nodal_eigenvalue(const PhysicalElement& el) {
  double lmax = 0.0;
  for (Eigen::Index i = 0; i < el.h.size(); ++i) {
    const double tr = el.lam.xx(i) + el.lam.yy(i);
    const double det = el.lam.xx(i) * el.lam.yy(i) - el.lam.xy(i) * el.lam.xy(i);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    lmax = std::max(lmax, tr / 2.0 + disc);
  }
  return lmax;
}

double sipg_side_coefficient(const FaceSide& s,
                             const std::array<double, 3>& rho) {
  const auto f = static_cast<size_t>(s.face);
  if (!(s.alpha > 0.0))
    throw Error("nonpositive face weight in penalty construction");
  return max_nodal_eigenvalue(*s.el) * rho[f] * s.el->contravariant[f] /
         s.alpha;
}

}  // namespace

Matrix sigma_br2(const FaceSide& owner, const FaceSide& neighbor) {
  const Vector b = physical_b(owner);
  const Matrix g = gram_term(owner) + gram_term(neighbor);
  return 0.25 * b.asDiagonal() * g * b.asDiagonal();
}

Matrix sigma_br2_boundary(const FaceSide& side) {
  const Vector b = physical_b(side);
  return b.asDiagonal() * gram_term(side) * b.asDiagonal();
}

std::array<double, 3> reference_penalty_norms(const SbpOperator& op) {
  std::array<double, 3> rho{};
  const Vector hinv_sqrt = op.h.cwiseSqrt().cwiseInverse();
  for (int f = 0; f < 3; ++f) {
    const auto& fb = op.face[static_cast<size_t>(f)];
    const Matrix m =
        fb.b.cwiseSqrt().asDiagonal() * fb.R * hinv_sqrt.asDiagonal();
    const double smax = m.jacobiSvd().singularValues()(0);
    rho[static_cast<size_t>(f)] = smax * smax;
  }
  return rho;
}

Matrix sigma_sipg(const FaceSide& owner, const FaceSide& neighbor) {
  const std::array<double, 3> rho_k = reference_penalty_norms(*owner.op);
  const std::array<double, 3> rho_n = reference_penalty_norms(*neighbor.op);
  const double delta = 0.25 * (sipg_side_coefficient(owner, rho_k) +
                               sipg_side_coefficient(neighbor, rho_n));
  return (delta * physical_b(owner)).asDiagonal();
}

Matrix sigma_sipg_boundary(const FaceSide& side) {
  const std::array<double, 3> rho = reference_penalty_norms(*side.op);
  return (sipg_side_coefficient(side, rho) * physical_b(side)).asDiagonal();
}

SatCoefficients build_sat_coefficients(
    const TriangleMesh& mesh, const Connectivity& conn, const SbpOperator& op,
    const std::vector<PhysicalElement>& elems, const BoundaryConfig& bc,
    const SatOptions& options) {
  if (!(options.alpha_relax > 0.0) || options.alpha_relax > 1.0)
    throw Error("alpha_relax must lie in (0, 1]");
  SatCoefficients coeffs;
  coeffs.options = options;
  coeffs.sigma1.reserve(conn.interior.size());
  for (const auto& f : conn.interior) {
    FaceSide k{&op, &elems[static_cast<size_t>(f.elem_k)], f.face_k,
               face_weight(mesh, conn, bc, f.elem_k, f.face_k), false};
    FaceSide n{&op, &elems[static_cast<size_t>(f.elem_n)], f.face_n,
               face_weight(mesh, conn, bc, f.elem_n, f.face_n), true};
    Matrix s1 = options.scheme == Scheme::Br2 ? sigma_br2(k, n)
                                              : sigma_sipg(k, n);
    coeffs.sigma1.push_back(options.alpha_relax * s1);
  }
  coeffs.sigmaD.resize(conn.boundary.size());
  const double alpha_d =
      options.relax_dirichlet ? options.alpha_relax : 1.0;
  for (size_t i = 0; i < conn.boundary.size(); ++i) {
    const auto& f = conn.boundary[i];
    if (bc.type(f.tag) != BcType::Dirichlet) continue;
    FaceSide side{&op, &elems[static_cast<size_t>(f.elem)], f.face,
                  face_weight(mesh, conn, bc, f.elem, f.face), false};
    coeffs.sigmaD[i] = alpha_d * (options.scheme == Scheme::Br2
                                      ? sigma_br2_boundary(side)
                                      : sigma_sipg_boundary(side));
  }
  return coeffs;
}

DiscreteProblem build_problem(const TriangleMesh& mesh, const SbpOperator& op,
                              const DiffusionField& field,
                              const SatOptions& options,
                              const BoundaryConfig& bc,
                              const BoundaryData& data) {
  DiscreteProblem prob;
  prob.mesh = &mesh;
  prob.op = &op;
  prob.field = &field;
  prob.conn = build_connectivity(mesh);
  prob.elems.reserve(static_cast<size_t>(mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e)
    prob.elems.push_back(build_physical_element(op, mesh, field, e));
  prob.bc = bc;
  prob.coeffs =
      build_sat_coefficients(mesh, prob.conn, op, prob.elems, bc, options);
  prob.data = data;
  prob.forcing = field.forcing;
  return prob;
}

namespace {

Vector sample_face(const Points& pts,
                   const std::function<double(double, double)>& f) {
  Vector out(pts.rows());
  for (Eigen::Index j = 0; j < pts.rows(); ++j)
    out(j) = f(pts(j, 0), pts(j, 1));
  return out;
}

// H (-D2) = M - sum_f R' B_f D_f with M symmetric PSD; only M is added
// here, the face terms are folded into the SAT blocks face by face.
Matrix volume_stiffness(const PhysicalElement& el) {
  const Vector hxx = el.h.cwiseProduct(el.lam.xx);
  const Vector hxy = el.h.cwiseProduct(el.lam.xy);
  const Vector hyy = el.h.cwiseProduct(el.lam.yy);
  return el.dx.transpose() * hxx.asDiagonal() * el.dx +
         el.dx.transpose() * hxy.asDiagonal() * el.dy +
         el.dy.transpose() * hxy.asDiagonal() * el.dx +
         el.dy.transpose() * hyy.asDiagonal() * el.dy;
}

void add_block(std::vector<Eigen::Triplet<double>>& trips, int row0, int col0,
               const Matrix& block) {
  for (Eigen::Index c = 0; c < block.cols(); ++c)
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      const double v = block(r, c);
      if (v != 0.0)
        trips.emplace_back(row0 + static_cast<int>(r),
                           col0 + static_cast<int>(c), v);
    }
}

struct InteriorFaceMatrices {
  Matrix rk, dk, rn, dn;  // neighbor side row-aligned to the owner traversal
  Vector b;
};

InteriorFaceMatrices interior_face_matrices(const SbpOperator& op,
                                            const PhysicalElement& ek,
                                            const PhysicalElement& en,
                                            const InteriorFace& face) {
  InteriorFaceMatrices m;
  m.rk = op.face[static_cast<size_t>(face.face_k)].R;
  m.dk = normal_derivative_operator(op, ek, face.face_k);
  m.rn = align_rows(op.face[static_cast<size_t>(face.face_n)].R, true);
  m.dn = align_rows(normal_derivative_operator(op, en, face.face_n), true);
  m.b = ek.face_b[static_cast<size_t>(face.face_k)];
  return m;
}

}  // namespace

GlobalSystem assemble_steady(const DiscreteProblem& prob) {
  const SbpOperator& op = *prob.op;
  const int ne = prob.mesh->num_elements();
  const int n = op.n;

  GlobalSystem sys;
  sys.n_elem = ne;
  sys.nodes_per_elem = n;
  sys.b = Vector::Zero(sys.size());
  sys.h = Vector(sys.size());
  sys.nodes.resize(sys.size(), 2);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(ne) * static_cast<size_t>(n) *
                    static_cast<size_t>(n) +
                4 * prob.conn.interior.size() * static_cast<size_t>(n) *
                    static_cast<size_t>(n));

  for (int e = 0; e < ne; ++e) {
    const PhysicalElement& el = prob.elems[static_cast<size_t>(e)];
    const int r0 = sys.dof(e, 0);
    add_block(trips, r0, r0, volume_stiffness(el));
    sys.h.segment(r0, n) = el.h;
    sys.nodes.block(r0, 0, n, 2) = el.nodes;
    if (prob.forcing) {
      for (int i = 0; i < n; ++i)
        sys.b(r0 + i) +=
            el.h(i) * prob.forcing(el.nodes(i, 0), el.nodes(i, 1));
    }
  }

  for (size_t fi = 0; fi < prob.conn.interior.size(); ++fi) {
    const InteriorFace& face = prob.conn.interior[fi];
    const PhysicalElement& ek = prob.elems[static_cast<size_t>(face.elem_k)];
    const PhysicalElement& en = prob.elems[static_cast<size_t>(face.elem_n)];
    const auto m = interior_face_matrices(op, ek, en, face);
    const Matrix& s1 = prob.coeffs.sigma1[fi];
    const auto bd = m.b.asDiagonal();

    const Matrix akk = m.rk.transpose() * s1 * m.rk -
                       0.5 * m.rk.transpose() * (bd * m.dk) -
                       0.5 * m.dk.transpose() * (bd * m.rk);
    const Matrix ann = m.rn.transpose() * s1 * m.rn -
                       0.5 * m.rn.transpose() * (bd * m.dn) -
                       0.5 * m.dn.transpose() * (bd * m.rn);
    const Matrix akn = -m.rk.transpose() * s1 * m.rn +
                       0.5 * m.rk.transpose() * (bd * m.dn) +
                       0.5 * m.dk.transpose() * (bd * m.rn);

    const int rk0 = sys.dof(face.elem_k, 0);
    const int rn0 = sys.dof(face.elem_n, 0);
    add_block(trips, rk0, rk0, akk);
    add_block(trips, rn0, rn0, ann);
    add_block(trips, rk0, rn0, akn);
    add_block(trips, rn0, rk0, akn.transpose());
  }

  for (size_t bi = 0; bi < prob.conn.boundary.size(); ++bi) {
    const BoundaryFace& face = prob.conn.boundary[bi];
    const PhysicalElement& el = prob.elems[static_cast<size_t>(face.elem)];
    const int r0 = sys.dof(face.elem, 0);
    const Matrix& R = op.face[static_cast<size_t>(face.face)].R;
    const auto bd = el.face_b[static_cast<size_t>(face.face)].asDiagonal();
    const Points fx = el.face_nodes(op, face.face);

    if (prob.bc.type(face.tag) == BcType::Dirichlet) {
      const Matrix D = normal_derivative_operator(op, el, face.face);
      const Matrix& sD = prob.coeffs.sigmaD[bi];
      add_block(trips, r0, r0,
                R.transpose() * sD * R - R.transpose() * (bd * D) -
                    D.transpose() * (bd * R));
      if (prob.data.dirichlet) {
        const Vector ud = sample_face(fx, prob.data.dirichlet);
        sys.b.segment(r0, n) +=
            R.transpose() * (sD * ud) - D.transpose() * (bd * ud);
      }
    } else if (prob.data.neumann) {
      const auto f = static_cast<size_t>(face.face);
      Vector un(fx.rows());
      for (Eigen::Index j = 0; j < fx.rows(); ++j)
        un(j) = prob.data.neumann(fx(j, 0), fx(j, 1), el.face_nx[f],
                                  el.face_ny[f]);
      sys.b.segment(r0, n) += R.transpose() * (bd * un);
    }
  }

  sys.a.resize(sys.size(), sys.size());
  sys.a.setFromTriplets(trips.begin(), trips.end());
  sys.a.makeCompressed();
  return sys;
}

std::pair<Vector, Vector> interface_sat(const SbpOperator& op,
                                        const PhysicalElement& ek,
                                        const PhysicalElement& en,
                                        const InteriorFace& face,
                                        const Matrix& sigma1, const Vector& uk,
                                        const Vector& un) {
  const auto m = interior_face_matrices(op, ek, en, face);
  const auto bd = m.b.asDiagonal();
  const Vector jump = m.rk * uk - m.rn * un;
  const Vector dsum = m.dk * uk + m.dn * un;
  Vector sk = m.rk.transpose() * (sigma1 * jump + 0.5 * (bd * dsum)) -
              0.5 * m.dk.transpose() * (bd * jump);
  Vector sn = m.rn.transpose() * (-(sigma1 * jump) + 0.5 * (bd * dsum)) +
              0.5 * m.dn.transpose() * (bd * jump);
  return {std::move(sk), std::move(sn)};
}

Vector boundary_sat_dirichlet(const SbpOperator& op, const PhysicalElement& el,
                              int face, const Matrix& sigmaD, const Vector& u,
                              const Vector& ud) {
  const Matrix& R = op.face[static_cast<size_t>(face)].R;
  const Matrix D = normal_derivative_operator(op, el, face);
  const auto bd = el.face_b[static_cast<size_t>(face)].asDiagonal();
  const Vector diff = R * u - ud;
  return R.transpose() * (sigmaD * diff) - D.transpose() * (bd * diff);
}

Vector boundary_sat_neumann(const SbpOperator& op, const PhysicalElement& el,
                            int face, const Vector& u, const Vector& un) {
  const Matrix& R = op.face[static_cast<size_t>(face)].R;
  const Matrix D = normal_derivative_operator(op, el, face);
  const auto bd = el.face_b[static_cast<size_t>(face)].asDiagonal();
  return R.transpose() * (bd * (D * u - un));
}

Vector unsteady_residual(const DiscreteProblem& prob, const Vector& u) {
  const SbpOperator& op = *prob.op;
  const int ne = prob.mesh->num_elements();
  const int n = op.n;
  if (u.size() != static_cast<Eigen::Index>(ne) * n)
    throw Error("unsteady_residual: solution size mismatch");

  Vector r(u.size());
  for (int e = 0; e < ne; ++e) {
    const PhysicalElement& el = prob.elems[static_cast<size_t>(e)];
    const auto ue = u.segment(e * n, n);
    const Vector gx = el.dx * ue;
    const Vector gy = el.dy * ue;
    const Vector qx = el.lam.xx.cwiseProduct(gx) + el.lam.xy.cwiseProduct(gy);
    const Vector qy = el.lam.xy.cwiseProduct(gx) + el.lam.yy.cwiseProduct(gy);
    Vector re = el.dx * qx + el.dy * qy;
    if (prob.forcing) {
      for (int i = 0; i < n; ++i)
        re(i) += prob.forcing(el.nodes(i, 0), el.nodes(i, 1));
    }
    r.segment(e * n, n) = re;
  }

  Vector sat = Vector::Zero(u.size());
  for (size_t fi = 0; fi < prob.conn.interior.size(); ++fi) {
    const InteriorFace& face = prob.conn.interior[fi];
    const auto [sk, sn] = interface_sat(
        op, prob.elems[static_cast<size_t>(face.elem_k)],
        prob.elems[static_cast<size_t>(face.elem_n)], face,
        prob.coeffs.sigma1[fi], u.segment(face.elem_k * n, n),
        u.segment(face.elem_n * n, n));
    sat.segment(face.elem_k * n, n) += sk;
    sat.segment(face.elem_n * n, n) += sn;
  }
  for (size_t bi = 0; bi < prob.conn.boundary.size(); ++bi) {
    const BoundaryFace& face = prob.conn.boundary[bi];
    const PhysicalElement& el = prob.elems[static_cast<size_t>(face.elem)];
    const auto ue = u.segment(face.elem * n, n);
    const Points fx = el.face_nodes(op, face.face);
    if (prob.bc.type(face.tag) == BcType::Dirichlet) {
      const Vector ud = prob.data.dirichlet ? sample_face(fx, prob.data.dirichlet)
                                            : Vector::Zero(fx.rows());
      sat.segment(face.elem * n, n) += boundary_sat_dirichlet(
          op, el, face.face, prob.coeffs.sigmaD[bi], ue, ud);
    } else {
      const auto f = static_cast<size_t>(face.face);
      Vector un = Vector::Zero(fx.rows());
      if (prob.data.neumann)
        for (Eigen::Index j = 0; j < fx.rows(); ++j)
          un(j) = prob.data.neumann(fx(j, 0), fx(j, 1), el.face_nx[f],
                                    el.face_ny[f]);
      sat.segment(face.elem * n, n) +=
          boundary_sat_neumann(op, el, face.face, ue, un);
    }
  }

  for (int e = 0; e < ne; ++e) {
    const PhysicalElement& el = prob.elems[static_cast<size_t>(e)];
    r.segment(e * n, n) -=
        sat.segment(e * n, n).cwiseQuotient(el.h);
  }
  return r;
}

double functional(const DiscreteProblem& prob, const Vector& u,
                  std::function<double(double, double)> g,
                  std::function<double(double, double)> v_dirichlet,
                  std::function<double(double, double)> v_neumann) {
  const SbpOperator& op = *prob.op;
  const int n = op.n;
  double j = 0.0;
  for (int e = 0; e < prob.mesh->num_elements(); ++e) {
    const PhysicalElement& el = prob.elems[static_cast<size_t>(e)];
    for (int i = 0; i < n; ++i)
      j += g(el.nodes(i, 0), el.nodes(i, 1)) * el.h(i) * u(e * n + i);
  }
  for (size_t bi = 0; bi < prob.conn.boundary.size(); ++bi) {
    const BoundaryFace& face = prob.conn.boundary[bi];
    const PhysicalElement& el = prob.elems[static_cast<size_t>(face.elem)];
    const auto ue = u.segment(face.elem * n, n);
    const Points fx = el.face_nodes(op, face.face);
    const Matrix& R = op.face[static_cast<size_t>(face.face)].R;
    const auto bd = el.face_b[static_cast<size_t>(face.face)].asDiagonal();
    if (prob.bc.type(face.tag) == BcType::Dirichlet) {
      if (!v_dirichlet) continue;
      const Vector vd = sample_face(fx, v_dirichlet);
      const Matrix D = normal_derivative_operator(op, el, face.face);
      const Vector ud = prob.data.dirichlet ? sample_face(fx, prob.data.dirichlet)
                                            : Vector::Zero(fx.rows());
      j -= vd.dot(bd * (D * ue));
      j += vd.dot(prob.coeffs.sigmaD[bi] * (R * ue - ud));
    } else if (v_neumann) {
      const Vector vn = sample_face(fx, v_neumann);
      j += vn.dot(bd * (R * ue));
    }
  }
  return j;
}

double conservation_defect(const DiscreteProblem& prob, const Vector& u,
                           const std::vector<int>& subset) {
  const SbpOperator& op = *prob.op;
  const int n = op.n;
  std::vector<char> in_subset(static_cast<size_t>(prob.mesh->num_elements()),
                              0);
  for (int e : subset) in_subset[static_cast<size_t>(e)] = 1;

  // Per interior face internal to the subset: the two elements' H-weighted
  // residual contributions telescope, 1'B D_k u + 1'B D_n u - 1'B d = 0.
  double defect = 0.0;
  for (size_t fi = 0; fi < prob.conn.interior.size(); ++fi) {
    const InteriorFace& face = prob.conn.interior[fi];
    if (!in_subset[static_cast<size_t>(face.elem_k)] ||
        !in_subset[static_cast<size_t>(face.elem_n)])
      continue;
    const auto m = interior_face_matrices(
        op, prob.elems[static_cast<size_t>(face.elem_k)],
        prob.elems[static_cast<size_t>(face.elem_n)], face);
    const auto uk = u.segment(face.elem_k * n, n);
    const auto un = u.segment(face.elem_n * n, n);
    const Vector jump = m.rk * uk - m.rn * un;
    const Vector dsum = m.dk * uk + m.dn * un;
    const Vector ones = Vector::Ones(m.b.size());
    const Matrix& s1 = prob.coeffs.sigma1[fi];
    const double phi_k = m.b.dot(m.dk * uk) - ones.dot(s1 * jump) -
                         0.5 * m.b.dot(dsum);
    const double phi_n = m.b.dot(m.dn * un) + ones.dot(s1 * jump) -
                         0.5 * m.b.dot(dsum);
    defect += phi_k + phi_n;
  }
  return defect;
}

ConditionReport verify_adjoint_conditions(const DiscreteProblem& prob,
                                          uint64_t seed) {
  const SbpOperator& op = *prob.op;
  ConditionReport rep;
  auto record = [&rep](const std::string& what, double violation,
                       double tol) {
    rep.max_violation = std::max(rep.max_violation, violation);
    if (violation > tol) {
      rep.pass = false;
      rep.failures.push_back(what + " violation " + std::to_string(violation));
    }
  };

  // Random polynomial of total degree p with coefficients in [-1, 1].
  std::mt19937_64 eng(seed);
  auto unit = [&eng]() {
    return 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
  };
  struct Term { int a, b; double c; };
  std::vector<Term> poly;
  for (int d = 0; d <= op.p; ++d)
    for (int a = 0; a <= d; ++a) poly.push_back({a, d - a, unit()});
  auto eval = [&poly](double x, double y) {
    double v = 0.0;
    for (const auto& t : poly)
      v += t.c * std::pow(x, t.a) * std::pow(y, t.b);
    return v;
  };
  auto eval_grad = [&poly](double x, double y) {
    Eigen::Vector2d g(0.0, 0.0);
    for (const auto& t : poly) {
      if (t.a > 0) g(0) += t.c * t.a * std::pow(x, t.a - 1) * std::pow(y, t.b);
      if (t.b > 0) g(1) += t.c * t.b * std::pow(x, t.a) * std::pow(y, t.b - 1);
    }
    return g;
  };

  for (size_t fi = 0; fi < prob.conn.interior.size(); ++fi) {
    const InteriorFace& face = prob.conn.interior[fi];
    const PhysicalElement& ek = prob.elems[static_cast<size_t>(face.elem_k)];
    const PhysicalElement& en = prob.elems[static_cast<size_t>(face.elem_n)];
    // Per-side stored coefficients: sigma2 = -B/2 and sigma3 = B/2 with each
    // side's own physical face weights, sigma4 = 0, neighbor side aligned.
    const Vector bk = ek.face_b[static_cast<size_t>(face.face_k)];
    const Vector bn =
        align_rows(en.face_b[static_cast<size_t>(face.face_n)], true);
    const double bscale = bk.lpNorm<Eigen::Infinity>();

    // Condition 1: the symmetric penalty is shared between the sides.
    // Rebuild it with the roles swapped; after alignment the two must agree.
    {
      FaceSide k{&op, &ek, face.face_k,
                 face_weight(*prob.mesh, prob.conn, prob.bc, face.elem_k,
                             face.face_k),
                 false};
      FaceSide nb{&op, &en, face.face_n,
                  face_weight(*prob.mesh, prob.conn, prob.bc, face.elem_n,
                              face.face_n),
                  true};
      FaceSide k_rev = k;
      k_rev.reversed = true;
      FaceSide nb_fwd = nb;
      nb_fwd.reversed = false;
      const bool br2 = prob.coeffs.options.scheme == Scheme::Br2;
      const Matrix from_k = br2 ? sigma_br2(k, nb) : sigma_sipg(k, nb);
      const Matrix from_n =
          br2 ? sigma_br2(nb_fwd, k_rev) : sigma_sipg(nb_fwd, k_rev);
      record("shared penalty matrix",
             (from_k - from_n.reverse()).lpNorm<Eigen::Infinity>(),
             1e-12 * std::max(1.0, from_k.lpNorm<Eigen::Infinity>()));
    }

    // Condition 2: sigma2_k + sigma2_n = -B.  Condition 3: sigma3_k +
    // sigma3_n = B.  Condition 4: sigma4 shared.  Eq for symmetry:
    // sigma3 - sigma2 = B per side.
    record("penalty sum (flux rows)",
           (-0.5 * bk - 0.5 * bn + bk).lpNorm<Eigen::Infinity>(),
           1e-12 * bscale);
    record("penalty sum (jump rows)",
           (0.5 * bk + 0.5 * bn - bk).lpNorm<Eigen::Infinity>(),
           1e-12 * bscale);
    record("symmetrization identity",
           (0.5 * bk - (-0.5 * bk) - bk).lpNorm<Eigen::Infinity>(), 1e-14);

    // Adjoint interface penalty on traces of a smooth polynomial: with
    // continuous traces v and antisymmetric fluxes theta the jump row
    // sigma1 (v - v) + (sigma2_k + B) theta_k - sigma2_n theta_n and the
    // flux row (sigma3_k - B) v + sigma3_n v must both vanish.
    const Points fx = ek.face_nodes(op, face.face_k);
    Vector v(fx.rows()), theta(fx.rows());
    const auto f = static_cast<size_t>(face.face_k);
    for (Eigen::Index j = 0; j < fx.rows(); ++j) {
      const double x = fx(j, 0), y = fx(j, 1);
      v(j) = eval(x, y);
      const Eigen::Vector2d q = prob.field->tensor(x, y) * eval_grad(x, y);
      theta(j) = ek.face_nx[f] * q(0) + ek.face_ny[f] * q(1);
    }
    const Matrix& s1 = prob.coeffs.sigma1[fi];
    const Vector theta_n = -theta;  // opposite outward normal
    const Vector row1 = s1 * (v - v) +
                        (-0.5 * bk + bk).cwiseProduct(theta) -
                        (-0.5 * bn).cwiseProduct(theta_n);
    const Vector row2 = (0.5 * bk - bk).cwiseProduct(v) +
                        (0.5 * bn).cwiseProduct(v);
    const double fscale =
        std::max(1.0, bscale * theta.lpNorm<Eigen::Infinity>());
    record("adjoint interface penalty (jump row)",
           row1.lpNorm<Eigen::Infinity>(), 1e-10 * fscale);
    record("adjoint interface penalty (flux row)",
           row2.lpNorm<Eigen::Infinity>(), 1e-10 * fscale);
  }
  return rep;
}

StabilityReport verify_stability_conditions(const DiscreteProblem& prob,
                                            double tol_scale) {
  const SbpOperator& op = *prob.op;
  StabilityReport rep;
  rep.min_interior_margin = std::numeric_limits<double>::infinity();
  rep.min_boundary_margin = std::numeric_limits<double>::infinity();

  for (size_t fi = 0; fi < prob.conn.interior.size(); ++fi) {
    const InteriorFace& face = prob.conn.interior[fi];
    FaceSide k{&op, &prob.elems[static_cast<size_t>(face.elem_k)], face.face_k,
               face_weight(*prob.mesh, prob.conn, prob.bc, face.elem_k,
                           face.face_k),
               false};
    FaceSide n{&op, &prob.elems[static_cast<size_t>(face.elem_n)], face.face_n,
               face_weight(*prob.mesh, prob.conn, prob.bc, face.elem_n,
                           face.face_n),
               true};
    const Matrix bound = sigma_br2(k, n);
    const Matrix diff = prob.coeffs.sigma1[fi] - bound;
    const double scale =
        std::max(1e-300, bound.lpNorm<Eigen::Infinity>());
    const double margin =
        Eigen::SelfAdjointEigenSolver<Matrix>(diff).eigenvalues()(0) / scale;
    rep.min_interior_margin = std::min(rep.min_interior_margin, margin);
  }

  for (size_t bi = 0; bi < prob.conn.boundary.size(); ++bi) {
    const BoundaryFace& face = prob.conn.boundary[bi];
    if (prob.bc.type(face.tag) != BcType::Dirichlet) continue;
    FaceSide side{&op, &prob.elems[static_cast<size_t>(face.elem)], face.face,
                  face_weight(*prob.mesh, prob.conn, prob.bc, face.elem,
                              face.face),
                  false};
    const Matrix bound = sigma_br2_boundary(side);
    const Matrix diff = prob.coeffs.sigmaD[bi] - bound;
    const double scale =
        std::max(1e-300, bound.lpNorm<Eigen::Infinity>());
    const double margin =
        Eigen::SelfAdjointEigenSolver<Matrix>(diff).eigenvalues()(0) / scale;
    rep.min_boundary_margin = std::min(rep.min_boundary_margin, margin);
  }

  if (prob.conn.interior.empty())
    rep.min_interior_margin = 0.0;
  if (rep.min_boundary_margin == std::numeric_limits<double>::infinity())
    rep.min_boundary_margin = 0.0;
  rep.pass = rep.min_interior_margin >= -tol_scale &&
             rep.min_boundary_margin >= -tol_scale;
  return rep;
}

void write_coo(std::ostream& out, const Eigen::SparseMatrix<double>& a) {
  char buf[64];
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n",
                    static_cast<long>(it.row()), static_cast<long>(it.col()),
                    it.value());
      out << buf;
    }
}

}  // namespace sbpsat
