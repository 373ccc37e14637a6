#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "sbpsat/common.hpp"
#include "sbpsat/diffusion.hpp"
#include "sbpsat/mesh.hpp"
#include "sbpsat/operators.hpp"

namespace sbpsat {

enum class Scheme { Br2, Sipg };
Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

enum class BcType { Dirichlet, Neumann };

/// Boundary tag -> condition type. Tags default to Dirichlet.
struct BoundaryConfig {
  std::map<int, BcType> tag_bc;
  BcType type(int tag) const;
};

enum class FaceClass { Interior, Dirichlet, Neumann };

struct SatOptions {
  Scheme scheme = Scheme::Br2;
  double alpha_relax = 1.0;   // in (0, 1]; scales the symmetric penalties
  bool relax_dirichlet = true;
};

/// Dirichlet/Neumann data evaluated pointwise on face cubature nodes.
/// neumann receives the outward unit normal and must return n.(L grad u).
struct BoundaryData {
  std::function<double(double, double)> dirichlet;
  std::function<double(double, double, double, double)> neumann;
};

BoundaryData zero_boundary_data();
BoundaryData manufactured_boundary_data(const DiffusionField& field);

/// Reference operator pushed to one physical element: chain-rule derivative
/// matrices, the J-scaled norm, per-face physical weights and unit normals,
/// nodal tensor samples, and physical node coordinates.
struct PhysicalElement {
  Matrix dx, dy;                       // n x n physical derivatives
  Vector h;                            // J-scaled norm diagonal
  std::array<Vector, 3> face_b;        // physical face cubature weights
  std::array<double, 3> face_nx, face_ny;
  std::array<double, 3> contravariant; // |n_xi grad(xi) + n_eta grad(eta)|
  double det_j = 0.0;
  Eigen::Matrix2d jac;
  Eigen::Vector2d origin;              // image of the reference origin
  NodalTensor lam;
  Points nodes;                        // physical node coordinates

  Eigen::Vector2d to_physical(double xi, double eta) const;
  Points face_nodes(const SbpOperator& op, int face) const;
};

PhysicalElement build_physical_element(const SbpOperator& op,
                                       const TriangleMesh& mesh,
                                       const DiffusionField& field, int elem);

/// Face matrix discretizing the normal flux n.(L grad): maps element nodal
/// values to flux values at the face cubature nodes. The neighbor side of an
/// interior face gets the opposite normal through its own element data.
Matrix normal_derivative_operator(const SbpOperator& op,
                                  const PhysicalElement& el, int face);

std::array<FaceClass, 3> classify_faces(const Connectivity& conn,
                                        const BoundaryConfig& bc, int elem);

/// Face weight alpha = A(face) / (A_interior + 2 A_dirichlet), with the
/// numerator doubled on Dirichlet faces. Neumann faces carry no weight.
/// Weights over the interior and Dirichlet faces of an element sum to one.
double face_weight(const TriangleMesh& mesh, const Connectivity& conn,
                   const BoundaryConfig& bc, int elem, int face);

/// Block tensor inverse scaled by the norm: lam_star = blockinv(L) diag(h,h),
/// built nodewise on 2x2 blocks. Ordering: x-component dofs then y-component.
Matrix lambda_star(const PhysicalElement& el);

/// Everything sigma construction needs from one side of a face.
struct FaceSide {
  const SbpOperator* op = nullptr;
  const PhysicalElement* el = nullptr;
  int face = 0;
  double alpha = 0.0;    // face weight of this face in this element
  bool reversed = false; // true on the neighbor side of an interior face
};

/// Row-reversal of face rows; aligns neighbor-side face matrices with the
/// owner-side traversal of the shared edge.
Matrix align_rows(const Matrix& m, bool reversed);
Vector align_rows(const Vector& v, bool reversed);

/// BR2 penalties. Interior: sigma1 = (1/4) B [C_k (a_k L*_k)^-1 C_k' +
/// C_n (a_n L*_n)^-1 C_n'] B. Dirichlet: sigmaD = B C (a L*)^-1 C' B.
Matrix sigma_br2(const FaceSide& owner, const FaceSide& neighbor);
Matrix sigma_br2_boundary(const FaceSide& side);

/// SIPG penalties: sigma1 = sum over sides of lmax(L) * rho / (4 alpha) * cs
/// times the physical B, where rho = |B^1/2 R H^-1/2|_2^2 in reference space
/// and cs is the side's contravariant normal scaling. Dirichlet uses 1/alpha.
Matrix sigma_sipg(const FaceSide& owner, const FaceSide& neighbor);
Matrix sigma_sipg_boundary(const FaceSide& side);

/// |B^1/2 R H^-1/2|_2^2 for each face of the reference operator.
std::array<double, 3> reference_penalty_norms(const SbpOperator& op);

/// Per-face penalty matrices for a whole mesh, alpha_relax already applied.
/// sigma1[i] pairs with connectivity.interior[i] in owner-side alignment;
/// sigmaD[j] pairs with connectivity.boundary[j] (empty on Neumann faces).
struct SatCoefficients {
  SatOptions options;
  std::vector<Matrix> sigma1;
  std::vector<Matrix> sigmaD;
};

SatCoefficients build_sat_coefficients(
    const TriangleMesh& mesh, const Connectivity& conn, const SbpOperator& op,
    const std::vector<PhysicalElement>& elems, const BoundaryConfig& bc,
    const SatOptions& options);

/// Interface SAT applied to nodal values: s_k = R'(sigma1 j + B/2 d)
/// - D'(B/2) j with j the aligned trace jump and d the normal-derivative sum.
/// Returns the owner and neighbor contributions in their own node orderings.
std::pair<Vector, Vector> interface_sat(const SbpOperator& op,
                                        const PhysicalElement& ek,
                                        const PhysicalElement& en,
                                        const InteriorFace& face,
                                        const Matrix& sigma1, const Vector& uk,
                                        const Vector& un);

/// Boundary SAT: Dirichlet (R' sigmaD - D' B)(R u - uD), Neumann R' B (D u
/// - uN). Data vectors are sampled at face cubature nodes.
Vector boundary_sat_dirichlet(const SbpOperator& op, const PhysicalElement& el,
                              int face, const Matrix& sigmaD, const Vector& u,
                              const Vector& ud);
Vector boundary_sat_neumann(const SbpOperator& op, const PhysicalElement& el,
                            int face, const Vector& u, const Vector& un);

/// Assembled steady system A u = b with A = sum_k H_k (-D2_k) + SAT
/// Jacobians, symmetric and positive definite at alpha_relax = 1.
struct GlobalSystem {
  int n_elem = 0;
  int nodes_per_elem = 0;
  Eigen::SparseMatrix<double> a;
  Vector b;
  Vector h;      // global J-scaled norm diagonal
  Points nodes;  // global physical node coordinates

  int dof(int elem, int node) const { return elem * nodes_per_elem + node; }
  int size() const { return n_elem * nodes_per_elem; }
};

struct DiscreteProblem {
  const TriangleMesh* mesh = nullptr;
  const SbpOperator* op = nullptr;
  const DiffusionField* field = nullptr;
  Connectivity conn;
  std::vector<PhysicalElement> elems;
  BoundaryConfig bc;
  SatCoefficients coeffs;
  BoundaryData data;
  std::function<double(double, double)> forcing;
};

DiscreteProblem build_problem(const TriangleMesh& mesh, const SbpOperator& op,
                              const DiffusionField& field,
                              const SatOptions& options,
                              const BoundaryConfig& bc,
                              const BoundaryData& data);

GlobalSystem assemble_steady(const DiscreteProblem& prob);

/// Semi-discrete residual du/dt = D2 u + f - Hinv(sI + sB), evaluated
/// element by element through the SAT appliers (not via the assembled A).
Vector unsteady_residual(const DiscreteProblem& prob, const Vector& u);

/// Discrete functional J_h = sum g'H u + sum_N vN'B R u - sum_D vD'B D u
/// + sum_D vD' sigmaD (R u - uD).
double functional(const DiscreteProblem& prob, const Vector& u,
                  std::function<double(double, double)> g,
                  std::function<double(double, double)> v_dirichlet,
                  std::function<double(double, double)> v_neumann);

/// Net H-weighted residual flux over a subset of elements with f = 0;
/// interior faces internal to the subset telescope away exactly.
double conservation_defect(const DiscreteProblem& prob, const Vector& u,
                           const std::vector<int>& subset);

struct ConditionReport {
  bool pass = true;
  double max_violation = 0.0;
  std::vector<std::string> failures;
};

/// Four penalty-matrix equalities plus the vanishing of the adjoint
/// interface SAT on traces of a random degree-p polynomial.
ConditionReport verify_adjoint_conditions(const DiscreteProblem& prob,
                                          uint64_t seed);

/// Schur-complement margins: sigma1 - quarter-form >= 0 on interior faces,
/// sigmaD - full form >= 0 on Dirichlet faces, sigma4 >= 0. Margins are
/// relative to the face matrix scale.
struct StabilityReport {
  bool pass = true;
  double min_interior_margin = 0.0;
  double min_boundary_margin = 0.0;
};

StabilityReport verify_stability_conditions(const DiscreteProblem& prob,
                                            double tol_scale = 1e-10);

void write_coo(std::ostream& out, const Eigen::SparseMatrix<double>& a);

}  // namespace sbpsat
