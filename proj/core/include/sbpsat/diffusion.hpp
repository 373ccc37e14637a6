#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbpsat/common.hpp"

namespace sbpsat {

/// Variable diffusion tensor with optional manufactured solution attached.
/// tensor(x, y) must be symmetric positive definite everywhere in the unit
/// square; forcing is the source F that closes -div(tensor * grad(exact)) = F
/// when an exact field is present.
struct DiffusionField {
  std::string name;
  std::function<Eigen::Matrix2d(double, double)> tensor;
  std::function<double(double, double)> forcing;
  std::function<double(double, double)> exact;
  std::function<Eigen::Vector2d(double, double)> exact_grad;
  bool has_exact = false;

  /// Normal flux n . (tensor * grad(exact)), the natural Neumann datum.
  double normal_flux(double x, double y, double nx, double ny) const;
};

/// Nodal tensor samples for one element, stored as the diagonals of the
/// four blocks of the 2n x 2n block tensor.
struct NodalTensor {
  Vector xx, xy, yy;

  void check_spd() const;  // throws Error if any node fails SPD
};

NodalTensor sample_tensor(const DiffusionField& field, const Points& nodes);

/// Built-in fields by name:
///   "manufactured-trig": tensor [[x^2+1, xy], [xy, y^2+1]],
///                        exact sin(2 pi x) sin(2 pi y), forcing derived
///   "identity-trig":     identity tensor, same exact solution
///   "identity":          identity tensor, no exact solution (F = 0)
const DiffusionField& diffusion_field(const std::string& name);

std::vector<std::string> diffusion_field_names();

}  // namespace sbpsat
