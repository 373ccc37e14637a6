#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sbpsat {

/// Error type thrown by all library operations on invalid input or
/// violated invariants.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Node-set family of the diagonal-norm operators on the triangle.
/// Omega: strictly interior nodes.  Gamma: p+1 nodes on each face.
enum class Family { Omega, Gamma };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// dim of the total-degree-d polynomial space in two variables
inline int poly_space_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

}  // namespace sbpsat
