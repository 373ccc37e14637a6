#include "sbpsat/diffusion.hpp"

#include <cmath>
#include <map>

namespace sbpsat {

double DiffusionField::normal_flux(double x, double y, double nx,
                                   double ny) const {
  if (!exact_grad) throw Error("field '" + name + "' has no exact gradient");
  const Eigen::Vector2d q = tensor(x, y) * exact_grad(x, y);
  return nx * q(0) + ny * q(1);
}

void NodalTensor::check_spd() const {
  for (Eigen::Index i = 0; i < xx.size(); ++i) {
    const double det = xx(i) * yy(i) - xy(i) * xy(i);
    if (!(xx(i) > 0.0) || !(det > 0.0))
      throw Error("diffusion tensor not positive definite at a node");
  }
}

NodalTensor sample_tensor(const DiffusionField& field, const Points& nodes) {
  const Eigen::Index n = nodes.rows();
  NodalTensor t{Vector(n), Vector(n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Matrix2d m = field.tensor(nodes(i, 0), nodes(i, 1));
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-14 * (1.0 + std::abs(m(0, 1))))
      throw Error("diffusion tensor not symmetric at a node");
    t.xx(i) = m(0, 0);
    t.xy(i) = m(0, 1);
    t.yy(i) = m(1, 1);
  }
  t.check_spd();
  return t;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double trig_exact(double x, double y) {
  return std::sin(kTwoPi * x) * std::sin(kTwoPi * y);
}

Eigen::Vector2d trig_grad(double x, double y) {
  return {kTwoPi * std::cos(kTwoPi * x) * std::sin(kTwoPi * y),
          kTwoPi * std::sin(kTwoPi * x) * std::cos(kTwoPi * y)};
}

// F = -div(L grad U) for L = [[x^2+1, xy], [xy, y^2+1]], U = sin2pix sin2piy.
// Expanding: div(L grad U) = 3x Ux + 3y Uy + (x^2+1)Uxx + (y^2+1)Uyy
//                            + 2xy Uxy.
double manufactured_forcing(double x, double y) {
  const double pi2 = kTwoPi;                 // 2 pi
  const double sx = std::sin(pi2 * x), cx = std::cos(pi2 * x);
  const double sy = std::sin(pi2 * y), cy = std::cos(pi2 * y);
  const double pi2sq = pi2 * pi2;            // 4 pi^2
  return pi2sq * (x * x + y * y + 2.0) * sx * sy -
         3.0 * pi2 * x * cx * sy - 3.0 * pi2 * y * sx * cy -
         2.0 * pi2sq * x * y * cx * cy;
}

std::map<std::string, DiffusionField> make_registry() {
  std::map<std::string, DiffusionField> r;

  DiffusionField manufactured;
  manufactured.name = "manufactured-trig";
  manufactured.tensor = [](double x, double y) {
    Eigen::Matrix2d m;
    m << x * x + 1.0, x * y, x * y, y * y + 1.0;
    return m;
  };
  manufactured.forcing = manufactured_forcing;
  manufactured.exact = trig_exact;
  manufactured.exact_grad = trig_grad;
  manufactured.has_exact = true;
  r[manufactured.name] = manufactured;

  DiffusionField identity_trig;
  identity_trig.name = "identity-trig";
  identity_trig.tensor = [](double, double) {
    return Eigen::Matrix2d::Identity().eval();
  };
  identity_trig.forcing = [](double x, double y) {
    return 2.0 * kTwoPi * kTwoPi * trig_exact(x, y);
  };
  identity_trig.exact = trig_exact;
  identity_trig.exact_grad = trig_grad;
  identity_trig.has_exact = true;
  r[identity_trig.name] = identity_trig;

  DiffusionField identity;
  identity.name = "identity";
  identity.tensor = [](double, double) {
    return Eigen::Matrix2d::Identity().eval();
  };
  identity.forcing = [](double, double) { return 0.0; };
  identity.has_exact = false;
  r[identity.name] = identity;

  return r;
}

}  // namespace

const DiffusionField& diffusion_field(const std::string& name) {
  static const std::map<std::string, DiffusionField> registry =
      make_registry();
  auto it = registry.find(name);
  if (it == registry.end())
    throw Error("unknown diffusion field '" + name + "'");
  return it->second;
}

std::vector<std::string> diffusion_field_names() {
  static const std::map<std::string, DiffusionField> registry =
      make_registry();
  std::vector<std::string> names;
  for (const auto& [k, v] : registry) names.push_back(k);
  return names;
}

}  // namespace sbpsat
