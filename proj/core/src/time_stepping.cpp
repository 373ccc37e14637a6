#include "sbpsat/time_stepping.hpp"

#include <cmath>
#include <random>

#include <Eigen/SparseLU>

namespace sbpsat {

namespace {

double energy_of(const GlobalSystem& sys, const Vector& u) {
  return u.dot(sys.h.cwiseProduct(u));
}

Eigen::SparseMatrix<double> shifted(const GlobalSystem& sys, double scale) {
  Eigen::SparseMatrix<double> m = sys.a;
  Eigen::SparseMatrix<double> hdiag(sys.size(), sys.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(sys.size()));
  for (int i = 0; i < sys.size(); ++i) trips.emplace_back(i, i, scale * sys.h(i));
  hdiag.setFromTriplets(trips.begin(), trips.end());
  return m + hdiag;
}

}  // namespace

EnergyHistory bdf2_advance(const GlobalSystem& sys, const Vector& u0,
                           double dt, int steps, double divergence_factor) {
  if (!(dt > 0.0)) throw Error("bdf2_advance: dt must be positive");
  EnergyHistory hist;
  hist.t.push_back(0.0);
  hist.energy.push_back(energy_of(sys, u0));
  const double e0 = hist.energy.front();
  if (steps == 0) return hist;

  // Backward Euler bootstrap: (H/dt + A) u1 = H u0 / dt + b.
  Eigen::SparseLU<Eigen::SparseMatrix<double>> be(shifted(sys, 1.0 / dt));
  if (be.info() != Eigen::Success)
    throw Error("bdf2_advance: bootstrap factorization failed at step 1");
  Vector prev = u0;
  Vector curr = be.solve(sys.h.cwiseProduct(u0) / dt + sys.b);
  hist.t.push_back(dt);
  hist.energy.push_back(energy_of(sys, curr));

  auto diverged_at = [&](int step) {
    if (hist.energy.back() > divergence_factor * e0 && e0 > 0.0) {
      hist.diverged = true;
      hist.divergence_step = step;
      return true;
    }
    return false;
  };
  if (diverged_at(1)) return hist;

  // BDF2: (3H/(2dt) + A) u_{n+1} = H (4u_n - u_{n-1}) / (2dt) + b.
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(shifted(sys, 1.5 / dt));
  if (lu.info() != Eigen::Success)
    throw Error("bdf2_advance: factorization failed at step 2");
  for (int k = 2; k <= steps; ++k) {
    Vector rhs = sys.h.cwiseProduct(4.0 * curr - prev) / (2.0 * dt) + sys.b;
    Vector next = lu.solve(rhs);
    prev = std::move(curr);
    curr = std::move(next);
    hist.t.push_back(k * dt);
    hist.energy.push_back(energy_of(sys, curr));
    if (diverged_at(k)) break;
  }
  return hist;
}

Vector random_smooth_field(const Points& points, uint64_t seed) {
  constexpr int kModes = 4;
  std::mt19937_64 eng(seed);
  double coeff[kModes][kModes];
  double total = 0.0;
  for (int k = 0; k < kModes; ++k)
    for (int l = 0; l < kModes; ++l) {
      coeff[k][l] =
          2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
      total += std::abs(coeff[k][l]);
    }
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double v = 0.0;
    for (int k = 0; k < kModes; ++k)
      for (int l = 0; l < kModes; ++l)
        v += coeff[k][l] * std::sin((k + 1) * M_PI * points(i, 0)) *
             std::sin((l + 1) * M_PI * points(i, 1));
    out(i) = v / total;
  }
  return out;
}

}  // namespace sbpsat
