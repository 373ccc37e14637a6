#pragma once

#include <vector>

#include "sbpsat/assembly.hpp"
#include "sbpsat/common.hpp"

namespace sbpsat {

struct EnergyHistory {
  std::vector<double> t;
  std::vector<double> energy;  // u' (J H) u at each recorded time
  bool diverged = false;
  int divergence_step = -1;
};

/// Implicit BDF2 on H du/dt = -(A u - b), bootstrapped with one backward
/// Euler step. Energy is recorded at every step; the run stops early once
/// the energy exceeds divergence_factor times its initial value.
EnergyHistory bdf2_advance(const GlobalSystem& sys, const Vector& u0,
                           double dt, int steps,
                           double divergence_factor = 1e3);

/// One fixed random smooth field evaluated at points: a low-order Fourier
/// sum with mt19937_64 coefficients, so every (family, p) discretization
/// samples the same underlying function.
Vector random_smooth_field(const Points& points, uint64_t seed);

}  // namespace sbpsat
