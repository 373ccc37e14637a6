#pragma once

#include <functional>
#include <vector>

#include "sbpsat/assembly.hpp"
#include "sbpsat/common.hpp"

namespace sbpsat {

/// Least-squares slope of log(error) against log(h). At least three levels
/// with positive errors are required.
double convergence_rate(const std::vector<double>& errors,
                        const std::vector<double>& h);

/// Rates between consecutive levels, finest pairs last.
std::vector<double> pairwise_rates(const std::vector<double>& errors,
                                   const std::vector<double>& h);

/// sqrt(sum (u - exact)' (J H) (u - exact)) over all elements.
double l2_error(const GlobalSystem& sys, const Vector& u,
                const std::function<double(double, double)>& exact);

/// Norm of a discrete field, same J-scaled inner product.
double l2_norm(const GlobalSystem& sys, const Vector& u);

}  // namespace sbpsat
