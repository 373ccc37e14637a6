#include "sbpsat/rates.hpp"

#include <cmath>

namespace sbpsat {

double convergence_rate(const std::vector<double>& errors,
                        const std::vector<double>& h) {
  if (errors.size() != h.size() || errors.size() < 3)
    throw Error("convergence_rate needs at least three matching levels");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(errors.size());
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(h[i] > 0.0))
      throw Error("convergence_rate needs positive errors and mesh sizes");
    const double x = std::log(h[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> pairwise_rates(const std::vector<double>& errors,
                                   const std::vector<double>& h) {
  if (errors.size() != h.size() || errors.size() < 2)
    throw Error("pairwise_rates needs at least two matching levels");
  std::vector<double> rates;
  for (size_t i = 1; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(errors[i - 1] > 0.0))
      throw Error("pairwise_rates needs positive errors");
    rates.push_back(std::log(errors[i] / errors[i - 1]) /
                    std::log(h[i] / h[i - 1]));
  }
  return rates;
}

double l2_error(const GlobalSystem& sys, const Vector& u,
                const std::function<double(double, double)>& exact) {
  double acc = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    const double d = u(i) - exact(sys.nodes(i, 0), sys.nodes(i, 1));
    acc += sys.h(i) * d * d;
  }
  return std::sqrt(acc);
}

double l2_norm(const GlobalSystem& sys, const Vector& u) {
  double acc = 0.0;
  for (int i = 0; i < sys.size(); ++i) acc += sys.h(i) * u(i) * u(i);
  return std::sqrt(acc);
}

}  // namespace sbpsat
