#include "recsteal/matrix.hpp"

#include <cmath>

namespace recsteal {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

void axpy_hadamard(double s, std::span<const double> x1, std::span<const double> x2,
                   std::span<double> y) {
  for (std::size_t i = 0; i < x1.size(); ++i) y[i] += s * x1[i] * x2[i];
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace recsteal
