#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace recsteal {

// Dense row-major matrix of doubles. Rows are user/item embeddings.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  std::span<double> row(int i) {
    return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  bool empty() const { return rows == 0 || cols == 0; }
  void set_zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// Kept out of line: every scoring/gradient path must run the exact same
// floating-point instruction sequence for the bit-reproducibility contract.
double dot(std::span<const double> a, std::span<const double> b);
// y += s * x
void axpy(double s, std::span<const double> x, std::span<double> y);
// y += s * (x1 .* x2)
void axpy_hadamard(double s, std::span<const double> x1, std::span<const double> x2,
                   std::span<double> y);
bool all_finite(std::span<const double> v);

}  // namespace recsteal
