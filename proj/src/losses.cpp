#include "recsteal/losses.hpp"

#include <cmath>

namespace recsteal {

double softplus(double x) {
  // ln(1 + e^x) = max(x, 0) + ln(1 + e^-|x|)
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double loss_bpr(double r_pos, double r_neg) { return softplus(-(r_pos - r_neg)); }

double dloss_bpr_ddiff(double diff) { return sigmoid(diff) - 1.0; }

double loss_hinge(double r_pos, double r_neg, double margin) {
  return std::max(0.0, margin - (r_pos - r_neg));
}

double dloss_hinge_ddiff(double diff, double margin) { return diff < margin ? -1.0 : 0.0; }

double loss_logistic(double r, int label) {
  // -[y ln s(r) + (1-y) ln(1-s(r))] = softplus(r) - y*r
  return softplus(r) - static_cast<double>(label) * r;
}

double dloss_logistic_dr(double r, int label) {
  return sigmoid(r) - static_cast<double>(label);
}

}  // namespace recsteal
