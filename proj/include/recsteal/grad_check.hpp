#pragma once

#include <functional>
#include <span>

#include "recsteal/rng.hpp"

namespace recsteal {

// One differentiable scalar function of a flat parameter vector, plus a probe
// sampler and an optional kink rejector for non-smooth pieces (ReLU, hinge).
struct GradCheckProblem {
  int dim = 0;
  // Evaluates the loss at x and writes the analytic gradient into g.
  std::function<double(std::span<const double> x, std::span<double> g)> loss_and_grad;
  // Draws a probe point into x.
  std::function<void(std::span<double> x, Rng& rng)> sample_probe;
  // Returns false when x is too close to a non-differentiable kink; the probe
  // is then redrawn. May be empty for smooth losses.
  std::function<bool(std::span<const double> x)> differentiable_at;
};

// Central finite differences (h = 1e-5) against the analytic gradient over
// `probe_count` random probe points. Returns the maximum over probes and
// coordinates of |g_a - g_fd| / max(1, |g_a|, |g_fd|). Throws on non-finite
// loss values.
double grad_check(const GradCheckProblem& problem, int probe_count, Rng& rng);

}  // namespace recsteal
