#include "recsteal/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace recsteal {

double grad_check(const GradCheckProblem& problem, int probe_count, Rng& rng) {
  const double h = 1e-5;
  std::vector<double> x(static_cast<std::size_t>(problem.dim));
  std::vector<double> g(static_cast<std::size_t>(problem.dim));
  std::vector<double> scratch(static_cast<std::size_t>(problem.dim));
  double worst = 0.0;

  for (int probe = 0; probe < probe_count; ++probe) {
    int attempts = 0;
    do {
      problem.sample_probe(x, rng);
      if (++attempts > 1000) throw std::runtime_error("grad_check: cannot sample off-kink probe");
    } while (problem.differentiable_at && !problem.differentiable_at(x));

    const double loss = problem.loss_and_grad(x, g);
    if (!std::isfinite(loss)) throw std::runtime_error("grad_check: non-finite loss at probe");

    for (int i = 0; i < problem.dim; ++i) {
      const double saved = x[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] = saved + h;
      const double up = problem.loss_and_grad(x, scratch);
      x[static_cast<std::size_t>(i)] = saved - h;
      const double down = problem.loss_and_grad(x, scratch);
      x[static_cast<std::size_t>(i)] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::runtime_error("grad_check: non-finite loss at displaced probe");
      }
      const double fd = (up - down) / (2.0 * h);
      const double ga = g[static_cast<std::size_t>(i)];
      const double err = std::abs(ga - fd) / std::max({1.0, std::abs(ga), std::abs(fd)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace recsteal
