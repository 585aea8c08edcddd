#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace recsteal {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter-group Adam accumulators. Groups that train together must be
// stepped together so the shared bias-correction counters stay in sync.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t size, AdamConfig cfg = {})
      : m_(size, 0.0), v_(size, 0.0), cfg_(cfg) {}

  // One bias-corrected update: params -= lr * m_hat / (sqrt(v_hat) + eps).
  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::int64_t steps() const { return step_; }
  std::size_t size() const { return m_.size(); }

 private:
  std::vector<double> m_, v_;
  std::int64_t step_ = 0;
  AdamConfig cfg_;
};

}  // namespace recsteal
