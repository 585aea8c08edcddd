#pragma once

#include <span>

#include "recsteal/adam.hpp"
#include "recsteal/attention.hpp"

namespace recsteal {

// Adam over every trainable buffer of a clone. Q_a is frozen and has no group.
class CloneOptimizer {
 public:
  explicit CloneOptimizer(const FusedCloneModel& m)
      : p_(m.P.data.size()),
        q_c_(m.Q_c.data.size()),
        att_w_(m.attention.w.size()),
        att_b_(1),
        head_w_(m.head ? m.head->w.size() : 0),
        head_b_(m.head ? 1 : 0) {}

  void step(FusedCloneModel& m, const CloneGrads& g, double lr) {
    p_.step(m.P.data, g.P.data, lr);
    q_c_.step(m.Q_c.data, g.Q_c.data, lr);
    att_w_.step(m.attention.w, g.att_w, lr);
    att_b_.step(std::span<double>(&m.attention.b, 1), std::span<const double>(&g.att_b, 1), lr);
    if (m.head) {
      head_w_.step(m.head->w, g.head_w, lr);
      head_b_.step(std::span<double>(&m.head->b, 1), std::span<const double>(&g.head_b, 1), lr);
    }
  }

 private:
  AdamState p_, q_c_, att_w_, att_b_, head_w_, head_b_;
};

}  // namespace recsteal
