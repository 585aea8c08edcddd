#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "recsteal/dataset.hpp"
#include "recsteal/model.hpp"
#include "recsteal/oracle.hpp"

namespace recsteal {

// |intersection| / K over two equal-length lists; order-insensitive.
double agreement(const RecommendationList& a, const RecommendationList& b);

// Mean per-user agreement between two models' top-K lists, both built under
// the same exclusion sets (the target model's training interactions).
template <class TargetModel, class CloneModel>
double mean_agreement(const TargetModel& target, const CloneModel& clone,
                      const std::vector<int>& users, int k,
                      const InteractionDataset& target_train) {
  if (users.empty()) throw std::invalid_argument("mean_agreement: no users");
  double total = 0.0;
  for (int u : users) {
    const std::vector<int>& exclude = target_train.items_of(u);
    const RecommendationList lt = recommend_top_k(target, u, k, exclude);
    const RecommendationList lc = recommend_top_k(clone, u, k, exclude);
    total += agreement(lt, lc);
  }
  return total / static_cast<double>(users.size());
}

// Mean over holdout users of |top-K hits| / |held-out items|; the top-K
// excludes only the training interactions.
template <class Model>
double recall_at_k(const Model& model, const InteractionDataset& train,
                   const InteractionDataset& holdout, int k) {
  double total = 0.0;
  int n = 0;
  for (const auto& [u, held] : holdout.interactions) {
    if (held.empty()) continue;
    const RecommendationList top = recommend_top_k(model, u, k, train.items_of(u));
    int hits = 0;
    for (int item : top.items) {
      if (std::binary_search(held.begin(), held.end(), item)) ++hits;
    }
    total += static_cast<double>(hits) / static_cast<double>(held.size());
    ++n;
  }
  if (n == 0) throw std::invalid_argument("recall_at_k: empty holdout");
  return total / static_cast<double>(n);
}

// Recall of the defended serving path: every list goes through mix_popular
// before being scored against the holdout.
template <class Model>
double recall_at_k_defended(const Model& model, const InteractionDataset& train,
                            const InteractionDataset& holdout, int k, const DefenseConfig& cfg,
                            const std::vector<int>& popular, Rng& rng) {
  double total = 0.0;
  int n = 0;
  for (const auto& [u, held] : holdout.interactions) {
    if (held.empty()) continue;
    const std::vector<int>& exclude = train.items_of(u);
    RecommendationList top = recommend_top_k(model, u, k, exclude);
    top = mix_popular(top, cfg, popular, exclude, rng);
    int hits = 0;
    for (int item : top.items) {
      if (std::binary_search(held.begin(), held.end(), item)) ++hits;
    }
    total += static_cast<double>(hits) / static_cast<double>(held.size());
    ++n;
  }
  if (n == 0) throw std::invalid_argument("recall_at_k_defended: empty holdout");
  return total / static_cast<double>(n);
}

}  // namespace recsteal
