#pragma once

#include <cstdint>

#include "recsteal/dataset.hpp"

namespace recsteal {

// Cluster-structured synthetic interaction log. Users and items carry latent
// factors near one of `clusters` shared centers; each user interacts with the
// items scoring highest against their factor (plus noise and a global
// popularity skew), so co-cluster users share most of their taste.
struct SyntheticConfig {
  int num_users = 500;
  int num_items = 800;
  int clusters = 8;
  int latent_dim = 12;
  int min_user_interactions = 25;
  int max_user_interactions = 45;
  double factor_noise = 0.45;      // user/item spread around the cluster center
  double score_noise = 0.35;       // per-interaction score jitter
  double popularity_weight = 0.6;  // strength of the global popularity skew
  std::uint64_t seed = 42;
};

InteractionDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace recsteal
