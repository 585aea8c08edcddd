#include "recsteal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "recsteal/matrix.hpp"

namespace recsteal {

InteractionDataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.num_users <= 0 || cfg.num_items <= 0 || cfg.clusters <= 0 || cfg.latent_dim <= 0) {
    throw std::invalid_argument("generate_synthetic: dimensions must be positive");
  }
  if (cfg.min_user_interactions < 1 || cfg.max_user_interactions < cfg.min_user_interactions ||
      cfg.max_user_interactions > cfg.num_items) {
    throw std::invalid_argument("generate_synthetic: bad interaction bounds");
  }
  Rng rng(cfg.seed);

  Matrix centers(cfg.clusters, cfg.latent_dim);
  for (double& x : centers.data) x = rng.normal();

  Matrix user_factors(cfg.num_users, cfg.latent_dim);
  for (int u = 0; u < cfg.num_users; ++u) {
    const auto c = centers.row(u % cfg.clusters);
    auto row = user_factors.row(u);
    for (int i = 0; i < cfg.latent_dim; ++i) row[i] = c[i] + cfg.factor_noise * rng.normal();
  }
  Matrix item_factors(cfg.num_items, cfg.latent_dim);
  std::vector<double> item_popularity(static_cast<std::size_t>(cfg.num_items));
  for (int j = 0; j < cfg.num_items; ++j) {
    const auto c = centers.row(j % cfg.clusters);
    auto row = item_factors.row(j);
    for (int i = 0; i < cfg.latent_dim; ++i) row[i] = c[i] + cfg.factor_noise * rng.normal();
    // heavy-tailed popularity skew
    item_popularity[static_cast<std::size_t>(j)] =
        cfg.popularity_weight * -std::log(1.0 - rng.uniform());
  }

  InteractionDataset ds;
  ds.num_users = cfg.num_users;
  ds.num_items = cfg.num_items;
  for (int u = 0; u < cfg.num_users; ++u) ds.user_ids.intern("u" + std::to_string(u));
  for (int j = 0; j < cfg.num_items; ++j) ds.item_ids.intern("i" + std::to_string(j));

  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  std::vector<int> order(static_cast<std::size_t>(cfg.num_items));
  std::vector<double> scores(static_cast<std::size_t>(cfg.num_items));
  for (int u = 0; u < cfg.num_users; ++u) {
    for (int j = 0; j < cfg.num_items; ++j) {
      scores[static_cast<std::size_t>(j)] =
          scale * dot(user_factors.row(u), item_factors.row(j)) +
          item_popularity[static_cast<std::size_t>(j)] + cfg.score_noise * rng.normal();
      order[static_cast<std::size_t>(j)] = j;
    }
    const int want = cfg.min_user_interactions +
                     rng.uniform_int(cfg.max_user_interactions - cfg.min_user_interactions + 1);
    std::partial_sort(order.begin(), order.begin() + want, order.end(), [&scores](int a, int b) {
      const double sa = scores[static_cast<std::size_t>(a)];
      const double sb = scores[static_cast<std::size_t>(b)];
      if (sa != sb) return sa > sb;
      return a < b;
    });
    std::vector<int> items(order.begin(), order.begin() + want);
    std::sort(items.begin(), items.end());
    ds.interactions[u] = std::move(items);
  }
  return ds;
}

}  // namespace recsteal
