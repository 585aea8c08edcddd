#include "recsteal/oracle.hpp"

#include <algorithm>
#include <set>

namespace recsteal {

std::vector<int> popularity_ranking(const InteractionDataset& ds) {
  if (ds.num_items <= 0) throw std::invalid_argument("popularity_ranking: empty dataset");
  std::vector<long> counts(static_cast<std::size_t>(ds.num_items), 0);
  for (const auto& [u, items] : ds.interactions) {
    for (int i : items) ++counts[static_cast<std::size_t>(i)];
  }
  std::vector<int> order(static_cast<std::size_t>(ds.num_items));
  for (int i = 0; i < ds.num_items; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&counts](int a, int b) {
    const long ca = counts[static_cast<std::size_t>(a)];
    const long cb = counts[static_cast<std::size_t>(b)];
    if (ca != cb) return ca > cb;
    return a < b;
  });
  return order;
}

RecommendationList mix_popular(const RecommendationList& list, const DefenseConfig& cfg,
                               const std::vector<int>& popular,
                               const std::vector<int>& user_exclusions_sorted, Rng& rng) {
  const int k = static_cast<int>(list.items.size());
  if (cfg.mix_count < 0 || cfg.mix_count > k) {
    throw std::invalid_argument("mix_popular: mix_count out of [0, K]");
  }
  if (cfg.pool_size < cfg.mix_count) {
    throw std::invalid_argument("mix_popular: pool smaller than mix_count");
  }
  if (cfg.mix_count == 0) return list;

  const std::set<int> in_list(list.items.begin(), list.items.end());
  std::vector<int> pool;
  const int pool_take = std::min<int>(cfg.pool_size, static_cast<int>(popular.size()));
  for (int i = 0; i < pool_take; ++i) {
    const int item = popular[static_cast<std::size_t>(i)];
    if (in_list.count(item)) continue;
    if (std::binary_search(user_exclusions_sorted.begin(), user_exclusions_sorted.end(), item)) {
      continue;
    }
    pool.push_back(item);
  }
  if (static_cast<int>(pool.size()) < cfg.mix_count) {
    throw std::runtime_error("mix_popular: popularity pool exhausted");
  }

  // Positions, then replacement items; both by partial Fisher-Yates.
  std::vector<int> positions(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) positions[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < cfg.mix_count; ++i) {
    const int j = i + rng.uniform_int(k - i);
    std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(j)]);
  }
  positions.resize(static_cast<std::size_t>(cfg.mix_count));
  std::sort(positions.begin(), positions.end());

  for (int i = 0; i < cfg.mix_count; ++i) {
    const int j = i + rng.uniform_int(static_cast<int>(pool.size()) - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }

  RecommendationList out = list;
  for (int i = 0; i < cfg.mix_count; ++i) {
    out.items[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] =
        pool[static_cast<std::size_t>(i)];
  }
  return out;
}

QueryOracle::QueryOracle(const EmbeddingModel& target, const InteractionDataset& train_data,
                         int k, std::optional<std::uint64_t> budget,
                         std::optional<DefenseConfig> defense)
    : target_(&target),
      train_(&train_data),
      k_(k),
      budget_(budget),
      defense_(std::move(defense)),
      defense_rng_(defense_ ? defense_->rng_seed : 0) {
  if (k <= 0) throw std::invalid_argument("QueryOracle: k must be positive");
  if (defense_) {
    if (defense_->mix_count < 0 || defense_->mix_count > k) {
      throw std::invalid_argument("QueryOracle: defense mix_count out of [0, K]");
    }
    popular_ = popularity_ranking(train_data);
  }
}

const RecommendationList& QueryOracle::query(int user) {
  auto hit = cache_.find(user);
  if (hit != cache_.end()) return hit->second;

  if (budget_ && spent_ >= *budget_) {
    throw BudgetExhaustedError("query budget of " + std::to_string(*budget_) +
                               " exhausted (user " + std::to_string(user) + ")");
  }
  const std::vector<int>& exclude = train_->items_of(user);
  RecommendationList list = recommend_top_k(*target_, user, k_, exclude);
  if (defense_ && defense_->mix_count > 0) {
    list = mix_popular(list, *defense_, popular_, exclude, defense_rng_);
  }
  ++spent_;
  log_.push_back(list);
  auto [it, inserted] = cache_.emplace(user, std::move(list));
  return it->second;
}

void QueryOracle::write_log_csv(std::ostream& out) const {
  out << "query_index,user_id,item_ids\n";
  const bool have_ids =
      !train_->user_ids.to_raw.empty() && !train_->item_ids.to_raw.empty();
  for (std::size_t q = 0; q < log_.size(); ++q) {
    const RecommendationList& list = log_[q];
    out << q << ',';
    if (have_ids) {
      out << train_->user_ids.raw(list.user);
    } else {
      out << list.user;
    }
    out << ',';
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      if (i) out << '|';
      if (have_ids) {
        out << train_->item_ids.raw(list.items[i]);
      } else {
        out << list.items[i];
      }
    }
    out << '\n';
  }
}

}  // namespace recsteal
