#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "recsteal/dataset.hpp"
#include "recsteal/model.hpp"
#include "recsteal/rng.hpp"

namespace recsteal {

// Popularity-mixing defense: replace mix_count recommended items with random
// draws from the pool_size most popular items.
struct DefenseConfig {
  int mix_count = 0;
  int pool_size = 100;
  std::uint64_t rng_seed = 0;
};

class BudgetExhaustedError : public std::runtime_error {
 public:
  explicit BudgetExhaustedError(const std::string& what) : std::runtime_error(what) {}
};

// All items sorted by descending interaction count, ties by ascending index.
std::vector<int> popularity_ranking(const InteractionDataset& ds);

// Replaces cfg.mix_count uniformly chosen positions with distinct popular
// items that are neither already in the list nor in the user's exclusions.
// RNG contract: mix_count positions via partial Fisher-Yates over [0, K),
// then mix_count replacement items via partial Fisher-Yates over the eligible
// pool; replacements are assigned to the chosen positions in ascending
// position order.
RecommendationList mix_popular(const RecommendationList& list, const DefenseConfig& cfg,
                               const std::vector<int>& popular,
                               const std::vector<int>& user_exclusions_sorted, Rng& rng);

// Budget-limited black-box view of a target model. Each distinct user costs
// one budget unit; repeated queries for the same user return the cached list
// for free. The caller keeps the target model and its training data alive.
class QueryOracle {
 public:
  QueryOracle(const EmbeddingModel& target, const InteractionDataset& train_data, int k,
              std::optional<std::uint64_t> budget = {},
              std::optional<DefenseConfig> defense = {});

  const RecommendationList& query(int user);

  int k() const { return k_; }
  std::uint64_t spent() const { return spent_; }
  std::optional<std::uint64_t> budget() const { return budget_; }
  const std::vector<RecommendationList>& log() const { return log_; }
  void write_log_csv(std::ostream& out) const;

 private:
  const EmbeddingModel* target_;
  const InteractionDataset* train_;
  int k_;
  std::optional<std::uint64_t> budget_;
  std::optional<DefenseConfig> defense_;
  std::vector<int> popular_;
  Rng defense_rng_;
  std::uint64_t spent_ = 0;
  std::map<int, RecommendationList> cache_;
  std::vector<RecommendationList> log_;
};

}  // namespace recsteal
