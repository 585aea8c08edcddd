#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "recsteal/rng.hpp"

namespace recsteal {

// Bidirectional original-ID <-> dense-index map.
struct IdMap {
  std::vector<std::string> to_raw;
  std::unordered_map<std::string, int> to_index;

  int intern(const std::string& raw);
  int size() const { return static_cast<int>(to_raw.size()); }
  const std::string& raw(int index) const { return to_raw[static_cast<std::size_t>(index)]; }
};

// Implicit-feedback interaction log over dense user/item index spaces.
//
// Subset operations (splits, user sampling, holdouts) keep the parent's index
// spaces and id maps, so indices stay directly comparable across derived
// datasets; only loading and degree filtering re-densify.
struct InteractionDataset {
  int num_users = 0;
  int num_items = 0;  // global item-index space, shared by derived subsets
  std::map<int, std::vector<int>> interactions;  // user -> sorted distinct item indices
  IdMap user_ids;
  IdMap item_ids;

  std::vector<int> users() const;
  // Items of one user; empty if the user is absent. Always sorted.
  const std::vector<int>& items_of(int user) const;
  std::size_t interaction_count() const;
  bool has(int user, int item) const;
  // Sorted union of all item indices that occur in some interaction set.
  std::vector<int> present_items() const;
  // Throws std::logic_error if a structural invariant is broken.
  void check() const;
};

struct DataSplit {
  InteractionDataset target;            // one half of the user split
  InteractionDataset auxiliary;         // the other half, user-disjoint
  InteractionDataset target_train;      // target minus the per-user eval holdout
  InteractionDataset eval_holdout;      // held-out target interactions, for recall
  InteractionDataset available_target;  // attacker-visible slice of target_train
};

struct NegativeSample {
  int user = 0;
  std::vector<int> items;
};

// Reads delimited user,item[,rating,timestamp] rows, collapses duplicates and
// re-indexes both sides densely in first-appearance order. The delimiter is
// inferred from the extension (.csv / .tsv) or sniffed from the first line
// ("::", tab, comma, then whitespace) when not given explicitly.
InteractionDataset load_interactions(const std::string& path,
                                     std::optional<std::string> delimiter = {});

// Iteratively removes users and items with fewer than k interactions until a
// fixed point, then re-densifies both index spaces.
InteractionDataset filter_min_interactions(const InteractionDataset& ds, int k);

// Uniform 50/50 user partition. Both halves keep the full item index space.
std::pair<InteractionDataset, InteractionDataset> split_target_auxiliary(
    const InteractionDataset& ds, std::uint64_t rng_seed);

// Keeps ceil(fraction * num present users) users, chosen uniformly, with their
// full interaction sets.
InteractionDataset sample_available(const InteractionDataset& ds, double fraction,
                                    std::uint64_t rng_seed);

// Per-user holdout: moves a `fraction` share of each user's interactions
// (at least one, never all) into the second dataset.
std::pair<InteractionDataset, InteractionDataset> split_holdout(const InteractionDataset& ds,
                                                                double fraction,
                                                                std::uint64_t rng_seed);

// Marks ceil(ratio * |target_items|) of the given items as fusion-eligible.
// Returns a num_items-sized 0/1 mask; everything outside the chosen subset is
// ineligible.
std::vector<std::uint8_t> restrict_item_overlap(const InteractionDataset& aux, double ratio,
                                                const std::vector<int>& target_items,
                                                std::uint64_t rng_seed);

// n distinct items uniform over the complement of items_of(user) and the
// (sorted) extra exclusion list.
NegativeSample sample_negatives(const InteractionDataset& ds, int user, int n,
                                const std::vector<int>& extra_exclusions_sorted, Rng& rng);

// One uniform negative, repeats across calls allowed. exclusions must be sorted.
int sample_negative_one(int num_items, const std::vector<int>& exclusions_sorted, Rng& rng);

// Full preparation pipeline: target/auxiliary user split, per-user eval
// holdout inside the target half, and the attacker's available slice of the
// target training data.
DataSplit make_data_split(const InteractionDataset& ds, std::uint64_t seed,
                          double available_fraction, double holdout_fraction);

}  // namespace recsteal
