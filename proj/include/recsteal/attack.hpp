#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "recsteal/attention.hpp"
#include "recsteal/dataset.hpp"
#include "recsteal/losses.hpp"
#include "recsteal/model.hpp"
#include "recsteal/oracle.hpp"
#include "recsteal/trainer.hpp"

namespace recsteal {

enum class RankLossKind { BPR, Hinge };

const char* to_string(RankLossKind kind);
std::optional<RankLossKind> rank_loss_from_string(std::string_view s);

// Which losses extract the ranking and the recommended-item information from
// a queried list. "BPR+Hinge" = BPR ranking loss, hinge positive-item loss.
struct StealingLossSpec {
  RankLossKind ranking_loss = RankLossKind::BPR;
  RankLossKind positive_loss = RankLossKind::Hinge;
  double margin = 0.5;
  int negatives_per_list_item = 4;
};

inline double rank_loss(RankLossKind kind, double r_pos, double r_neg, double margin) {
  return kind == RankLossKind::BPR ? loss_bpr(r_pos, r_neg) : loss_hinge(r_pos, r_neg, margin);
}
inline double rank_loss_ddiff(RankLossKind kind, double diff, double margin) {
  return kind == RankLossKind::BPR ? dloss_bpr_ddiff(diff) : dloss_hinge_ddiff(diff, margin);
}

// Clone trained on the attacker's available interactions alone.
EmbeddingModel train_ptd(const InteractionDataset& available, const TrainConfig& cfg,
                         ModelKind clone_kind, TrainSummary* summary = nullptr);

// Clone trained on available interactions with the frozen auxiliary item
// matrix fused in through the attention layer. q_aux must come from a model
// of the same kind and dimension trained on the auxiliary data.
FusedCloneModel train_pta(const InteractionDataset& available, const Matrix& q_aux,
                          const std::vector<std::uint8_t>& aux_eligible, const TrainConfig& cfg,
                          ModelKind clone_kind, TrainSummary* summary = nullptr);

// Pretraining alternative: clone item embeddings start as a copy of q_aux and
// stay trainable; no fusion.
EmbeddingModel train_pta_pretrain(const InteractionDataset& available, const Matrix& q_aux,
                                  const TrainConfig& cfg, ModelKind clone_kind,
                                  TrainSummary* summary = nullptr);

// Stealing loss for one queried list: consecutive-pair ranking terms plus
// positive-vs-negative terms for every listed item. negatives[j] supplies the
// negative item set of the j-th listed item.
template <class Model>
double stealing_loss(const Model& model, const RecommendationList& rec,
                     const StealingLossSpec& spec, const std::vector<NegativeSample>& negatives) {
  if (rec.items.empty()) throw std::invalid_argument("stealing_loss: empty recommendation list");
  if (negatives.size() != rec.items.size()) {
    throw std::invalid_argument("stealing_loss: one negative set per listed item required");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < rec.items.size(); ++j) {
    const double r_j = model.score(rec.user, rec.items[j]);
    if (j + 1 < rec.items.size()) {
      const double r_next = model.score(rec.user, rec.items[j + 1]);
      total += rank_loss(spec.ranking_loss, r_j, r_next, spec.margin);
    }
    for (int k : negatives[j].items) {
      total += rank_loss(spec.positive_loss, r_j, model.score(rec.user, k), spec.margin);
    }
  }
  return total;
}

// Fine-tunes the clone on the oracle's recommendation lists. Each user is
// queried once per call; the cached response is reused across epochs. `known`
// is the attacker's interaction data; its items and the queried list are
// excluded from negative sampling. Throws BudgetExhaustedError with a
// partial-progress message if the budget runs out while gathering lists.
void finetune_with_queries(FusedCloneModel& model, QueryOracle& oracle,
                           const std::vector<int>& users, const InteractionDataset& known,
                           const StealingLossSpec& spec, const TrainConfig& cfg,
                           TrainSummary* summary = nullptr);
void finetune_with_queries(EmbeddingModel& model, QueryOracle& oracle,
                           const std::vector<int>& users, const InteractionDataset& known,
                           const StealingLossSpec& spec, const TrainConfig& cfg,
                           TrainSummary* summary = nullptr);

// Query-feedback-only baseline: a randomly initialized clone trained purely
// by the stealing loss, no interaction pretraining and no fusion.
EmbeddingModel train_qsd_adapted(QueryOracle& oracle, const std::vector<int>& users,
                                 const InteractionDataset& known, const StealingLossSpec& spec,
                                 const TrainConfig& cfg, ModelKind clone_kind,
                                 TrainSummary* summary = nullptr);

}  // namespace recsteal
