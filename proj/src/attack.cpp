#include "recsteal/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>

#include "clone_optim.hpp"

namespace recsteal {

const char* to_string(RankLossKind kind) {
  return kind == RankLossKind::BPR ? "bpr" : "hinge";
}

std::optional<RankLossKind> rank_loss_from_string(std::string_view s) {
  if (s == "bpr" || s == "BPR") return RankLossKind::BPR;
  if (s == "hinge" || s == "Hinge") return RankLossKind::Hinge;
  return {};
}

EmbeddingModel train_ptd(const InteractionDataset& available, const TrainConfig& cfg,
                         ModelKind clone_kind, TrainSummary* summary) {
  return train_model(clone_kind, available, cfg, summary);
}

FusedCloneModel train_pta(const InteractionDataset& available, const Matrix& q_aux,
                          const std::vector<std::uint8_t>& aux_eligible, const TrainConfig& cfg,
                          ModelKind clone_kind, TrainSummary* summary) {
  EmbeddingModel init = init_random(clone_kind, available.num_users, available.num_items,
                                    cfg.embedding_dim, derive_seed(cfg.rng_seed, seed_salt::kInit));
  FusedCloneModel clone = make_fused(std::move(init), q_aux, aux_eligible);
  train_interactions(clone, available, cfg, summary);
  return clone;
}

EmbeddingModel train_pta_pretrain(const InteractionDataset& available, const Matrix& q_aux,
                                  const TrainConfig& cfg, ModelKind clone_kind,
                                  TrainSummary* summary) {
  EmbeddingModel init = init_random(clone_kind, available.num_users, available.num_items,
                                    cfg.embedding_dim, derive_seed(cfg.rng_seed, seed_salt::kInit));
  if (q_aux.rows != init.Q.rows || q_aux.cols != init.Q.cols) {
    throw std::invalid_argument("train_pta_pretrain: auxiliary matrix shape mismatch");
  }
  init.Q = q_aux;  // copied initial state, stays trainable
  FusedCloneModel clone = wrap_plain(std::move(init));
  train_interactions(clone, available, cfg, summary);
  return unwrap_plain(std::move(clone));
}

namespace {

// Fetches each user's list once; responses are cached by the oracle and
// reused across fine-tune epochs.
std::vector<const RecommendationList*> fetch_lists(QueryOracle& oracle,
                                                   const std::vector<int>& users) {
  std::vector<const RecommendationList*> lists;
  lists.reserve(users.size());
  for (int u : users) {
    try {
      lists.push_back(&oracle.query(u));
    } catch (const BudgetExhaustedError&) {
      throw BudgetExhaustedError("fine-tune aborted: query budget exhausted after " +
                                 std::to_string(lists.size()) + " of " +
                                 std::to_string(users.size()) + " user lists");
    }
  }
  return lists;
}

void finetune_core(FusedCloneModel& model, QueryOracle& oracle, const std::vector<int>& users_in,
                   const InteractionDataset& known, const StealingLossSpec& spec,
                   const TrainConfig& cfg, TrainSummary* summary) {
  if (spec.negatives_per_list_item < 1) {
    throw std::invalid_argument("finetune: negatives_per_list_item must be >= 1");
  }
  if (spec.margin < 0.0) throw std::invalid_argument("finetune: margin must be >= 0");
  if (summary) *summary = TrainSummary{};
  if (cfg.epochs <= 0) return;

  std::vector<int> users = users_in;
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  if (users.empty()) return;

  const std::vector<const RecommendationList*> lists = fetch_lists(oracle, users);

  // Negative draws for user u exclude both the attacker-known interactions
  // and the queried list itself.
  std::vector<std::vector<int>> exclusions(users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    std::vector<int> ex = known.items_of(users[i]);
    ex.insert(ex.end(), lists[i]->items.begin(), lists[i]->items.end());
    std::sort(ex.begin(), ex.end());
    ex.erase(std::unique(ex.begin(), ex.end()), ex.end());
    exclusions[i] = std::move(ex);
  }

  Rng rng(derive_seed(cfg.rng_seed, seed_salt::kFinetune));
  CloneOptimizer opt(model);
  CloneGrads grads(model);
  FusedScoreCtx ctx_j, ctx_o;
  std::vector<std::size_t> order(users.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double prev_loss = std::numeric_limits<double>::quiet_NaN();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_terms = 0;
    grads.zero();
    double batch_loss = 0.0;
    std::size_t batch_terms = 0;

    auto flush = [&] {
      if (batch_terms == 0) return;
      grads.scale(1.0 / static_cast<double>(batch_terms));
      if (cfg.freeze_attention) {
        std::fill(grads.att_w.begin(), grads.att_w.end(), 0.0);
        grads.att_b = 0.0;
      }
      opt.step(model, grads, cfg.learning_rate);
      grads.zero();
      epoch_loss += batch_loss;
      epoch_terms += batch_terms;
      batch_loss = 0.0;
      batch_terms = 0;
    };

    for (std::size_t oi : order) {
      const int user = users[oi];
      const RecommendationList& list = *lists[oi];
      const std::vector<int>& excl = exclusions[oi];
      const std::size_t len = list.items.size();

      for (std::size_t j = 0; j < len; ++j) {
        const double r_j = fused_forward(model, user, list.items[j], ctx_j);
        // recommended-item terms against sampled negatives
        NegativeSample negs =
            sample_negatives(known, user, spec.negatives_per_list_item, excl, rng);
        for (int neg : negs.items) {
          const double r_n = fused_forward(model, user, neg, ctx_o);
          batch_loss += rank_loss(spec.positive_loss, r_j, r_n, spec.margin);
          const double gd = rank_loss_ddiff(spec.positive_loss, r_j - r_n, spec.margin);
          fused_backward(model, ctx_j, gd, grads);
          fused_backward(model, ctx_o, -gd, grads);
          ++batch_terms;
        }
        // ranking term against the next listed item
        if (j + 1 < len) {
          const double r_next = fused_forward(model, user, list.items[j + 1], ctx_o);
          batch_loss += rank_loss(spec.ranking_loss, r_j, r_next, spec.margin);
          const double gd = rank_loss_ddiff(spec.ranking_loss, r_j - r_next, spec.margin);
          fused_backward(model, ctx_j, gd, grads);
          fused_backward(model, ctx_o, -gd, grads);
          ++batch_terms;
        }
      }
      if (batch_terms >= static_cast<std::size_t>(cfg.batch_size)) flush();
    }
    flush();

    const double mean_loss =
        epoch_terms ? epoch_loss / static_cast<double>(epoch_terms) : 0.0;
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("finetune: diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    }
    if (cfg.log_progress) std::fprintf(stderr, "finetune epoch %d loss %.6f\n", epoch, mean_loss);
    if (summary) {
      summary->epoch_losses.push_back(mean_loss);
      summary->epochs_run = epoch + 1;
      summary->final_loss = mean_loss;
    }
    if (cfg.early_stop_tol > 0.0 && std::isfinite(prev_loss) &&
        std::abs(prev_loss - mean_loss) < cfg.early_stop_tol) {
      break;
    }
    prev_loss = mean_loss;
  }
}

}  // namespace

void finetune_with_queries(FusedCloneModel& model, QueryOracle& oracle,
                           const std::vector<int>& users, const InteractionDataset& known,
                           const StealingLossSpec& spec, const TrainConfig& cfg,
                           TrainSummary* summary) {
  finetune_core(model, oracle, users, known, spec, cfg, summary);
}

void finetune_with_queries(EmbeddingModel& model, QueryOracle& oracle,
                           const std::vector<int>& users, const InteractionDataset& known,
                           const StealingLossSpec& spec, const TrainConfig& cfg,
                           TrainSummary* summary) {
  FusedCloneModel wrapped = wrap_plain(std::move(model));
  finetune_core(wrapped, oracle, users, known, spec, cfg, summary);
  model = unwrap_plain(std::move(wrapped));
}

EmbeddingModel train_qsd_adapted(QueryOracle& oracle, const std::vector<int>& users,
                                 const InteractionDataset& known, const StealingLossSpec& spec,
                                 const TrainConfig& cfg, ModelKind clone_kind,
                                 TrainSummary* summary) {
  EmbeddingModel clone = init_random(clone_kind, known.num_users, known.num_items,
                                     cfg.embedding_dim, derive_seed(cfg.rng_seed, seed_salt::kInit));
  finetune_with_queries(clone, oracle, users, known, spec, cfg, summary);
  return clone;
}

}  // namespace recsteal
