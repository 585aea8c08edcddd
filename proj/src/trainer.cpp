#include "recsteal/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "clone_optim.hpp"
#include "recsteal/losses.hpp"
#include "recsteal/rng.hpp"

namespace recsteal {

namespace {

struct Positive {
  int user;
  int item;
};

std::vector<Positive> collect_positives(const InteractionDataset& ds) {
  std::vector<Positive> out;
  out.reserve(ds.interaction_count());
  for (const auto& [u, items] : ds.interactions) {
    for (int i : items) out.push_back({u, i});
  }
  return out;
}

// L2 penalty on the raw embeddings touched by one term.
double l2_term(const FusedCloneModel& m, int user, int item, double reg, CloneGrads& g) {
  if (reg == 0.0) return 0.0;
  const auto p = m.P.row(user);
  const auto q = m.Q_c.row(item);
  auto gp = g.P.row(user);
  auto gq = g.Q_c.row(item);
  double penalty = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    penalty += p[i] * p[i] + q[i] * q[i];
    gp[i] += 2.0 * reg * p[i];
    gq[i] += 2.0 * reg * q[i];
  }
  return reg * penalty;
}

}  // namespace

void train_interactions(FusedCloneModel& model, const InteractionDataset& ds,
                        const TrainConfig& cfg, TrainSummary* summary) {
  if (ds.interaction_count() == 0) throw std::invalid_argument("train: empty dataset");
  if (ds.num_users > model.num_users() || ds.num_items > model.num_items()) {
    throw std::invalid_argument("train: model index spaces smaller than dataset");
  }
  if (cfg.learning_rate < 0.0 || cfg.batch_size < 1 || cfg.negatives_per_positive < 0) {
    throw std::invalid_argument("train: bad config");
  }

  std::vector<Positive> positives = collect_positives(ds);
  Rng rng(derive_seed(cfg.rng_seed, seed_salt::kTrain));
  CloneOptimizer opt(model);
  CloneGrads grads(model);
  FusedScoreCtx ctx_a, ctx_b;
  const bool pairwise = (model.kind == ModelKind::BPR);
  const int npp = std::max(1, cfg.negatives_per_positive);

  if (summary) *summary = TrainSummary{};
  double prev_loss = std::numeric_limits<double>::quiet_NaN();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(positives);
    double epoch_loss = 0.0;
    std::size_t epoch_terms = 0;

    for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
      grads.zero();
      double batch_loss = 0.0;
      std::size_t terms = 0;

      for (std::size_t idx = start; idx < end; ++idx) {
        const auto [user, pos] = positives[idx];
        const std::vector<int>& owned = ds.items_of(user);

        if (pairwise) {
          for (int t = 0; t < npp; ++t) {
            const int neg = sample_negative_one(ds.num_items, owned, rng);
            const double r_pos = fused_forward(model, user, pos, ctx_a);
            const double r_neg = fused_forward(model, user, neg, ctx_b);
            batch_loss += loss_bpr(r_pos, r_neg);
            const double gd = dloss_bpr_ddiff(r_pos - r_neg);
            fused_backward(model, ctx_a, gd, grads);
            fused_backward(model, ctx_b, -gd, grads);
            batch_loss += l2_term(model, user, pos, cfg.l2_reg, grads);
            batch_loss += l2_term(model, user, neg, cfg.l2_reg, grads);
            ++terms;
          }
        } else {
          const double r = fused_forward(model, user, pos, ctx_a);
          batch_loss += loss_logistic(r, 1);
          fused_backward(model, ctx_a, dloss_logistic_dr(r, 1), grads);
          batch_loss += l2_term(model, user, pos, cfg.l2_reg, grads);
          ++terms;
          for (int t = 0; t < npp; ++t) {
            const int neg = sample_negative_one(ds.num_items, owned, rng);
            const double rn = fused_forward(model, user, neg, ctx_a);
            batch_loss += loss_logistic(rn, 0);
            fused_backward(model, ctx_a, dloss_logistic_dr(rn, 0), grads);
            batch_loss += l2_term(model, user, neg, cfg.l2_reg, grads);
            ++terms;
          }
        }
      }

      grads.scale(1.0 / static_cast<double>(terms));
      if (cfg.freeze_attention) {
        std::fill(grads.att_w.begin(), grads.att_w.end(), 0.0);
        grads.att_b = 0.0;
      }
      opt.step(model, grads, cfg.learning_rate);
      epoch_loss += batch_loss;
      epoch_terms += terms;
    }

    const double mean_loss = epoch_loss / static_cast<double>(epoch_terms);
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                               std::to_string(epoch));
    }
    if (cfg.log_progress) std::fprintf(stderr, "epoch %d loss %.6f\n", epoch, mean_loss);
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

EmbeddingModel train_model(ModelKind kind, const InteractionDataset& ds, const TrainConfig& cfg,
                           TrainSummary* summary) {
  EmbeddingModel init = init_random(kind, ds.num_users, ds.num_items, cfg.embedding_dim,
                                    derive_seed(cfg.rng_seed, seed_salt::kInit));
  FusedCloneModel clone = wrap_plain(std::move(init));
  train_interactions(clone, ds, cfg, summary);
  return unwrap_plain(std::move(clone));
}

}  // namespace recsteal
