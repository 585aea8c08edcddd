#pragma once

#include <cstdint>
#include <vector>

#include "recsteal/attention.hpp"
#include "recsteal/dataset.hpp"
#include "recsteal/model.hpp"

namespace recsteal {

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 2048;
  int embedding_dim = 64;
  int epochs = 50;
  // Negatives per positive interaction: 1 is the pairwise default; pointwise
  // (LMF/GMF) training conventionally uses 4.
  int negatives_per_positive = 1;
  double margin = 0.5;
  double l2_reg = 0.0;
  std::uint64_t rng_seed = 0;
  // Stop when the epoch mean loss changes by less than this; 0 disables.
  double early_stop_tol = 1e-5;
  bool log_progress = false;
  // Comparison switch: keep the attention layer at its initialization and
  // train only the embeddings.
  bool freeze_attention = false;
};

struct TrainSummary {
  int epochs_run = 0;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
};

// Fits a fresh model of the given kind on the dataset's interactions.
// BPR minimizes the pairwise log-sigmoid loss over sampled (positive,
// negative) pairs; LMF/GMF minimize pointwise logistic loss over positives
// and sampled negatives. Deterministic under cfg.rng_seed.
EmbeddingModel train_model(ModelKind kind, const InteractionDataset& ds, const TrainConfig& cfg,
                           TrainSummary* summary = nullptr);

// Shared interaction-driven trainer over a (possibly fused) clone. All
// interaction-phase training funnels through here so that fused runs with an
// all-ineligible mask replay a plain run's arithmetic and RNG stream exactly.
void train_interactions(FusedCloneModel& model, const InteractionDataset& ds,
                        const TrainConfig& cfg, TrainSummary* summary = nullptr);

}  // namespace recsteal
