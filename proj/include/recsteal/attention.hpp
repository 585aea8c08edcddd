#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "recsteal/matrix.hpp"
#include "recsteal/model.hpp"

namespace recsteal {

// Single-layer attention over the user-conditioned Hadamard products.
struct AttentionParams {
  std::vector<double> w;
  double b = 0.0;
};

// Softmax-normalized weights (alpha', beta') for the clone and auxiliary item
// embeddings of one (user, item) pair. alpha' + beta' == 1.
std::pair<double, double> attention_coefficients(std::span<const double> p,
                                                 std::span<const double> q_clone,
                                                 std::span<const double> q_aux,
                                                 const AttentionParams& att);

// Clone model whose item embeddings can be fused with a frozen auxiliary item
// matrix. Items outside the eligibility mask bypass fusion entirely and score
// against the clone embedding alone.
struct FusedCloneModel {
  ModelKind kind = ModelKind::BPR;
  Matrix P;
  Matrix Q_c;
  Matrix Q_a;  // frozen; empty when no auxiliary model is attached
  AttentionParams attention;
  std::vector<std::uint8_t> aux_eligible;  // per-item fusion gate
  std::optional<GmfHead> head;             // engaged iff kind == GMF

  int dim() const { return P.cols; }
  int num_users() const { return P.rows; }
  int num_items() const { return Q_c.rows; }
  bool fuses(int item) const {
    return !Q_a.empty() && !aux_eligible.empty() &&
           aux_eligible[static_cast<std::size_t>(item)] != 0;
  }
  double score(int user, int item) const;
};

// Plain clone: no auxiliary matrix, attention left at the neutral init.
FusedCloneModel wrap_plain(EmbeddingModel m);
// Clone with frozen auxiliary embeddings and a fusion eligibility mask.
FusedCloneModel make_fused(EmbeddingModel clone, Matrix q_aux,
                           std::vector<std::uint8_t> aux_eligible);
EmbeddingModel unwrap_plain(FusedCloneModel m);

// Gradient accumulators for every trainable buffer of a FusedCloneModel.
// Q_a has no slot: it is frozen by construction.
struct CloneGrads {
  Matrix P;
  Matrix Q_c;
  std::vector<double> att_w;
  double att_b = 0.0;
  std::vector<double> head_w;
  double head_b = 0.0;

  explicit CloneGrads(const FusedCloneModel& m);
  void zero();
  void scale(double s);
};

// Cached intermediates of one fused (or plain) score evaluation, reused by
// fused_backward. Buffers are reusable across calls.
struct FusedScoreCtx {
  int user = 0;
  int item = 0;
  bool fused = false;
  double alpha_n = 0.0;  // normalized clone weight
  double beta_n = 0.0;   // normalized auxiliary weight
  double score_gap = 0.0;  // clone-path score minus auxiliary-path score
  std::vector<double> h_c, h_a;  // ReLU(p .* q) activations
  std::vector<double> q_f;       // fused item embedding
};

double fused_forward(const FusedCloneModel& m, int user, int item, FusedScoreCtx& ctx);
// Accumulates d(loss)/d(params) for upstream = d(loss)/d(score).
void fused_backward(const FusedCloneModel& m, const FusedScoreCtx& ctx, double upstream,
                    CloneGrads& g);

}  // namespace recsteal
