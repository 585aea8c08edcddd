#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recsteal/dataset.hpp"
#include "recsteal/matrix.hpp"

namespace recsteal {

enum class ModelKind { BPR, LMF, GMF };

const char* to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(std::string_view s);

// Learned linear head over the user-item Hadamard product.
struct GmfHead {
  std::vector<double> w;
  double b = 0.0;
};

double gmf_score(const GmfHead& head, std::span<const double> p, std::span<const double> q);

// Embedding recommender: user matrix P, item matrix Q, optional GMF head.
// BPR and LMF share the dot-product scorer and differ only in training loss.
struct EmbeddingModel {
  ModelKind kind = ModelKind::BPR;
  Matrix P;
  Matrix Q;
  std::optional<GmfHead> head;  // engaged iff kind == GMF

  int dim() const { return P.cols; }
  int num_users() const { return P.rows; }
  int num_items() const { return Q.rows; }
  double score(int user, int item) const;
};

// Ordered top-k items for one user.
struct RecommendationList {
  int user = 0;
  std::vector<int> items;
};

// Entries i.i.d. uniform in [-0.5/d, 0.5/d]; GMF heads start as the identity
// head (w = 1, b = 0) so initial GMF scores coincide with the dot product.
EmbeddingModel init_random(ModelKind kind, int num_users, int num_items, int dim,
                           std::uint64_t rng_seed);

// k highest-scoring non-excluded items, scores descending, ties broken by
// ascending item index. exclude must be sorted.
RecommendationList top_k_from_scores(int user, std::span<const double> scores, int k,
                                     const std::vector<int>& exclude_sorted);

template <class Model>
RecommendationList recommend_top_k(const Model& model, int user, int k,
                                   const std::vector<int>& exclude_sorted) {
  std::vector<double> scores(static_cast<std::size_t>(model.num_items()));
  for (int j = 0; j < model.num_items(); ++j) {
    scores[static_cast<std::size_t>(j)] = model.score(user, j);
  }
  return top_k_from_scores(user, scores, k, exclude_sorted);
}

// Versioned JSON checkpoint; doubles round-trip exactly.
void save_model(const EmbeddingModel& model, const std::string& path,
                const IdMap* user_ids = nullptr, const IdMap* item_ids = nullptr);
struct LoadedModel {
  EmbeddingModel model;
  IdMap user_ids;
  IdMap item_ids;
};
LoadedModel load_model(const std::string& path);

}  // namespace recsteal
