#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "recsteal/rng.hpp"
#include "recsteal/trainer.hpp"

using namespace recsteal;

namespace {

InteractionDataset make_ds(int num_users, int num_items,
                           const std::map<int, std::vector<int>>& inter) {
  InteractionDataset ds;
  ds.num_users = num_users;
  ds.num_items = num_items;
  ds.interactions = {inter.begin(), inter.end()};
  return ds;
}

InteractionDataset random_ds(int users, int items, int degree, std::uint64_t seed) {
  Rng rng(seed);
  std::map<int, std::vector<int>> inter;
  for (int u = 0; u < users; ++u) {
    std::set<int> s;
    while (static_cast<int>(s.size()) < degree) s.insert(rng.uniform_int(items));
    inter[u] = {s.begin(), s.end()};
  }
  return make_ds(users, items, inter);
}

}  // namespace

TEST_CASE("lr=0 leaves the initialization untouched") {
  auto ds = make_ds(2, 3, {{0, {0}}, {1, {1, 2}}});
  TrainConfig cfg;
  cfg.embedding_dim = 4;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  cfg.rng_seed = 3;
  EmbeddingModel trained = train_model(ModelKind::BPR, ds, cfg);
  EmbeddingModel init = init_random(ModelKind::BPR, 2, 3, 4, derive_seed(3, seed_salt::kInit));
  CHECK(trained.P.data == init.P.data);
  CHECK(trained.Q.data == init.Q.data);
}

TEST_CASE("same seed twice is bit-identical") {
  auto ds = random_ds(12, 20, 5, 4);
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.epochs = 15;
  cfg.batch_size = 16;
  cfg.rng_seed = 99;
  for (ModelKind kind : {ModelKind::BPR, ModelKind::LMF, ModelKind::GMF}) {
    EmbeddingModel a = train_model(kind, ds, cfg);
    EmbeddingModel b = train_model(kind, ds, cfg);
    CHECK(a.P.data == b.P.data);
    CHECK(a.Q.data == b.Q.data);
    if (kind == ModelKind::GMF) {
      CHECK(a.head->w == b.head->w);
      CHECK(a.head->b == b.head->b);
    }
  }
}

TEST_CASE("bpr separates training positives from negatives on a tiny instance") {
  auto ds = make_ds(2, 3, {{0, {0}}, {1, {1}}});
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.epochs = 500;
  cfg.batch_size = 64;
  cfg.learning_rate = 0.01;
  cfg.rng_seed = 5;
  cfg.early_stop_tol = 0.0;
  EmbeddingModel m = train_model(ModelKind::BPR, ds, cfg);
  for (const auto& [u, items] : ds.interactions) {
    for (int pos : items) {
      for (int j = 0; j < ds.num_items; ++j) {
        if (ds.has(u, j)) continue;
        CHECK(m.score(u, pos) > m.score(u, j));
      }
    }
  }
}

TEST_CASE("pointwise kinds separate positives too") {
  auto ds = make_ds(2, 4, {{0, {0, 1}}, {1, {2}}});
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.epochs = 400;
  cfg.batch_size = 64;
  cfg.learning_rate = 0.01;
  cfg.negatives_per_positive = 3;
  cfg.rng_seed = 6;
  cfg.early_stop_tol = 0.0;
  for (ModelKind kind : {ModelKind::LMF, ModelKind::GMF}) {
    EmbeddingModel m = train_model(kind, ds, cfg);
    for (const auto& [u, items] : ds.interactions) {
      for (int pos : items) {
        for (int j = 0; j < ds.num_items; ++j) {
          if (ds.has(u, j)) continue;
          CHECK(m.score(u, pos) > m.score(u, j));
        }
      }
    }
  }
}

TEST_CASE("loss decreases over smoothed epoch windows") {
  auto ds = random_ds(20, 30, 6, 7);
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  cfg.rng_seed = 8;
  cfg.early_stop_tol = 0.0;
  TrainSummary summary;
  train_model(ModelKind::BPR, ds, cfg, &summary);
  REQUIRE(summary.epochs_run == 40);
  std::vector<double> windows;
  for (std::size_t w = 0; w + 5 <= summary.epoch_losses.size(); w += 5) {
    double mean = 0.0;
    for (std::size_t i = w; i < w + 5; ++i) mean += summary.epoch_losses[i];
    windows.push_back(mean / 5.0);
  }
  for (std::size_t i = 1; i < windows.size(); ++i) CHECK(windows[i] <= windows[i - 1] + 1e-6);
}

TEST_CASE("early stop halts a flat run") {
  // every user misses exactly one item, so the negative draw is forced and
  // a zero learning rate makes the epoch loss exactly constant
  auto ds = make_ds(3, 4, {{0, {1, 2, 3}}, {1, {0, 2, 3}}, {2, {0, 1, 3}}});
  TrainConfig cfg;
  cfg.embedding_dim = 4;
  cfg.epochs = 100;
  cfg.learning_rate = 0.0;
  cfg.rng_seed = 10;
  cfg.early_stop_tol = 1e-5;
  TrainSummary summary;
  train_model(ModelKind::BPR, ds, cfg, &summary);
  CHECK(summary.epochs_run == 2);
}

TEST_CASE("divergence aborts with a diagnostic") {
  auto ds = random_ds(4, 8, 3, 11);
  TrainConfig cfg;
  cfg.embedding_dim = 4;
  cfg.epochs = 50;
  cfg.learning_rate = 1e160;  // overflows the scores within a few steps
  cfg.rng_seed = 11;
  CHECK_THROWS_WITH_AS(train_model(ModelKind::BPR, ds, cfg), doctest::Contains("diverged"),
                       std::runtime_error);
}

TEST_CASE("empty dataset rejected") {
  InteractionDataset empty;
  empty.num_users = 3;
  empty.num_items = 3;
  TrainConfig cfg;
  CHECK_THROWS_AS(train_model(ModelKind::BPR, empty, cfg), std::invalid_argument);
}
