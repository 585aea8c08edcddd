#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "recsteal/attack.hpp"
#include "recsteal/metrics.hpp"

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

// Double-loop reimplementation of the stealing loss.
template <class Model>
double stealing_oracle(const Model& m, const RecommendationList& rec,
                       const StealingLossSpec& spec,
                       const std::vector<NegativeSample>& negs) {
  double rank_part = 0.0, pos_part = 0.0;
  for (std::size_t j = 0; j + 1 < rec.items.size(); ++j) {
    const double a = m.score(rec.user, rec.items[j]);
    const double b = m.score(rec.user, rec.items[j + 1]);
    rank_part += spec.ranking_loss == RankLossKind::BPR ? loss_bpr(a, b)
                                                        : loss_hinge(a, b, spec.margin);
  }
  for (std::size_t j = 0; j < rec.items.size(); ++j) {
    const double a = m.score(rec.user, rec.items[j]);
    for (int k : negs[j].items) {
      const double b = m.score(rec.user, k);
      pos_part += spec.positive_loss == RankLossKind::BPR ? loss_bpr(a, b)
                                                          : loss_hinge(a, b, spec.margin);
    }
  }
  return rank_part + pos_part;
}

TrainConfig small_cfg(std::uint64_t seed, int epochs = 25) {
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.epochs = epochs;
  cfg.batch_size = 64;
  cfg.rng_seed = seed;
  cfg.early_stop_tol = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("train_ptd delegates to train_model bit-for-bit") {
  auto ds = random_ds(10, 25, 5, 1);
  TrainConfig cfg = small_cfg(44);
  EmbeddingModel a = train_ptd(ds, cfg, ModelKind::BPR);
  EmbeddingModel b = train_model(ModelKind::BPR, ds, cfg);
  CHECK(a.P.data == b.P.data);
  CHECK(a.Q.data == b.Q.data);
}

TEST_CASE("pta with an all-ineligible mask reproduces ptd exactly") {
  auto ds = random_ds(10, 25, 5, 2);
  TrainConfig cfg = small_cfg(45);
  Matrix q_aux(25, 8);
  Rng rng(9);
  for (double& x : q_aux.data) x = rng.uniform(-1, 1);
  const std::vector<double> q_aux_before = q_aux.data;

  EmbeddingModel ptd = train_ptd(ds, cfg, ModelKind::BPR);
  FusedCloneModel pta =
      train_pta(ds, q_aux, std::vector<std::uint8_t>(25, 0), cfg, ModelKind::BPR);

  CHECK(pta.P.data == ptd.P.data);
  CHECK(pta.Q_c.data == ptd.Q.data);
  CHECK(pta.Q_a.data == q_aux_before);  // frozen
  // untouched attention parameters stay at the neutral init
  CHECK(pta.attention.w == std::vector<double>(8, 0.0));
  CHECK(pta.attention.b == 0.0);
}

TEST_CASE("pta trains the attention parameters and freezes the auxiliary matrix") {
  auto ds = random_ds(10, 25, 5, 3);
  TrainConfig cfg = small_cfg(46);
  Matrix q_aux(25, 8);
  Rng rng(10);
  for (double& x : q_aux.data) x = rng.uniform(-1, 1);
  const std::vector<double> before = q_aux.data;
  FusedCloneModel pta =
      train_pta(ds, q_aux, std::vector<std::uint8_t>(25, 1), cfg, ModelKind::BPR);
  CHECK(pta.Q_a.data == before);
  double att_norm = 0.0;
  for (double x : pta.attention.w) att_norm += std::abs(x);
  CHECK(att_norm > 0.0);

  // comparison switch: frozen attention stays at the neutral init
  cfg.freeze_attention = true;
  FusedCloneModel frozen =
      train_pta(ds, q_aux, std::vector<std::uint8_t>(25, 1), cfg, ModelKind::BPR);
  CHECK(frozen.attention.w == std::vector<double>(8, 0.0));
  CHECK(frozen.attention.b == 0.0);
  CHECK(frozen.P.data != pta.P.data);  // embeddings still train
}

TEST_CASE("pta_pretrain: lr=0 keeps the auxiliary matrix as the clone items") {
  auto ds = random_ds(6, 15, 4, 4);
  TrainConfig cfg = small_cfg(47, 1);
  cfg.learning_rate = 0.0;
  Matrix q_aux(15, 8);
  Rng rng(11);
  for (double& x : q_aux.data) x = rng.uniform(-1, 1);
  EmbeddingModel m = train_pta_pretrain(ds, q_aux, cfg, ModelKind::BPR);
  CHECK(m.Q.data == q_aux.data);
}

TEST_CASE("pta_pretrain reduces to ptd when seeded with ptd's own init") {
  auto ds = random_ds(8, 18, 4, 12);
  TrainConfig cfg = small_cfg(62, 20);
  const EmbeddingModel init = init_random(ModelKind::BPR, ds.num_users, ds.num_items,
                                          cfg.embedding_dim,
                                          derive_seed(cfg.rng_seed, seed_salt::kInit));
  EmbeddingModel pre = train_pta_pretrain(ds, init.Q, cfg, ModelKind::BPR);
  EmbeddingModel ptd = train_ptd(ds, cfg, ModelKind::BPR);
  CHECK(pre.P.data == ptd.P.data);
  CHECK(pre.Q.data == ptd.Q.data);
}

TEST_CASE("auxiliary shape mismatches are rejected") {
  auto ds = random_ds(6, 15, 4, 13);
  TrainConfig cfg = small_cfg(63, 1);
  Matrix wrong(15, 4);  // dim mismatch vs cfg.embedding_dim = 8
  CHECK_THROWS_AS(train_pta(ds, wrong, std::vector<std::uint8_t>(15, 1), cfg, ModelKind::BPR),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_pta_pretrain(ds, wrong, cfg, ModelKind::BPR), std::invalid_argument);
  Matrix right(15, 8);
  CHECK_THROWS_AS(train_pta(ds, right, std::vector<std::uint8_t>(10, 1), cfg, ModelKind::BPR),
                  std::invalid_argument);
}

TEST_CASE("stealing loss: boundary and hand values") {
  EmbeddingModel m;
  m.kind = ModelKind::BPR;
  m.P = Matrix(1, 2);
  m.Q = Matrix(4, 2);
  m.P.row(0)[0] = 1.0;
  m.P.row(0)[1] = 0.0;
  // scores: item j -> Q[j][0]
  m.Q.at(0, 0) = 1.0;
  m.Q.at(1, 0) = 0.5;  // exactly margin below item 0
  m.Q.at(2, 0) = 1.0;
  m.Q.at(3, 0) = 0.2;

  StealingLossSpec spec;  // BPR ranking + hinge positive, margin 0.5
  // single item, one negative at exactly the margin: both parts vanish
  RecommendationList single{0, {0}};
  std::vector<NegativeSample> negs = {{0, {1}}};
  CHECK(stealing_loss(m, single, spec, negs) == 0.0);

  // two items with equal scores: ranking term is ln 2
  RecommendationList pair{0, {0, 2}};
  std::vector<NegativeSample> none = {{0, {}}, {0, {}}};
  CHECK(stealing_loss(m, pair, spec, none) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  RecommendationList empty{0, {}};
  CHECK_THROWS_AS(stealing_loss(m, empty, spec, {}), std::invalid_argument);
}

TEST_CASE("stealing loss matches the double-loop oracle") {
  Rng rng(12);
  for (int t = 0; t < 40; ++t) {
    EmbeddingModel m = init_random(ModelKind::BPR, 2, 30, 6, 500 + t);
    for (double& x : m.P.data) x = rng.uniform(-1, 1);
    for (double& x : m.Q.data) x = rng.uniform(-1, 1);
    RecommendationList rec{1, {3, 17, 4, 22, 9}};
    std::vector<NegativeSample> negs;
    for (int j = 0; j < 5; ++j) {
      NegativeSample s{1, {rng.uniform_int(30), rng.uniform_int(30)}};
      negs.push_back(s);
    }
    StealingLossSpec spec;
    spec.ranking_loss = t % 2 ? RankLossKind::Hinge : RankLossKind::BPR;
    spec.positive_loss = t % 3 ? RankLossKind::Hinge : RankLossKind::BPR;
    CHECK(stealing_loss(m, rec, spec, negs) ==
          doctest::Approx(stealing_oracle(m, rec, spec, negs)).epsilon(1e-12));
  }
}

TEST_CASE("finetune with lr=0: model unchanged, one query per user") {
  auto ds = random_ds(12, 40, 6, 5);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(48, 10));
  QueryOracle oracle(target, ds, 8);

  EmbeddingModel clone = init_random(ModelKind::BPR, 12, 40, 8, 7);
  const std::vector<double> p0 = clone.P.data, q0 = clone.Q.data;
  TrainConfig ft = small_cfg(49, 5);
  ft.learning_rate = 0.0;
  ft.early_stop_tol = 0.0;
  StealingLossSpec spec;
  const std::vector<int> users = {0, 1, 2, 3, 4};
  finetune_with_queries(clone, oracle, users, ds, spec, ft);
  CHECK(clone.P.data == p0);
  CHECK(clone.Q.data == q0);
  CHECK(oracle.spent() == users.size());
  CHECK(oracle.log().size() == users.size());

  // a second phase over the same users hits the cache: spent unchanged
  finetune_with_queries(clone, oracle, users, ds, spec, ft);
  CHECK(oracle.spent() == users.size());
}

TEST_CASE("finetune aborts with a progress report when the budget runs out") {
  auto ds = random_ds(10, 30, 5, 6);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(50, 10));
  QueryOracle oracle(target, ds, 5, std::uint64_t{3});
  EmbeddingModel clone = init_random(ModelKind::BPR, 10, 30, 8, 8);
  StealingLossSpec spec;
  const std::vector<int> users = {0, 1, 2, 3, 4};
  CHECK_THROWS_WITH_AS(
      finetune_with_queries(clone, oracle, users, ds, spec, small_cfg(51, 3)),
      doctest::Contains("3 of 5"), BudgetExhaustedError);
}

TEST_CASE("ptaq with an all-ineligible mask reproduces ptq exactly") {
  auto ds = random_ds(10, 30, 5, 7);
  TrainConfig cfg = small_cfg(52, 15);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(53, 15));
  Matrix q_aux(30, 8);
  Rng rng(13);
  for (double& x : q_aux.data) x = rng.uniform(-1, 1);
  const std::vector<double> q_aux_before = q_aux.data;
  StealingLossSpec spec;
  TrainConfig ft = small_cfg(52, 8);
  const std::vector<int> users = ds.users();

  // PTQ: plain clone, then query fine-tune
  EmbeddingModel ptq = train_ptd(ds, cfg, ModelKind::BPR);
  QueryOracle oracle_a(target, ds, 6);
  finetune_with_queries(ptq, oracle_a, users, ds, spec, ft);

  // PTAQ with nothing eligible
  FusedCloneModel ptaq =
      train_pta(ds, q_aux, std::vector<std::uint8_t>(30, 0), cfg, ModelKind::BPR);
  QueryOracle oracle_b(target, ds, 6);
  finetune_with_queries(ptaq, oracle_b, users, ds, spec, ft);

  CHECK(ptaq.P.data == ptq.P.data);
  CHECK(ptaq.Q_c.data == ptq.Q.data);
  CHECK(ptaq.Q_a.data == q_aux_before);

  // the eligible run actually diverges from the plain one
  FusedCloneModel fused =
      train_pta(ds, q_aux, std::vector<std::uint8_t>(30, 1), cfg, ModelKind::BPR);
  CHECK(fused.P.data != ptq.P.data);
}

TEST_CASE("qsd: zero epochs returns the untouched random clone") {
  auto ds = random_ds(8, 20, 4, 8);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(54, 10));
  QueryOracle oracle(target, ds, 5);
  TrainConfig cfg = small_cfg(55, 0);
  StealingLossSpec spec = StealingLossSpec{RankLossKind::Hinge, RankLossKind::Hinge, 0.5, 2};
  EmbeddingModel clone = train_qsd_adapted(oracle, ds.users(), ds, spec, cfg, ModelKind::BPR);
  EmbeddingModel init =
      init_random(ModelKind::BPR, 8, 20, 8, derive_seed(55, seed_salt::kInit));
  CHECK(clone.P.data == init.P.data);
  CHECK(oracle.spent() == 0);  // no training, no queries
}

TEST_CASE("qsd runs under any stealing spec") {
  auto ds = random_ds(8, 20, 4, 9);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(56, 10));
  for (RankLossKind ranking : {RankLossKind::Hinge, RankLossKind::BPR}) {
    QueryOracle oracle(target, ds, 5);
    StealingLossSpec spec{ranking, RankLossKind::Hinge, 0.5, 2};
    EmbeddingModel clone =
        train_qsd_adapted(oracle, ds.users(), ds, spec, small_cfg(57, 5), ModelKind::BPR);
    CHECK(all_finite(clone.P.data));
    CHECK(oracle.spent() == 8);
  }
}

TEST_CASE("finetuning moves the clone toward the target's lists") {
  auto ds = random_ds(10, 40, 6, 10);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(58, 40));
  TrainConfig cfg = small_cfg(59, 20);
  EmbeddingModel clone = train_ptd(ds, cfg, ModelKind::BPR);
  const std::vector<int> users = ds.users();
  const double before = mean_agreement(target, clone, users, 8, ds);
  QueryOracle oracle(target, ds, 8);
  TrainConfig ft = small_cfg(59, 30);
  finetune_with_queries(clone, oracle, users, ds, StealingLossSpec{}, ft);
  const double after = mean_agreement(target, clone, users, 8, ds);
  CHECK(after > before);
}

TEST_CASE("agreement is invariant under positive rescaling of clone scores") {
  auto ds = random_ds(6, 25, 4, 11);
  EmbeddingModel target = train_model(ModelKind::BPR, ds, small_cfg(60, 15));
  EmbeddingModel clone = train_ptd(ds, small_cfg(61, 15), ModelKind::BPR);
  const double base = mean_agreement(target, clone, ds.users(), 6, ds);
  for (double c : {0.1, 3.0, 250.0}) {
    EmbeddingModel scaled = clone;
    for (double& x : scaled.P.data) x *= c;
    CHECK(mean_agreement(target, scaled, ds.users(), 6, ds) == base);
  }
}
