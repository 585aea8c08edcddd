#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "recsteal/oracle.hpp"

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

// Counting oracle: tally and sort by (count desc, index asc).
std::vector<int> popularity_oracle(const InteractionDataset& ds) {
  std::vector<std::pair<long, int>> keyed;
  for (int i = 0; i < ds.num_items; ++i) {
    long c = 0;
    for (const auto& [u, items] : ds.interactions) {
      c += std::binary_search(items.begin(), items.end(), i) ? 1 : 0;
    }
    keyed.push_back({-c, i});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> out;
  for (auto& [negc, i] : keyed) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("popularity ranking: counts and ties") {
  // counts: item0=3, item1=1, item2=2
  auto ds = make_ds(3, 3, {{0, {0, 1, 2}}, {1, {0, 2}}, {2, {0}}});
  CHECK(popularity_ranking(ds) == std::vector<int>{0, 2, 1});

  auto even = make_ds(2, 4, {{0, {0, 1, 2, 3}}, {1, {0, 1, 2, 3}}});
  CHECK(popularity_ranking(even) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("popularity ranking matches the counting oracle") {
  Rng rng(31);
  for (int t = 0; t < 30; ++t) {
    std::map<int, std::vector<int>> inter;
    const int users = 5 + rng.uniform_int(10);
    const int items = 5 + rng.uniform_int(20);
    for (int u = 0; u < users; ++u) {
      std::set<int> s;
      const int deg = 1 + rng.uniform_int(items / 2);
      for (int i = 0; i < deg; ++i) s.insert(rng.uniform_int(items));
      inter[u] = {s.begin(), s.end()};
    }
    auto ds = make_ds(users, items, inter);
    CHECK(popularity_ranking(ds) == popularity_oracle(ds));
  }
}

TEST_CASE("mix_popular: boundary cases") {
  RecommendationList list{0, {10, 11, 12, 13}};
  std::vector<int> popular;
  for (int i = 0; i < 40; ++i) popular.push_back(i);
  Rng rng(1);

  DefenseConfig zero{0, 10, 0};
  CHECK(mix_popular(list, zero, popular, {}, rng).items == list.items);

  DefenseConfig full{4, 10, 0};
  RecommendationList out = mix_popular(list, full, popular, {}, rng);
  for (int item : out.items) CHECK(item < 10);  // all replaced from pool
  std::set<int> dedup(out.items.begin(), out.items.end());
  CHECK(dedup.size() == 4);
}

TEST_CASE("mix_popular: deterministic straight-line replay") {
  RecommendationList list{3, {100, 101, 102, 103}};
  std::vector<int> popular;
  for (int i = 0; i < 30; ++i) popular.push_back(i);
  const std::vector<int> exclusions = {0, 2};
  DefenseConfig cfg{2, 6, 0};

  Rng rng(42);
  RecommendationList got = mix_popular(list, cfg, popular, exclusions, rng);

  // Replay the documented sampling contract with an independent RNG clone.
  Rng replay(42);
  const int k = 4;
  std::vector<int> pool;  // top-6 popular, minus list and exclusions
  for (int i = 0; i < 6; ++i) {
    const int item = popular[i];
    if (std::count(list.items.begin(), list.items.end(), item)) continue;
    if (std::binary_search(exclusions.begin(), exclusions.end(), item)) continue;
    pool.push_back(item);
  }
  std::vector<int> positions = {0, 1, 2, 3};
  for (int i = 0; i < cfg.mix_count; ++i) {
    const int j = i + replay.uniform_int(k - i);
    std::swap(positions[i], positions[j]);
  }
  positions.resize(2);
  std::sort(positions.begin(), positions.end());
  for (int i = 0; i < cfg.mix_count; ++i) {
    const int j = i + replay.uniform_int(static_cast<int>(pool.size()) - i);
    std::swap(pool[i], pool[j]);
  }
  RecommendationList want = list;
  for (int i = 0; i < cfg.mix_count; ++i) want.items[positions[i]] = pool[i];
  CHECK(got.items == want.items);
}

TEST_CASE("mix_popular: property sweep") {
  Rng rng(7);
  for (int t = 0; t < 10000; ++t) {
    const int k = 3 + rng.uniform_int(8);
    const int mix = rng.uniform_int(k + 1);
    // items 1000+ in the list, popular pool disjoint below 100
    RecommendationList list{0, {}};
    for (int i = 0; i < k; ++i) list.items.push_back(1000 + i);
    std::vector<int> popular;
    for (int i = 0; i < 60; ++i) popular.push_back(i);
    std::vector<int> exclusions;
    for (int i = 0; i < 10; ++i) {
      if (rng.uniform() < 0.5) exclusions.push_back(i * 3);
    }
    std::sort(exclusions.begin(), exclusions.end());
    DefenseConfig cfg{mix, 40, 0};
    RecommendationList out = mix_popular(list, cfg, popular, exclusions, rng);

    CHECK(out.items.size() == list.items.size());
    std::set<int> dedup(out.items.begin(), out.items.end());
    CHECK(dedup.size() == out.items.size());
    int replaced = 0;
    for (std::size_t i = 0; i < out.items.size(); ++i) {
      if (out.items[i] != list.items[i]) {
        ++replaced;
        CHECK(!std::binary_search(exclusions.begin(), exclusions.end(), out.items[i]));
        CHECK(out.items[i] < 40);  // drawn from the pool prefix
      }
    }
    // pool and list are disjoint here, so exactly `mix` positions change
    CHECK(replaced == mix);
  }
}

TEST_CASE("mix_popular: pool exhaustion") {
  RecommendationList list{0, {0, 1, 2, 3}};
  std::vector<int> popular = {0, 1, 2, 3, 4, 5};
  Rng rng(3);
  DefenseConfig cfg{3, 6, 0};
  // pool minus list leaves only {4, 5}: cannot supply 3 replacements
  CHECK_THROWS_WITH_AS(mix_popular(list, cfg, popular, {}, rng), doctest::Contains("exhausted"),
                       std::runtime_error);
}

TEST_CASE("oracle: budget, cache, log") {
  auto ds = make_ds(8, 30, {{0, {0, 1}}, {1, {2}}, {2, {3}}, {3, {4}}, {4, {5}}, {5, {6}},
                            {6, {7}}, {7, {8}}});
  EmbeddingModel target = init_random(ModelKind::BPR, 8, 30, 6, 17);
  QueryOracle oracle(target, ds, 5, std::uint64_t{5});

  for (int u = 0; u < 5; ++u) {
    const RecommendationList& list = oracle.query(u);
    CHECK(list.user == u);
    CHECK(list.items.size() == 5);
    // passthrough: same as recommending directly
    CHECK(list.items == recommend_top_k(target, u, 5, ds.items_of(u)).items);
    for (int item : list.items) CHECK(!ds.has(u, item));
  }
  CHECK(oracle.spent() == 5);
  CHECK(oracle.log().size() == 5);

  // repeat query: cached, free, not re-logged
  const RecommendationList first = oracle.query(0);
  CHECK(oracle.spent() == 5);
  CHECK(oracle.log().size() == 5);
  CHECK(oracle.query(0).items == first.items);

  CHECK_THROWS_AS(oracle.query(5), BudgetExhaustedError);
  CHECK(oracle.spent() == 5);  // failed query spends nothing
}

TEST_CASE("oracle: defense applied and cached consistently") {
  std::map<int, std::vector<int>> inter;
  for (int u = 0; u < 6; ++u) inter[u] = {u, u + 1, u + 2};
  auto ds = make_ds(6, 40, inter);
  EmbeddingModel target = init_random(ModelKind::BPR, 6, 40, 6, 18);

  DefenseConfig defense{3, 20, 777};
  QueryOracle defended(target, ds, 8, {}, defense);
  QueryOracle raw(target, ds, 8);

  int diffs = 0;
  for (int u = 0; u < 6; ++u) {
    const RecommendationList& d = defended.query(u);
    const RecommendationList& r = raw.query(u);
    CHECK(d.items.size() == r.items.size());
    std::set<int> dedup(d.items.begin(), d.items.end());
    CHECK(dedup.size() == d.items.size());
    for (int item : d.items) CHECK(!ds.has(u, item));
    for (std::size_t i = 0; i < d.items.size(); ++i) diffs += d.items[i] != r.items[i];
    // cached repeat returns the same defended list
    CHECK(defended.query(u).items == d.items);
  }
  CHECK(diffs >= 6);  // defense really replaced items (3 per list at most)
}

TEST_CASE("oracle: log export format") {
  auto ds = make_ds(2, 10, {{0, {0}}, {1, {1}}});
  for (int u = 0; u < 2; ++u) ds.user_ids.intern("user" + std::to_string(u * 7));
  for (int i = 0; i < 10; ++i) ds.item_ids.intern("item" + std::to_string(i));
  EmbeddingModel target = init_random(ModelKind::BPR, 2, 10, 4, 19);
  QueryOracle oracle(target, ds, 3);
  oracle.query(1);
  oracle.query(0);
  std::ostringstream out;
  oracle.write_log_csv(out);
  const std::string text = out.str();
  CHECK(text.substr(0, 28) == "query_index,user_id,item_ids");
  CHECK(text.find("0,user7,") != std::string::npos);   // first query was user index 1
  CHECK(text.find("1,user0,") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '|') == 4);  // two lists of 3 items
}
