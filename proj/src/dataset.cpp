#include "recsteal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace recsteal {

namespace {

const std::vector<int> kEmpty;

bool contains_sorted(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}

std::vector<int> merge_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Subset of `ds` with only the given users, same index spaces and id maps.
InteractionDataset subset_users(const InteractionDataset& ds, const std::vector<int>& users) {
  InteractionDataset out;
  out.num_users = ds.num_users;
  out.num_items = ds.num_items;
  out.user_ids = ds.user_ids;
  out.item_ids = ds.item_ids;
  for (int u : users) {
    auto it = ds.interactions.find(u);
    if (it != ds.interactions.end() && !it->second.empty()) out.interactions[u] = it->second;
  }
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_fields(const std::string& line, const std::string& delim) {
  std::vector<std::string> out;
  if (delim == " ") {  // any-whitespace mode
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
  }
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(delim, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + delim.size();
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string sniff_delimiter(const std::string& path, const std::string& first_line) {
  std::string lp = lower(path);
  if (lp.size() >= 4 && lp.substr(lp.size() - 4) == ".csv") return ",";
  if (lp.size() >= 4 && lp.substr(lp.size() - 4) == ".tsv") return "\t";
  if (first_line.find("::") != std::string::npos) return "::";
  if (first_line.find('\t') != std::string::npos) return "\t";
  if (first_line.find(',') != std::string::npos) return ",";
  return " ";
}

bool looks_like_header(const std::vector<std::string>& fields) {
  if (fields.size() < 2) return false;
  const std::string a = lower(trim(fields[0]));
  const std::string b = lower(trim(fields[1]));
  return a.find("user") != std::string::npos && b.find("item") != std::string::npos;
}

}  // namespace

int IdMap::intern(const std::string& raw) {
  auto it = to_index.find(raw);
  if (it != to_index.end()) return it->second;
  const int idx = static_cast<int>(to_raw.size());
  to_raw.push_back(raw);
  to_index.emplace(raw, idx);
  return idx;
}

std::vector<int> InteractionDataset::users() const {
  std::vector<int> out;
  out.reserve(interactions.size());
  for (const auto& [u, items] : interactions) out.push_back(u);
  return out;
}

const std::vector<int>& InteractionDataset::items_of(int user) const {
  auto it = interactions.find(user);
  return it == interactions.end() ? kEmpty : it->second;
}

std::size_t InteractionDataset::interaction_count() const {
  std::size_t n = 0;
  for (const auto& [u, items] : interactions) n += items.size();
  return n;
}

bool InteractionDataset::has(int user, int item) const {
  return contains_sorted(items_of(user), item);
}

std::vector<int> InteractionDataset::present_items() const {
  std::set<int> s;
  for (const auto& [u, items] : interactions) s.insert(items.begin(), items.end());
  return {s.begin(), s.end()};
}

void InteractionDataset::check() const {
  for (const auto& [u, items] : interactions) {
    if (u < 0 || u >= num_users) throw std::logic_error("user index out of range");
    if (!std::is_sorted(items.begin(), items.end())) throw std::logic_error("unsorted item set");
    if (std::adjacent_find(items.begin(), items.end()) != items.end()) {
      throw std::logic_error("duplicate interaction");
    }
    if (!items.empty() && (items.front() < 0 || items.back() >= num_items)) {
      throw std::logic_error("item index out of range");
    }
  }
}

InteractionDataset load_interactions(const std::string& path,
                                     std::optional<std::string> delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open interaction file: " + path);

  InteractionDataset ds;
  std::map<int, std::set<int>> sets;
  std::string line;
  long line_no = 0;
  std::string delim = delimiter.value_or("");
  bool first_content_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (delim.empty()) delim = sniff_delimiter(path, line);
    std::vector<std::string> fields = split_fields(line, delim);
    if (first_content_line) {
      first_content_line = false;
      if (looks_like_header(fields)) continue;
    }
    if (fields.size() < 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed row, need at least user and item columns");
    }
    const int u = ds.user_ids.intern(trim(fields[0]));
    const int i = ds.item_ids.intern(trim(fields[1]));
    sets[u].insert(i);  // duplicates collapse
  }
  if (sets.empty()) throw std::runtime_error(path + ": no interactions");

  ds.num_users = ds.user_ids.size();
  ds.num_items = ds.item_ids.size();
  for (auto& [u, s] : sets) ds.interactions[u] = std::vector<int>(s.begin(), s.end());
  return ds;
}

InteractionDataset filter_min_interactions(const InteractionDataset& ds, int k) {
  if (k < 1) throw std::invalid_argument("filter_min_interactions: k must be >= 1");

  std::map<int, std::vector<int>> cur = ds.interactions;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> item_degree(static_cast<std::size_t>(ds.num_items), 0);
    for (const auto& [u, items] : cur) {
      for (int i : items) ++item_degree[static_cast<std::size_t>(i)];
    }
    std::map<int, std::vector<int>> next;
    for (const auto& [u, items] : cur) {
      std::vector<int> kept;
      kept.reserve(items.size());
      for (int i : items) {
        if (item_degree[static_cast<std::size_t>(i)] >= k) kept.push_back(i);
      }
      if (static_cast<int>(kept.size()) >= k) {
        if (kept.size() != items.size()) changed = true;
        next[u] = std::move(kept);
      } else {
        changed = true;
      }
    }
    cur = std::move(next);
    if (cur.empty()) throw std::runtime_error("filter_min_interactions: empty result");
  }

  // Re-densify both index spaces, keeping relative order of surviving indices.
  std::vector<int> user_remap(static_cast<std::size_t>(ds.num_users), -1);
  std::vector<int> item_remap(static_cast<std::size_t>(ds.num_items), -1);
  InteractionDataset out;
  for (const auto& [u, items] : cur) {
    if (user_remap[static_cast<std::size_t>(u)] < 0) {
      user_remap[static_cast<std::size_t>(u)] = out.num_users++;
      out.user_ids.intern(ds.user_ids.to_raw.empty() ? std::to_string(u) : ds.user_ids.raw(u));
    }
  }
  std::set<int> surviving_items;
  for (const auto& [u, items] : cur) surviving_items.insert(items.begin(), items.end());
  for (int i : surviving_items) {
    item_remap[static_cast<std::size_t>(i)] = out.num_items++;
    out.item_ids.intern(ds.item_ids.to_raw.empty() ? std::to_string(i) : ds.item_ids.raw(i));
  }
  for (const auto& [u, items] : cur) {
    std::vector<int> mapped;
    mapped.reserve(items.size());
    for (int i : items) mapped.push_back(item_remap[static_cast<std::size_t>(i)]);
    std::sort(mapped.begin(), mapped.end());
    out.interactions[user_remap[static_cast<std::size_t>(u)]] = std::move(mapped);
  }
  return out;
}

std::pair<InteractionDataset, InteractionDataset> split_target_auxiliary(
    const InteractionDataset& ds, std::uint64_t rng_seed) {
  std::vector<int> users = ds.users();
  if (users.empty()) throw std::invalid_argument("split_target_auxiliary: empty dataset");
  Rng rng(rng_seed);
  rng.shuffle(users);
  const std::size_t half = (users.size() + 1) / 2;
  std::vector<int> target_users(users.begin(), users.begin() + static_cast<long>(half));
  std::vector<int> aux_users(users.begin() + static_cast<long>(half), users.end());
  return {subset_users(ds, target_users), subset_users(ds, aux_users)};
}

InteractionDataset sample_available(const InteractionDataset& ds, double fraction,
                                    std::uint64_t rng_seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("sample_available: fraction must be in (0, 1]");
  }
  std::vector<int> users = ds.users();
  const std::size_t want =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(users.size())));
  Rng rng(rng_seed);
  rng.shuffle(users);
  users.resize(std::min(want, users.size()));
  return subset_users(ds, users);
}

std::pair<InteractionDataset, InteractionDataset> split_holdout(const InteractionDataset& ds,
                                                                double fraction,
                                                                std::uint64_t rng_seed) {
  if (!(fraction > 0.0) || fraction >= 1.0) {
    throw std::invalid_argument("split_holdout: fraction must be in (0, 1)");
  }
  Rng rng(rng_seed);
  InteractionDataset train = subset_users(ds, {});
  InteractionDataset held = subset_users(ds, {});
  for (const auto& [u, items] : ds.interactions) {
    const int n = static_cast<int>(items.size());
    if (n < 2) {  // never strip a user's whole history
      train.interactions[u] = items;
      continue;
    }
    int h = std::max(1, static_cast<int>(std::floor(fraction * n)));
    h = std::min(h, n - 1);
    std::vector<int> shuffled = items;
    rng.shuffle(shuffled);
    std::vector<int> held_items(shuffled.begin(), shuffled.begin() + h);
    std::vector<int> train_items(shuffled.begin() + h, shuffled.end());
    std::sort(held_items.begin(), held_items.end());
    std::sort(train_items.begin(), train_items.end());
    held.interactions[u] = std::move(held_items);
    train.interactions[u] = std::move(train_items);
  }
  return {std::move(train), std::move(held)};
}

std::vector<std::uint8_t> restrict_item_overlap(const InteractionDataset& aux, double ratio,
                                                const std::vector<int>& target_items,
                                                std::uint64_t rng_seed) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw std::invalid_argument("restrict_item_overlap: ratio must be in (0, 1]");
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(aux.num_items), 0);
  std::vector<int> pool = target_items;
  const std::size_t want =
      static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(pool.size())));
  Rng rng(rng_seed);
  rng.shuffle(pool);
  for (std::size_t i = 0; i < want && i < pool.size(); ++i) {
    mask[static_cast<std::size_t>(pool[i])] = 1;
  }
  return mask;
}

int sample_negative_one(int num_items, const std::vector<int>& exclusions_sorted, Rng& rng) {
  if (static_cast<int>(exclusions_sorted.size()) >= num_items) {
    throw std::runtime_error("sample_negative_one: no candidate items");
  }
  while (true) {
    const int j = rng.uniform_int(num_items);
    if (!contains_sorted(exclusions_sorted, j)) return j;
  }
}

NegativeSample sample_negatives(const InteractionDataset& ds, int user, int n,
                                const std::vector<int>& extra_exclusions_sorted, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_negatives: n must be >= 0");
  NegativeSample out;
  out.user = user;
  if (n == 0) return out;

  const std::vector<int> excl = merge_sorted(ds.items_of(user), extra_exclusions_sorted);
  const long candidates = static_cast<long>(ds.num_items) - static_cast<long>(excl.size());
  if (candidates < n) {
    throw std::runtime_error("sample_negatives: only " + std::to_string(candidates) +
                             " candidate items for " + std::to_string(n) + " negatives");
  }

  if (candidates <= 4L * n) {
    // Dense regime: materialize the complement and take a partial shuffle.
    std::vector<int> comp;
    comp.reserve(static_cast<std::size_t>(candidates));
    for (int j = 0; j < ds.num_items; ++j) {
      if (!contains_sorted(excl, j)) comp.push_back(j);
    }
    for (int i = 0; i < n; ++i) {
      const int j = i + rng.uniform_int(static_cast<int>(comp.size()) - i);
      std::swap(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
      out.items.push_back(comp[static_cast<std::size_t>(i)]);
    }
  } else {
    std::set<int> drawn;
    while (static_cast<int>(out.items.size()) < n) {
      const int j = rng.uniform_int(ds.num_items);
      if (contains_sorted(excl, j) || drawn.count(j)) continue;
      drawn.insert(j);
      out.items.push_back(j);
    }
  }
  return out;
}

DataSplit make_data_split(const InteractionDataset& ds, std::uint64_t seed,
                          double available_fraction, double holdout_fraction) {
  DataSplit split;
  auto [target, aux] = split_target_auxiliary(ds, derive_seed(seed, seed_salt::kSplit));
  split.target = std::move(target);
  split.auxiliary = std::move(aux);
  auto [train, held] =
      split_holdout(split.target, holdout_fraction, derive_seed(seed, seed_salt::kHoldout));
  split.target_train = std::move(train);
  split.eval_holdout = std::move(held);
  split.available_target = sample_available(split.target_train, available_fraction,
                                            derive_seed(seed, seed_salt::kAvailable));
  return split;
}

}  // namespace recsteal
