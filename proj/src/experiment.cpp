#include "recsteal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

#include <json.hpp>

#include "recsteal/metrics.hpp"

namespace recsteal {

const char* to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::PTD: return "ptd";
    case AttackMethod::PTA: return "pta";
    case AttackMethod::PTQ: return "ptq";
    case AttackMethod::PTAQ: return "ptaq";
    case AttackMethod::QSD: return "qsd";
    case AttackMethod::PTA_PRE: return "pta_pre";
    case AttackMethod::PTAQ_PRE: return "ptaq_pre";
  }
  return "?";
}

std::optional<AttackMethod> attack_method_from_string(std::string_view s) {
  if (s == "ptd") return AttackMethod::PTD;
  if (s == "pta") return AttackMethod::PTA;
  if (s == "ptq") return AttackMethod::PTQ;
  if (s == "ptaq") return AttackMethod::PTAQ;
  if (s == "qsd") return AttackMethod::QSD;
  if (s == "pta_pre") return AttackMethod::PTA_PRE;
  if (s == "ptaq_pre") return AttackMethod::PTAQ_PRE;
  return {};
}

StealingLossSpec default_steal_spec(AttackMethod method) {
  StealingLossSpec spec;
  if (method == AttackMethod::QSD) {
    spec.ranking_loss = RankLossKind::Hinge;
    spec.positive_loss = RankLossKind::Hinge;
  }
  return spec;
}

namespace {

using CloneModel = std::variant<EmbeddingModel, FusedCloneModel>;

struct SweepPoint {
  int k;
  double available_fraction;
  double aux_fraction;
  double overlap_ratio;
  double query_fraction;
  int defense_mix;
};

template <class T>
std::vector<T> axis_or(const std::vector<T>& axis, T base) {
  return axis.empty() ? std::vector<T>{base} : axis;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  const int base_mix = cfg.defense ? cfg.defense->mix_count : 0;
  std::vector<SweepPoint> out;
  for (int k : axis_or(cfg.sweep.k, cfg.k)) {
    for (double f : axis_or(cfg.sweep.available_fraction, cfg.available_fraction)) {
      for (double a : axis_or(cfg.sweep.aux_fraction, cfg.aux_fraction)) {
        for (double o : axis_or(cfg.sweep.overlap_ratio, cfg.overlap_ratio)) {
          for (double q : axis_or(cfg.sweep.query_fraction, cfg.query_fraction)) {
            for (int d : axis_or(cfg.sweep.defense_mix, base_mix)) {
              out.push_back({k, f, a, o, q, d});
            }
          }
        }
      }
    }
  }
  return out;
}

int resolve_negatives(int configured, ModelKind kind) {
  if (configured >= 0) return configured;
  return kind == ModelKind::BPR ? 1 : 4;  // pointwise training default
}

std::string cache_key(std::initializer_list<double> vals) {
  std::string key;
  char buf[40];
  for (double v : vals) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    key.append(buf, p);
    key.push_back('|');
  }
  return key;
}

// All per-seed work: data preparation, target/auxiliary training, attacks and
// metrics. Phase-one artifacts are memoized across sweep points and methods;
// everything is a pure function of (config, seed), so memoization cannot
// change results.
class SeedRunner {
 public:
  SeedRunner(const ExperimentConfig& cfg, const InteractionDataset& ds, std::uint64_t seed)
      : cfg_(cfg), ds_(ds), seed_(seed) {
    auto [target, aux] = split_target_auxiliary(ds_, derive_seed(seed_, seed_salt::kSplit));
    target_full_ = std::move(target);
    auxiliary_full_ = std::move(aux);
    auto [train, held] = split_holdout(target_full_, cfg_.holdout_fraction,
                                       derive_seed(seed_, seed_salt::kHoldout));
    target_train_ = std::move(train);
    eval_holdout_ = std::move(held);

    TrainConfig tcfg = cfg_.target_train;
    tcfg.rng_seed = derive_seed(seed_, seed_salt::kTargetTrain) ^ cfg_.target_train.rng_seed;
    tcfg.negatives_per_positive =
        resolve_negatives(tcfg.negatives_per_positive, cfg_.target_kind);
    target_ = train_model(cfg_.target_kind, target_train_, tcfg);
    popular_ = popularity_ranking(target_train_);
  }

  std::vector<ResultRow> run() {
    std::vector<ResultRow> rows;
    for (const SweepPoint& pt : sweep_points(cfg_)) {
      for (const AttackDescriptor& atk : cfg_.attacks) {
        rows.push_back(run_one(pt, atk));
      }
    }
    return rows;
  }

 private:
  const InteractionDataset& available_for(double fraction) {
    auto it = available_cache_.find(fraction);
    if (it == available_cache_.end()) {
      it = available_cache_
               .emplace(fraction, sample_available(target_train_, fraction,
                                                   derive_seed(seed_, seed_salt::kAvailable)))
               .first;
    }
    return it->second;
  }

  const EmbeddingModel& aux_model_for(double aux_fraction, ModelKind kind) {
    const std::string key = cache_key({aux_fraction, static_cast<double>(kind)});
    auto it = aux_model_cache_.find(key);
    if (it == aux_model_cache_.end()) {
      const InteractionDataset aux_ds =
          aux_fraction >= 1.0
              ? auxiliary_full_
              : sample_available(auxiliary_full_, aux_fraction,
                                 derive_seed(seed_, seed_salt::kAuxSample));
      TrainConfig acfg = cfg_.aux_train;
      acfg.rng_seed = derive_seed(seed_, seed_salt::kAuxTrain) ^ cfg_.aux_train.rng_seed;
      acfg.negatives_per_positive = resolve_negatives(acfg.negatives_per_positive, kind);
      it = aux_model_cache_.emplace(key, train_model(kind, aux_ds, acfg)).first;
    }
    return it->second;
  }

  std::vector<std::uint8_t> eligibility_mask(double overlap_ratio) {
    if (overlap_ratio >= 1.0) {
      return std::vector<std::uint8_t>(static_cast<std::size_t>(ds_.num_items), 1);
    }
    return restrict_item_overlap(auxiliary_full_, overlap_ratio,
                                 target_train_.present_items(),
                                 derive_seed(seed_, seed_salt::kOverlap));
  }

  TrainConfig clone_config(const AttackDescriptor& atk) const {
    TrainConfig ccfg = cfg_.clone_train;
    ccfg.rng_seed = derive_seed(seed_, seed_salt::kCloneTrain) ^ cfg_.clone_train.rng_seed;
    ccfg.negatives_per_positive =
        resolve_negatives(ccfg.negatives_per_positive, atk.clone_kind);
    if (atk.epochs) ccfg.epochs = *atk.epochs;
    return ccfg;
  }

  const EmbeddingModel& ptd_clone(const SweepPoint& pt, const AttackDescriptor& atk) {
    const TrainConfig ccfg = clone_config(atk);
    const std::string key = cache_key({pt.available_fraction, static_cast<double>(atk.clone_kind),
                                       static_cast<double>(ccfg.epochs)});
    auto it = ptd_cache_.find(key);
    if (it == ptd_cache_.end()) {
      it = ptd_cache_.emplace(key, train_ptd(available_for(pt.available_fraction), ccfg,
                                             atk.clone_kind))
               .first;
    }
    return it->second;
  }

  const FusedCloneModel& pta_clone(const SweepPoint& pt, const AttackDescriptor& atk) {
    const TrainConfig ccfg = clone_config(atk);
    const std::string key =
        cache_key({pt.available_fraction, pt.aux_fraction, pt.overlap_ratio,
                   static_cast<double>(atk.clone_kind), static_cast<double>(ccfg.epochs)});
    auto it = pta_cache_.find(key);
    if (it == pta_cache_.end()) {
      const EmbeddingModel& aux = aux_model_for(pt.aux_fraction, atk.clone_kind);
      it = pta_cache_
               .emplace(key, train_pta(available_for(pt.available_fraction), aux.Q,
                                       eligibility_mask(pt.overlap_ratio), ccfg, atk.clone_kind))
               .first;
    }
    return it->second;
  }

  const EmbeddingModel& pta_pre_clone(const SweepPoint& pt, const AttackDescriptor& atk) {
    const TrainConfig ccfg = clone_config(atk);
    const std::string key = cache_key({pt.available_fraction, pt.aux_fraction,
                                       static_cast<double>(atk.clone_kind),
                                       static_cast<double>(ccfg.epochs)});
    auto it = pta_pre_cache_.find(key);
    if (it == pta_pre_cache_.end()) {
      const EmbeddingModel& aux = aux_model_for(pt.aux_fraction, atk.clone_kind);
      it = pta_pre_cache_
               .emplace(key, train_pta_pretrain(available_for(pt.available_fraction), aux.Q,
                                                ccfg, atk.clone_kind))
               .first;
    }
    return it->second;
  }

  std::vector<int> query_users(const std::vector<int>& eval_users, double query_fraction) {
    if (query_fraction >= 1.0) return eval_users;
    std::vector<int> users = eval_users;
    Rng rng(derive_seed(seed_, seed_salt::kQueryUsers));
    rng.shuffle(users);
    const std::size_t want = static_cast<std::size_t>(
        std::ceil(query_fraction * static_cast<double>(users.size())));
    users.resize(std::min(want, users.size()));
    std::sort(users.begin(), users.end());
    return users;
  }

  double recall_raw(int k) {
    auto it = recall_raw_cache_.find(k);
    if (it == recall_raw_cache_.end()) {
      it = recall_raw_cache_.emplace(k, recall_at_k(target_, target_train_, eval_holdout_, k))
               .first;
    }
    return it->second;
  }

  double recall_defended(int k, int mix) {
    if (mix <= 0) return recall_raw(k);
    const std::string key = cache_key({static_cast<double>(k), static_cast<double>(mix)});
    auto it = recall_def_cache_.find(key);
    if (it == recall_def_cache_.end()) {
      DefenseConfig dcfg;
      dcfg.mix_count = mix;
      dcfg.pool_size = cfg_.defense ? cfg_.defense->pool_size : 100;
      Rng rng(derive_seed(seed_, seed_salt::kDefenseEval));
      it = recall_def_cache_
               .emplace(key, recall_at_k_defended(target_, target_train_, eval_holdout_, k, dcfg,
                                                  popular_, rng))
               .first;
    }
    return it->second;
  }

  ResultRow run_one(const SweepPoint& pt, const AttackDescriptor& atk) {
    const auto t0 = std::chrono::steady_clock::now();
    ResultRow row;
    row.experiment_id = cfg_.name;
    row.seed = seed_;
    row.method = to_string(atk.method);
    row.target_kind = to_string(cfg_.target_kind);
    row.clone_kind = to_string(atk.clone_kind);
    row.k = pt.k;
    row.available_fraction = pt.available_fraction;
    row.aux_fraction = pt.aux_fraction;
    row.overlap_ratio = pt.overlap_ratio;
    row.defense_mix = pt.defense_mix;
    row.query_fraction = pt.query_fraction;

    const InteractionDataset& available = available_for(pt.available_fraction);
    const std::vector<int> eval_users = available.users();

    const bool queries = atk.method == AttackMethod::PTQ || atk.method == AttackMethod::PTAQ ||
                         atk.method == AttackMethod::QSD || atk.method == AttackMethod::PTAQ_PRE;
    std::optional<QueryOracle> oracle;
    if (queries) {
      std::optional<DefenseConfig> defense;
      if (pt.defense_mix > 0) {
        defense = DefenseConfig{pt.defense_mix, cfg_.defense ? cfg_.defense->pool_size : 100,
                                derive_seed(seed_, seed_salt::kDefense)};
      }
      oracle.emplace(target_, target_train_, pt.k, cfg_.query_budget, defense);
    }

    TrainConfig ft_cfg = clone_config(atk);
    ft_cfg.epochs = atk.finetune_epochs.value_or(cfg_.finetune_epochs);
    if (cfg_.finetune_lr) ft_cfg.learning_rate = *cfg_.finetune_lr;

    CloneModel clone;
    switch (atk.method) {
      case AttackMethod::PTD:
        clone = ptd_clone(pt, atk);
        break;
      case AttackMethod::PTA:
        clone = pta_clone(pt, atk);
        break;
      case AttackMethod::PTA_PRE:
        clone = pta_pre_clone(pt, atk);
        break;
      case AttackMethod::PTQ: {
        EmbeddingModel c = ptd_clone(pt, atk);
        finetune_with_queries(c, *oracle, query_users(eval_users, pt.query_fraction), available,
                              atk.steal, ft_cfg);
        clone = std::move(c);
        break;
      }
      case AttackMethod::PTAQ: {
        FusedCloneModel c = pta_clone(pt, atk);
        finetune_with_queries(c, *oracle, query_users(eval_users, pt.query_fraction), available,
                              atk.steal, ft_cfg);
        clone = std::move(c);
        break;
      }
      case AttackMethod::PTAQ_PRE: {
        EmbeddingModel c = pta_pre_clone(pt, atk);
        finetune_with_queries(c, *oracle, query_users(eval_users, pt.query_fraction), available,
                              atk.steal, ft_cfg);
        clone = std::move(c);
        break;
      }
      case AttackMethod::QSD: {
        clone = train_qsd_adapted(*oracle, query_users(eval_users, pt.query_fraction), available,
                                  atk.steal, ft_cfg, atk.clone_kind);
        break;
      }
    }

    row.agreement = std::visit(
        [&](const auto& c) {
          return mean_agreement(target_, c, eval_users, pt.k, target_train_);
        },
        clone);
    row.recall_raw = recall_raw(pt.k);
    row.recall_defended = recall_defended(pt.k, pt.defense_mix);
    row.queries_spent = oracle ? oracle->spent() : 0;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
  }

  const ExperimentConfig& cfg_;
  const InteractionDataset& ds_;
  std::uint64_t seed_;
  InteractionDataset target_full_, auxiliary_full_, target_train_, eval_holdout_;
  EmbeddingModel target_;
  std::vector<int> popular_;
  std::map<double, InteractionDataset> available_cache_;
  std::map<std::string, EmbeddingModel> aux_model_cache_;
  std::map<std::string, EmbeddingModel> ptd_cache_;
  std::map<std::string, FusedCloneModel> pta_cache_;
  std::map<std::string, EmbeddingModel> pta_pre_cache_;
  std::map<int, double> recall_raw_cache_;
  std::map<std::string, double> recall_def_cache_;
};

int effective_threads(const ExperimentConfig& cfg) {
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RECSTEAL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads, cap);
  }
  threads = std::min<int>(threads, static_cast<int>(cfg.seeds.size()));
  return std::max(1, threads);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.attacks.empty()) throw std::invalid_argument("run_experiment: no attacks configured");
  if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: no seeds configured");

  InteractionDataset ds = cfg.dataset_path.empty()
                              ? generate_synthetic(cfg.synthetic)
                              : load_interactions(cfg.dataset_path, cfg.delimiter);
  if (cfg.min_interactions > 1) ds = filter_min_interactions(ds, cfg.min_interactions);

  std::vector<std::vector<ResultRow>> per_seed(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.seeds.size()) return;
      try {
        per_seed[i] = SeedRunner(cfg, ds, cfg.seeds[i]).run();
      } catch (const std::exception& e) {
        ResultRow diag;
        diag.experiment_id = cfg.name;
        diag.seed = cfg.seeds[i];
        diag.method = "(seed-failed)";
        diag.error = e.what();
        per_seed[i] = {diag};
      }
    }
  };

  const int threads = effective_threads(cfg);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRow> rows;
  for (auto& part : per_seed) {
    for (auto& r : part) rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc()) throw std::runtime_error("bad numeric field: " + s);
  return v;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRow>& rows, bool timings) {
  std::ostringstream out;
  out << "experiment_id,seed,method,target_kind,clone_kind,k,available_fraction,aux_fraction,"
         "overlap_ratio,defense_mix,query_fraction,agreement,recall_raw,recall_defended,"
         "queries_spent,error";
  if (timings) out << ",wall_seconds";
  out << '\n';
  for (const ResultRow& r : rows) {
    out << sanitize(r.experiment_id) << ',' << r.seed << ',' << r.method << ',' << r.target_kind
        << ',' << r.clone_kind << ',' << r.k << ',' << fmt_double(r.available_fraction) << ','
        << fmt_double(r.aux_fraction) << ',' << fmt_double(r.overlap_ratio) << ',' << r.defense_mix
        << ',' << fmt_double(r.query_fraction) << ',' << fmt_double(r.agreement) << ','
        << fmt_double(r.recall_raw) << ',' << fmt_double(r.recall_defended) << ','
        << r.queries_spent << ',' << sanitize(r.error);
    if (timings) out << ',' << fmt_double(r.wall_seconds);
    out << '\n';
  }
  return out.str();
}

std::vector<ResultRow> results_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string field;
    while (std::getline(hs, field, ',')) header.push_back(field);
  }
  auto col = [&header](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("results csv: missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = col("experiment_id"), c_seed = col("seed"), c_method = col("method"),
                    c_tk = col("target_kind"), c_ck = col("clone_kind"), c_k = col("k"),
                    c_f = col("available_fraction"), c_a = col("aux_fraction"),
                    c_o = col("overlap_ratio"), c_d = col("defense_mix"),
                    c_q = col("query_fraction"), c_agr = col("agreement"),
                    c_rr = col("recall_raw"), c_rd = col("recall_defended"),
                    c_qs = col("queries_spent"), c_err = col("error");

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) f.push_back(field);
    f.resize(header.size());
    ResultRow r;
    r.experiment_id = f[c_id];
    r.seed = static_cast<std::uint64_t>(std::stoull(f[c_seed]));
    r.method = f[c_method];
    r.target_kind = f[c_tk];
    r.clone_kind = f[c_ck];
    r.k = std::stoi(f[c_k]);
    r.available_fraction = parse_double(f[c_f]);
    r.aux_fraction = parse_double(f[c_a]);
    r.overlap_ratio = parse_double(f[c_o]);
    r.defense_mix = std::stoi(f[c_d]);
    r.query_fraction = parse_double(f[c_q]);
    r.agreement = parse_double(f[c_agr]);
    r.recall_raw = parse_double(f[c_rr]);
    r.recall_defended = parse_double(f[c_rd]);
    r.queries_spent = static_cast<std::uint64_t>(std::stoull(f[c_qs]));
    r.error = f[c_err];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string results_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    arr.push_back(nlohmann::json{{"experiment_id", r.experiment_id},
                                 {"seed", r.seed},
                                 {"method", r.method},
                                 {"target_kind", r.target_kind},
                                 {"clone_kind", r.clone_kind},
                                 {"k", r.k},
                                 {"available_fraction", r.available_fraction},
                                 {"aux_fraction", r.aux_fraction},
                                 {"overlap_ratio", r.overlap_ratio},
                                 {"defense_mix", r.defense_mix},
                                 {"query_fraction", r.query_fraction},
                                 {"agreement", r.agreement},
                                 {"recall_raw", r.recall_raw},
                                 {"recall_defended", r.recall_defended},
                                 {"queries_spent", r.queries_spent},
                                 {"wall_seconds", r.wall_seconds},
                                 {"error", r.error}});
  }
  return arr.dump(2);
}

std::vector<ReportRow> aggregate_results(const std::vector<ResultRow>& rows) {
  struct Acc {
    ReportRow key;
    std::vector<double> agr;
    double rr_sum = 0.0, rd_sum = 0.0;
  };
  std::map<std::string, Acc> groups;
  for (const ResultRow& r : rows) {
    if (!r.error.empty()) continue;
    std::ostringstream key;
    key << r.method << '|' << r.k << '|' << fmt_double(r.available_fraction) << '|'
        << fmt_double(r.aux_fraction) << '|' << fmt_double(r.overlap_ratio) << '|' << r.defense_mix
        << '|' << fmt_double(r.query_fraction);
    Acc& acc = groups[key.str()];
    if (acc.agr.empty()) {
      acc.key.method = r.method;
      acc.key.k = r.k;
      acc.key.available_fraction = r.available_fraction;
      acc.key.aux_fraction = r.aux_fraction;
      acc.key.overlap_ratio = r.overlap_ratio;
      acc.key.defense_mix = r.defense_mix;
      acc.key.query_fraction = r.query_fraction;
    }
    acc.agr.push_back(r.agreement);
    acc.rr_sum += r.recall_raw;
    acc.rd_sum += r.recall_defended;
  }
  std::vector<ReportRow> out;
  for (auto& [key, acc] : groups) {
    ReportRow row = acc.key;
    const int n = static_cast<int>(acc.agr.size());
    row.runs = n;
    double mean = 0.0;
    for (double a : acc.agr) mean += a;
    mean /= n;
    double var = 0.0;
    if (n > 1) {
      for (double a : acc.agr) var += (a - mean) * (a - mean);
      var /= (n - 1);
    }
    row.agreement_mean = mean;
    row.agreement_std = std::sqrt(var);
    row.recall_raw_mean = acc.rr_sum / n;
    row.recall_defended_mean = acc.rd_sum / n;
    out.push_back(row);
  }
  return out;
}

void print_report(std::ostream& out, const std::vector<ReportRow>& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %5s %7s %6s %8s %5s %6s %4s %18s %11s %11s\n", "method",
                "k", "frac", "aux", "overlap", "mix", "qfrac", "n", "agreement", "recall", "recall_def");
  out << buf;
  for (const ReportRow& r : report) {
    std::snprintf(buf, sizeof(buf),
                  "%-10s %5d %7.3f %6.2f %8.2f %5d %6.2f %4d %9.4f±%-8.4f %11.4f %11.4f\n",
                  r.method.c_str(), r.k, r.available_fraction, r.aux_fraction, r.overlap_ratio,
                  r.defense_mix, r.query_fraction, r.runs, r.agreement_mean, r.agreement_std,
                  r.recall_raw_mean, r.recall_defended_mean);
    out << buf;
  }
}

namespace {

TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& base) {
  TrainConfig cfg = base;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.embedding_dim = j.value("embedding_dim", cfg.embedding_dim);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.negatives_per_positive = j.value("negatives_per_positive", -1);  // -1 = per-kind default
  cfg.margin = j.value("margin", cfg.margin);
  cfg.l2_reg = j.value("l2_reg", cfg.l2_reg);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  cfg.early_stop_tol = j.value("early_stop_tol", cfg.early_stop_tol);
  cfg.freeze_attention = j.value("freeze_attention", cfg.freeze_attention);
  return cfg;
}

ModelKind parse_kind(const nlohmann::json& j, const std::string& key, ModelKind fallback) {
  if (!j.contains(key)) return fallback;
  auto kind = model_kind_from_string(j.at(key).get<std::string>());
  if (!kind) throw std::runtime_error("unknown model kind: " + j.at(key).get<std::string>());
  return *kind;
}

}  // namespace

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.name = j.value("name", cfg.name);
  if (j.contains("dataset") && !j.at("dataset").is_null()) {
    const auto& d = j.at("dataset");
    if (d.is_string()) {
      const std::string s = d.get<std::string>();
      if (s != "synthetic") cfg.dataset_path = s;
    } else {
      cfg.dataset_path = d.value("path", "");
      if (d.contains("delimiter")) cfg.delimiter = d.at("delimiter").get<std::string>();
    }
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    cfg.synthetic.num_users = s.value("num_users", cfg.synthetic.num_users);
    cfg.synthetic.num_items = s.value("num_items", cfg.synthetic.num_items);
    cfg.synthetic.clusters = s.value("clusters", cfg.synthetic.clusters);
    cfg.synthetic.latent_dim = s.value("latent_dim", cfg.synthetic.latent_dim);
    cfg.synthetic.min_user_interactions =
        s.value("min_user_interactions", cfg.synthetic.min_user_interactions);
    cfg.synthetic.max_user_interactions =
        s.value("max_user_interactions", cfg.synthetic.max_user_interactions);
    cfg.synthetic.factor_noise = s.value("factor_noise", cfg.synthetic.factor_noise);
    cfg.synthetic.score_noise = s.value("score_noise", cfg.synthetic.score_noise);
    cfg.synthetic.popularity_weight =
        s.value("popularity_weight", cfg.synthetic.popularity_weight);
    cfg.synthetic.seed = s.value("seed", cfg.synthetic.seed);
  }
  cfg.min_interactions = j.value("min_interactions", cfg.min_interactions);
  cfg.available_fraction = j.value("available_fraction", cfg.available_fraction);
  cfg.holdout_fraction = j.value("holdout_fraction", cfg.holdout_fraction);
  cfg.aux_fraction = j.value("aux_fraction", cfg.aux_fraction);
  cfg.overlap_ratio = j.value("overlap_ratio", cfg.overlap_ratio);
  cfg.query_fraction = j.value("query_fraction", cfg.query_fraction);
  cfg.target_kind = parse_kind(j, "target_kind", cfg.target_kind);
  cfg.k = j.value("k", cfg.k);
  if (j.contains("query_budget") && !j.at("query_budget").is_null()) {
    cfg.query_budget = j.at("query_budget").get<std::uint64_t>();
  }
  if (j.contains("defense") && !j.at("defense").is_null()) {
    DefenseConfig d;
    d.mix_count = j.at("defense").value("mix_count", 0);
    d.pool_size = j.at("defense").value("pool_size", 100);
    d.rng_seed = j.at("defense").value("rng_seed", 0);
    cfg.defense = d;
  }
  if (j.contains("attacks")) {
    for (const auto& a : j.at("attacks")) {
      const std::string method_str =
          a.is_string() ? a.get<std::string>() : a.at("method").get<std::string>();
      auto method = attack_method_from_string(method_str);
      if (!method) throw std::runtime_error("unknown attack method: " + method_str);
      AttackDescriptor atk(*method);
      if (a.is_object()) {
        atk.clone_kind = parse_kind(a, "clone_kind", atk.clone_kind);
        if (a.contains("stealing_loss")) {
          const auto& sl = a.at("stealing_loss");
          if (sl.contains("ranking")) {
            auto kind = rank_loss_from_string(sl.at("ranking").get<std::string>());
            if (!kind) throw std::runtime_error("unknown ranking loss");
            atk.steal.ranking_loss = *kind;
          }
          if (sl.contains("positive")) {
            auto kind = rank_loss_from_string(sl.at("positive").get<std::string>());
            if (!kind) throw std::runtime_error("unknown positive loss");
            atk.steal.positive_loss = *kind;
          }
        }
        atk.steal.margin = a.value("margin", atk.steal.margin);
        atk.steal.negatives_per_list_item =
            a.value("negatives_per_list_item", atk.steal.negatives_per_list_item);
        if (a.contains("epochs")) atk.epochs = a.at("epochs").get<int>();
        if (a.contains("finetune_epochs")) atk.finetune_epochs = a.at("finetune_epochs").get<int>();
      }
      cfg.attacks.push_back(atk);
    }
  }
  if (j.contains("target_train")) cfg.target_train = train_config_from_json(j.at("target_train"), cfg.target_train);
  if (j.contains("aux_train")) cfg.aux_train = train_config_from_json(j.at("aux_train"), cfg.aux_train);
  if (j.contains("clone_train")) cfg.clone_train = train_config_from_json(j.at("clone_train"), cfg.clone_train);
  cfg.finetune_epochs = j.value("finetune_epochs", cfg.finetune_epochs);
  if (j.contains("finetune_lr") && !j.at("finetune_lr").is_null()) {
    cfg.finetune_lr = j.at("finetune_lr").get<double>();
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.contains("k")) cfg.sweep.k = s.at("k").get<std::vector<int>>();
    if (s.contains("available_fraction")) {
      cfg.sweep.available_fraction = s.at("available_fraction").get<std::vector<double>>();
    }
    if (s.contains("aux_fraction")) {
      cfg.sweep.aux_fraction = s.at("aux_fraction").get<std::vector<double>>();
    }
    if (s.contains("overlap_ratio")) {
      cfg.sweep.overlap_ratio = s.at("overlap_ratio").get<std::vector<double>>();
    }
    if (s.contains("query_fraction")) {
      cfg.sweep.query_fraction = s.at("query_fraction").get<std::vector<double>>();
    }
    if (s.contains("defense_mix")) cfg.sweep.defense_mix = s.at("defense_mix").get<std::vector<int>>();
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.threads = j.value("threads", cfg.threads);
  return cfg;
}

ExperimentConfig experiment_config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json_text(buf.str());
}

}  // namespace recsteal
