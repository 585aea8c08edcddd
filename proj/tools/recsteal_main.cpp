// recsteal: train embedding recommenders, run extraction attacks against a
// query oracle, and evaluate clone fidelity.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "recsteal/attack.hpp"
#include "recsteal/experiment.hpp"
#include "recsteal/metrics.hpp"
#include "recsteal/model.hpp"
#include "recsteal/oracle.hpp"
#include "recsteal/trainer.hpp"

namespace {

using namespace recsteal;

InteractionDataset load_with_options(const std::string& path, const std::string& delimiter,
                                     int min_interactions) {
  std::optional<std::string> delim;
  if (!delimiter.empty()) delim = delimiter;
  InteractionDataset ds = load_interactions(path, delim);
  if (min_interactions > 1) ds = filter_min_interactions(ds, min_interactions);
  return ds;
}

int cmd_ingest(const std::string& path, const std::string& delimiter, int min_interactions) {
  InteractionDataset ds = load_with_options(path, delimiter, min_interactions);
  ds.check();
  const double cells = static_cast<double>(ds.num_users) * static_cast<double>(ds.num_items);
  std::size_t min_deg = SIZE_MAX, max_deg = 0;
  for (const auto& [u, items] : ds.interactions) {
    min_deg = std::min(min_deg, items.size());
    max_deg = std::max(max_deg, items.size());
  }
  nlohmann::json out{{"path", path},
                     {"num_users", ds.num_users},
                     {"num_items", ds.num_items},
                     {"interactions", ds.interaction_count()},
                     {"sparsity", 1.0 - static_cast<double>(ds.interaction_count()) / cells},
                     {"min_user_interactions", min_deg},
                     {"max_user_interactions", max_deg}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_train(const std::string& path, const std::string& delimiter, int min_interactions,
              const std::string& kind_str, const TrainConfig& cfg, const std::string& out_path,
              const std::string& summary_path) {
  auto kind = model_kind_from_string(kind_str);
  if (!kind) throw CLI::ValidationError("--kind", "unknown model kind: " + kind_str);
  InteractionDataset ds = load_with_options(path, delimiter, min_interactions);
  TrainSummary summary;
  EmbeddingModel model = train_model(*kind, ds, cfg, &summary);
  save_model(model, out_path, &ds.user_ids, &ds.item_ids);
  nlohmann::json js{{"kind", to_string(*kind)},
                    {"num_users", model.num_users()},
                    {"num_items", model.num_items()},
                    {"dim", model.dim()},
                    {"epochs_run", summary.epochs_run},
                    {"final_loss", summary.final_loss},
                    {"checkpoint", out_path}};
  if (!summary_path.empty()) {
    std::ofstream sf(summary_path);
    sf << js.dump(2) << '\n';
  }
  std::cout << js.dump(2) << '\n';
  return 0;
}

// Remaps a dataset loaded from disk into the id spaces of a checkpoint.
InteractionDataset remap_to(const InteractionDataset& ds, const IdMap& users, const IdMap& items,
                            const std::string& what) {
  InteractionDataset out;
  out.num_users = users.size();
  out.num_items = items.size();
  out.user_ids = users;
  out.item_ids = items;
  for (const auto& [u, its] : ds.interactions) {
    auto uit = users.to_index.find(ds.user_ids.raw(u));
    if (uit == users.to_index.end()) {
      throw std::runtime_error(what + ": user " + ds.user_ids.raw(u) + " not in checkpoint");
    }
    std::vector<int> mapped;
    for (int i : its) {
      auto iit = items.to_index.find(ds.item_ids.raw(i));
      if (iit == items.to_index.end()) {
        throw std::runtime_error(what + ": item " + ds.item_ids.raw(i) + " not in checkpoint");
      }
      mapped.push_back(iit->second);
    }
    std::sort(mapped.begin(), mapped.end());
    out.interactions[uit->second] = std::move(mapped);
  }
  return out;
}

struct AttackCliOptions {
  std::string target_path, train_path, available_path, aux_model_path, out_path, method = "ptd";
  std::string delimiter;
  std::string clone_kind = "bpr";
  std::string ranking_loss, positive_loss;
  int k = 50;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> budget;
  int epochs = 50;
  int finetune_epochs = 20;
  int dim = 64;
  double lr = 0.001;
  double margin = 0.5;
  int negatives = 4;
  int defense_mix = 0;
  int defense_pool = 100;
};

int cmd_attack(const AttackCliOptions& opt) {
  auto method = attack_method_from_string(opt.method);
  if (!method) throw CLI::ValidationError("--method", "unknown attack method: " + opt.method);
  auto clone_kind = model_kind_from_string(opt.clone_kind);
  if (!clone_kind) throw CLI::ValidationError("--clone-kind", "unknown kind: " + opt.clone_kind);

  LoadedModel target = load_model(opt.target_path);
  if (target.user_ids.size() == 0) {
    throw std::runtime_error("target checkpoint lacks id maps; retrain with `recsteal train`");
  }
  std::optional<std::string> delim;
  if (!opt.delimiter.empty()) delim = opt.delimiter;
  InteractionDataset train_data =
      remap_to(load_interactions(opt.train_path, delim), target.user_ids, target.item_ids,
               "train data");
  InteractionDataset available =
      remap_to(load_interactions(opt.available_path, delim), target.user_ids, target.item_ids,
               "available data");

  const bool wants_aux = *method == AttackMethod::PTA || *method == AttackMethod::PTAQ ||
                         *method == AttackMethod::PTA_PRE || *method == AttackMethod::PTAQ_PRE;
  Matrix q_aux;
  std::vector<std::uint8_t> eligible;
  if (wants_aux) {
    if (opt.aux_model_path.empty()) {
      throw CLI::ValidationError("--aux-model", "required for auxiliary-data attacks");
    }
    LoadedModel aux = load_model(opt.aux_model_path);
    // Align auxiliary item rows to the target item space; items unknown to
    // the auxiliary model stay fusion-ineligible.
    q_aux = Matrix(target.item_ids.size(), aux.model.dim());
    eligible.assign(static_cast<std::size_t>(target.item_ids.size()), 0);
    for (int j = 0; j < target.item_ids.size(); ++j) {
      auto it = aux.item_ids.to_index.find(target.item_ids.raw(j));
      if (it == aux.item_ids.to_index.end()) continue;
      const auto src = aux.model.Q.row(it->second);
      std::copy(src.begin(), src.end(), q_aux.row(j).begin());
      eligible[static_cast<std::size_t>(j)] = 1;
    }
  }

  TrainConfig cfg;
  cfg.learning_rate = opt.lr;
  cfg.embedding_dim = opt.dim;
  cfg.epochs = opt.epochs;
  cfg.rng_seed = opt.seed;
  cfg.margin = opt.margin;

  TrainConfig ft_cfg = cfg;
  ft_cfg.epochs = opt.finetune_epochs;

  StealingLossSpec steal = default_steal_spec(*method);
  steal.margin = opt.margin;
  steal.negatives_per_list_item = opt.negatives;
  if (!opt.ranking_loss.empty()) {
    auto kind = rank_loss_from_string(opt.ranking_loss);
    if (!kind) throw CLI::ValidationError("--ranking-loss", "unknown loss: " + opt.ranking_loss);
    steal.ranking_loss = *kind;
  }
  if (!opt.positive_loss.empty()) {
    auto kind = rank_loss_from_string(opt.positive_loss);
    if (!kind) throw CLI::ValidationError("--positive-loss", "unknown loss: " + opt.positive_loss);
    steal.positive_loss = *kind;
  }

  std::optional<DefenseConfig> defense;
  if (opt.defense_mix > 0) {
    defense = DefenseConfig{opt.defense_mix, opt.defense_pool, derive_seed(opt.seed, 99)};
  }
  QueryOracle oracle(target.model, train_data, opt.k, opt.budget, defense);
  const std::vector<int> users = available.users();

  std::optional<EmbeddingModel> plain;
  std::optional<FusedCloneModel> fused;
  switch (*method) {
    case AttackMethod::PTD:
      plain = train_ptd(available, cfg, *clone_kind);
      break;
    case AttackMethod::PTQ:
      plain = train_ptd(available, cfg, *clone_kind);
      finetune_with_queries(*plain, oracle, users, available, steal, ft_cfg);
      break;
    case AttackMethod::PTA:
      fused = train_pta(available, q_aux, eligible, cfg, *clone_kind);
      break;
    case AttackMethod::PTAQ:
      fused = train_pta(available, q_aux, eligible, cfg, *clone_kind);
      finetune_with_queries(*fused, oracle, users, available, steal, ft_cfg);
      break;
    case AttackMethod::PTA_PRE:
      plain = train_pta_pretrain(available, q_aux, cfg, *clone_kind);
      break;
    case AttackMethod::PTAQ_PRE:
      plain = train_pta_pretrain(available, q_aux, cfg, *clone_kind);
      finetune_with_queries(*plain, oracle, users, available, steal, ft_cfg);
      break;
    case AttackMethod::QSD:
      plain = train_qsd_adapted(oracle, users, available, steal, ft_cfg, *clone_kind);
      break;
  }

  double agr = 0.0;
  if (plain) {
    agr = mean_agreement(target.model, *plain, users, opt.k, train_data);
    if (!opt.out_path.empty()) save_model(*plain, opt.out_path, &target.user_ids, &target.item_ids);
  } else {
    agr = mean_agreement(target.model, *fused, users, opt.k, train_data);
    if (!opt.out_path.empty()) {
      // Fused clones are persisted as their trainable plain part.
      save_model(unwrap_plain(std::move(*fused)), opt.out_path, &target.user_ids,
                 &target.item_ids);
    }
  }
  nlohmann::json js{{"method", opt.method},
                    {"agreement", agr},
                    {"users", users.size()},
                    {"queries_spent", oracle.spent()},
                    {"k", opt.k}};
  if (!opt.out_path.empty()) js["checkpoint"] = opt.out_path;
  std::cout << js.dump(2) << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& json_path, bool timings, std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg = experiment_config_from_json_file(config_path);
  if (seed_override) cfg.seeds = {*seed_override};
  const std::vector<ResultRow> rows = run_experiment(cfg);
  const std::string csv = results_to_csv(rows, timings);
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write results: " + out_path);
    out << csv;
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write results: " + json_path);
    out << results_to_json(rows) << '\n';
  }
  int failures = 0;
  for (const ResultRow& r : rows) {
    if (!r.error.empty()) {
      std::cerr << "seed " << r.seed << " failed: " << r.error << '\n';
      ++failures;
    }
  }
  return failures ? 2 : 0;
}

int cmd_report(const std::vector<std::string>& paths) {
  std::vector<ResultRow> rows;
  for (const std::string& p : paths) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open results file: " + p);
    std::vector<ResultRow> part = results_from_csv(in);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  print_report(std::cout, aggregate_results(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recsteal: recommender model extraction attack workbench"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and summarize an interaction dataset");
  std::string in_path, delimiter;
  int min_interactions = 5;
  ingest->add_option("--input,-i", in_path, "interaction file (user,item[,rating,timestamp])")
      ->required();
  ingest->add_option("--delimiter", delimiter, "field delimiter (default: inferred)");
  ingest->add_option("--min-interactions", min_interactions,
                     "degree filter applied before summarizing");

  // train
  auto* train = app.add_subcommand("train", "fit a recommender and write a checkpoint");
  std::string kind = "bpr", out_path = "model.json", summary_path;
  TrainConfig tcfg;
  tcfg.log_progress = true;
  train->add_option("--input,-i", in_path, "interaction file")->required();
  train->add_option("--delimiter", delimiter, "field delimiter (default: inferred)");
  train->add_option("--min-interactions", min_interactions, "degree filter");
  train->add_option("--kind", kind, "model kind: bpr|lmf|gmf");
  train->add_option("--out,-o", out_path, "checkpoint path");
  train->add_option("--summary", summary_path, "write a JSON training summary here");
  train->add_option("--epochs", tcfg.epochs, "training epochs");
  train->add_option("--dim", tcfg.embedding_dim, "embedding dimension");
  train->add_option("--lr", tcfg.learning_rate, "Adam learning rate");
  train->add_option("--batch", tcfg.batch_size, "mini-batch size");
  train->add_option("--negatives", tcfg.negatives_per_positive, "negatives per positive");
  train->add_option("--l2", tcfg.l2_reg, "L2 regularization");
  train->add_option("--seed", tcfg.rng_seed, "RNG seed");

  // attack
  auto* attack = app.add_subcommand("attack", "run one extraction attack against a checkpoint");
  AttackCliOptions aopt;
  attack->add_option("--target", aopt.target_path, "target model checkpoint")->required();
  attack->add_option("--train-data", aopt.train_path, "the target's training interactions")
      ->required();
  attack->add_option("--available", aopt.available_path, "attacker-visible interactions")
      ->required();
  attack->add_option("--aux-model", aopt.aux_model_path,
                     "auxiliary model checkpoint (pta/ptaq/pta_pre/ptaq_pre)");
  attack->add_option("--method", aopt.method, "ptd|pta|ptq|ptaq|qsd|pta_pre|ptaq_pre");
  attack->add_option("--clone-kind", aopt.clone_kind, "clone model kind");
  attack->add_option("--k", aopt.k, "recommendation list length");
  std::uint64_t budget_flag = 0;
  auto* budget_opt = attack->add_option("--budget", budget_flag, "query budget (default unlimited)");
  attack->add_option("--seed", aopt.seed, "RNG seed");
  attack->add_option("--epochs", aopt.epochs, "interaction-phase epochs");
  attack->add_option("--finetune-epochs", aopt.finetune_epochs, "query-phase epochs");
  attack->add_option("--dim", aopt.dim, "embedding dimension");
  attack->add_option("--lr", aopt.lr, "Adam learning rate");
  attack->add_option("--margin", aopt.margin, "hinge margin");
  attack->add_option("--negatives", aopt.negatives, "negatives per listed item");
  attack->add_option("--ranking-loss", aopt.ranking_loss, "stealing ranking loss: bpr|hinge");
  attack->add_option("--positive-loss", aopt.positive_loss, "stealing positive loss: bpr|hinge");
  attack->add_option("--defense-mix", aopt.defense_mix, "oracle defense: items mixed per list");
  attack->add_option("--defense-pool", aopt.defense_pool, "oracle defense: popularity pool size");
  attack->add_option("--delimiter", aopt.delimiter, "field delimiter for data files");
  attack->add_option("--out,-o", aopt.out_path, "clone checkpoint path");

  // run
  auto* run = app.add_subcommand("run", "run a config-driven experiment, CSV out");
  std::string config_path, results_path = "-", json_path;
  bool timings = false;
  std::uint64_t run_seed = 0;
  run->add_option("--config,-c", config_path, "experiment config (JSON)")->required();
  run->add_option("--out,-o", results_path, "results CSV path ('-' = stdout)");
  run->add_option("--json", json_path, "also write results as JSON");
  run->add_flag("--timings", timings, "append a wall_seconds column (non-reproducible)");
  auto* seed_opt = run->add_option("--seed", run_seed, "run a single seed instead of the config list");

  // report
  auto* report = app.add_subcommand("report", "aggregate result CSVs into mean±std tables");
  std::vector<std::string> report_paths;
  report->add_option("files", report_paths, "result CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1, --help exits 0
  }

  try {
    if (*ingest) return cmd_ingest(in_path, delimiter, min_interactions);
    if (*train) return cmd_train(in_path, delimiter, min_interactions, kind, tcfg, out_path,
                                 summary_path);
    if (*attack) {
      if (budget_opt->count() > 0) aopt.budget = budget_flag;
      return cmd_attack(aopt);
    }
    if (*run) {
      std::optional<std::uint64_t> seed_override;
      if (seed_opt->count() > 0) seed_override = run_seed;
      return cmd_run(config_path, results_path, json_path, timings, seed_override);
    }
    if (*report) return cmd_report(report_paths);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
