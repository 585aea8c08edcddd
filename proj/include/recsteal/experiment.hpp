#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "recsteal/attack.hpp"
#include "recsteal/oracle.hpp"
#include "recsteal/synthetic.hpp"
#include "recsteal/trainer.hpp"

namespace recsteal {

enum class AttackMethod { PTD, PTA, PTQ, PTAQ, QSD, PTA_PRE, PTAQ_PRE };

const char* to_string(AttackMethod m);
std::optional<AttackMethod> attack_method_from_string(std::string_view s);

// The method's conventional stealing losses: Hinge+Hinge for the
// query-feedback-only baseline, BPR ranking + hinge positive otherwise.
StealingLossSpec default_steal_spec(AttackMethod method);

struct AttackDescriptor {
  AttackDescriptor() = default;
  explicit AttackDescriptor(AttackMethod m, ModelKind kind = ModelKind::BPR)
      : method(m), clone_kind(kind), steal(default_steal_spec(m)) {}

  AttackMethod method = AttackMethod::PTD;
  ModelKind clone_kind = ModelKind::BPR;
  StealingLossSpec steal;                // defaults resolved per method
  std::optional<int> epochs;             // interaction-phase override
  std::optional<int> finetune_epochs;    // query-phase override
};

struct SweepAxes {
  std::vector<int> k;
  std::vector<double> available_fraction;
  std::vector<double> aux_fraction;
  std::vector<double> overlap_ratio;
  std::vector<double> query_fraction;
  std::vector<int> defense_mix;
};

struct ExperimentConfig {
  std::string name = "exp";
  // Empty path -> the bundled synthetic generator.
  std::string dataset_path;
  std::optional<std::string> delimiter;
  SyntheticConfig synthetic;
  int min_interactions = 5;
  double available_fraction = 0.1;
  double holdout_fraction = 0.2;
  double aux_fraction = 1.0;
  double overlap_ratio = 1.0;
  double query_fraction = 1.0;
  ModelKind target_kind = ModelKind::BPR;
  int k = 50;
  std::optional<std::uint64_t> query_budget;  // absolute cap; unset = unlimited
  std::optional<DefenseConfig> defense;
  std::vector<AttackDescriptor> attacks;
  TrainConfig target_train;
  TrainConfig aux_train;
  TrainConfig clone_train;
  int finetune_epochs = 20;
  std::optional<double> finetune_lr;  // defaults to the clone learning rate
  SweepAxes sweep;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int threads = 0;  // 0 = auto; RECSTEAL_THREADS caps either way
};

struct ResultRow {
  std::string experiment_id;
  std::uint64_t seed = 0;
  std::string method;
  std::string target_kind;
  std::string clone_kind;
  int k = 0;
  double available_fraction = 0.0;
  double aux_fraction = 1.0;
  double overlap_ratio = 1.0;
  int defense_mix = 0;
  double query_fraction = 1.0;
  double agreement = 0.0;
  double recall_raw = 0.0;
  double recall_defended = 0.0;
  std::uint64_t queries_spent = 0;
  // Not part of the CSV body by default: timings would break byte-identical
  // reruns of the same config.
  double wall_seconds = 0.0;
  std::string error;  // non-empty for a failed stage; metric fields unset
};

// Per seed: split, train target and auxiliary models, run every attack at
// every sweep point, measure agreement and recall. Deterministic per
// (config, seed); seeds may run in parallel, rows come back in seed order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string results_to_csv(const std::vector<ResultRow>& rows, bool timings = false);
std::vector<ResultRow> results_from_csv(std::istream& in);
std::string results_to_json(const std::vector<ResultRow>& rows);

struct ReportRow {
  std::string method;
  int k = 0;
  double available_fraction = 0.0;
  double aux_fraction = 1.0;
  double overlap_ratio = 1.0;
  int defense_mix = 0;
  double query_fraction = 1.0;
  int runs = 0;
  double agreement_mean = 0.0;
  double agreement_std = 0.0;
  double recall_raw_mean = 0.0;
  double recall_defended_mean = 0.0;
};

// Groups rows by (method, sweep point) and averages over seeds.
std::vector<ReportRow> aggregate_results(const std::vector<ResultRow>& rows);
void print_report(std::ostream& out, const std::vector<ReportRow>& report);

ExperimentConfig experiment_config_from_json_file(const std::string& path);
ExperimentConfig experiment_config_from_json_text(const std::string& text);

}  // namespace recsteal
