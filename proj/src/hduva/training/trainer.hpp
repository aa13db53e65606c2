#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hduva/model/checkpoint.hpp"
#include "hduva/model/model.hpp"
#include "hduva/scenarios/dataset.hpp"
#include "hduva/training/adam.hpp"
#include "hduva/weak/weak.hpp"

namespace hduva::train {

enum class Selection { extended_elbo, val_accuracy };

struct TrainConfig {
  model::Betas beta_targets;     // all 1.0 by default
  double gamma_y = 1e5;
  int warmup_epochs = 100;       // T_warm
  int max_epochs = 100;
  int patience = 100;            // epochs without improvement before stopping
  double learning_rate = 1e-4;
  int batch_size = 32;
  std::uint64_t seed = 0;
  Selection selection = Selection::extended_elbo;
  weak::WeakSupConfig weak;
  double grad_clip = 100.0;
  double improve_tol = 1e-6;
  bool track_accuracy = false;  // per-epoch training-set accuracy
  std::map<std::string, std::string> snapshot;  // resolved config for records

  void validate() const;
};

// Linear ramp beta_target * min(1, epoch / T_warm); T_warm = 0 hits the
// targets immediately.
model::Betas warmup_beta(int epoch, const TrainConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double mean_objective = 0.0;
  model::ElboBreakdown mean_terms;
  model::Betas effective;
  double train_accuracy = -1.0;  // optional; -1 when not tracked
};

struct TrainCounters {
  long semi_batches = 0;
  long semi_in_mmd_pairs = 0;   // must stay 0
  long semi_shared_topic = 0;   // must stay 0
};

struct StepResult {
  double loss = 0.0;
  std::vector<model::ElboBreakdown> per_domain;
  double mean_objective = 0.0;
};

// One gradient update on stratified per-domain batches (plus optional
// semi-supervised batches that bypass aggregation and the MMD pairs).
StepResult train_step(model::HduvaModel& m, Adam& opt,
                      const std::vector<scen::DomainBatch>& batches,
                      const model::Betas& betas, const TrainConfig& cfg,
                      model::SampleSource& noise,
                      TrainCounters* counters = nullptr);

struct TrainData {
  scen::DomainDataset train;
  std::optional<scen::DomainDataset> val;
  std::optional<scen::DomainDataset> semisup;
};

struct TrainResult {
  model::Checkpoint best;
  int best_epoch = -1;
  double best_score = 0.0;
  std::vector<EpochMetrics> history;
  TrainCounters counters;
  std::uint64_t data_split_hash = 0;
};

TrainResult fit(const model::ModelConfig& mc, const TrainConfig& cfg,
                const TrainData& data);

// Pooled-domain cross-entropy baseline sharing the evaluation interface;
// checkpoint carries the variant tag "deep_all".
TrainResult deep_all_fit(const model::ModelConfig& mc, const TrainConfig& cfg,
                         const TrainData& data);

double accuracy(model::HduvaModel& m, const scen::DomainDataset& data);
double accuracy(const model::Checkpoint& ckpt, const scen::DomainDataset& data);

struct AblationRow {
  std::string cell;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  int repeats = 0;
};

// Runs fit for the four Agg/MMD cells with shared seeds per repeat.
std::vector<AblationRow> run_ablation_matrix(const model::ModelConfig& mc,
                                             const TrainConfig& base,
                                             const TrainData& data,
                                             const std::vector<std::uint64_t>& seeds);

void write_metrics_csv(const std::vector<EpochMetrics>& history,
                       const std::string& path);

}  // namespace hduva::train
