#pragma once

#include <string>
#include <vector>

#include "hduva/model/checkpoint.hpp"
#include "hduva/scenarios/dataset.hpp"
#include "hduva/scenarios/manifest.hpp"
#include "hduva/training/trainer.hpp"

namespace hduva::scen {

struct LodoRow {
  std::string test_domain;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  int repeats = 0;
};

enum class AlgorithmId { hduva, lhduva, deep_all };

// Leave-one-domain-out: for each non-bridge domain, trains on the others
// and evaluates held-out accuracy, repeated across seeds.
std::vector<LodoRow> lodo_evaluate(AlgorithmId algo,
                                   const ScenarioManifest& manifest,
                                   const std::string& manifest_dir,
                                   const model::ModelConfig& mc,
                                   const train::TrainConfig& tc,
                                   const std::vector<std::uint64_t>& seeds);

// Trapezoidal area under accuracy over a shift index normalized to [0,1].
double trapezoid_auc(const std::vector<double>& accuracies);

struct ShiftAucResult {
  std::vector<double> per_shift_accuracy;
  double auc = 0.0;
};

// Evaluates a checkpoint's test accuracy over an ordered sequence of shift
// manifests (split=test instances).
ShiftAucResult shift_auc_evaluate(const model::Checkpoint& ckpt,
                                  const std::vector<std::string>& manifest_dirs);

// Mean silhouette coefficient of points grouped by cluster label, squared
// Euclidean geometry on the raw coordinates.
double mean_silhouette(const Tensor& points, const std::vector<int>& cluster);

}  // namespace hduva::scen
