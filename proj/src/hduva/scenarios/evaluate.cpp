#include "hduva/scenarios/evaluate.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"

namespace hduva::scen {

std::vector<LodoRow> lodo_evaluate(AlgorithmId algo,
                                   const ScenarioManifest& manifest,
                                   const std::string& manifest_dir,
                                   const model::ModelConfig& mc,
                                   const train::TrainConfig& tc,
                                   const std::vector<std::uint64_t>& seeds) {
  const std::vector<std::string> rotation = manifest.test_rotation_domains();
  if (rotation.size() < 2)
    throw argument_error("lodo_evaluate: need at least 2 non-bridge domains");
  if (seeds.empty()) throw argument_error("lodo_evaluate: need seeds");

  std::vector<LodoRow> rows;
  for (const auto& test_domain : rotation) {
    LodoRow row;
    row.test_domain = test_domain;
    std::vector<double> accs;
    for (std::uint64_t seed : seeds) {
      try {
        train::TrainData data{
            DomainDataset::load(manifest, manifest_dir, {"train"},
                                /*exclude=*/{test_domain}),
            std::nullopt, std::nullopt};
        model::ModelConfig run_mc = mc;
        train::TrainConfig run_tc = tc;
        run_tc.seed = seed;
        train::TrainResult r =
            algo == AlgorithmId::deep_all
                ? train::deep_all_fit(run_mc, run_tc, data)
                : train::fit(run_mc, run_tc, data);
        DomainDataset held = DomainDataset::load(manifest, manifest_dir, {},
                                                 /*exclude=*/{},
                                                 /*only=*/{test_domain});
        accs.push_back(train::accuracy(r.best, held));
      } catch (const training_error& e) {
        throw training_error(e.term, std::string(e.what()) + " (test_domain=" +
                                         test_domain + ", seed=" +
                                         std::to_string(seed) + ")");
      }
    }
    row.repeats = static_cast<int>(accs.size());
    for (double a : accs) row.mean_accuracy += a;
    row.mean_accuracy /= static_cast<double>(accs.size());
    if (accs.size() > 1) {
      double var = 0.0;
      for (double a : accs)
        var += (a - row.mean_accuracy) * (a - row.mean_accuracy);
      row.sd_accuracy = std::sqrt(var / static_cast<double>(accs.size() - 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double trapezoid_auc(const std::vector<double>& accuracies) {
  if (accuracies.size() < 2)
    throw argument_error("trapezoid_auc: need at least 2 shift points");
  const std::size_t n = accuracies.size();
  double auc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    auc += 0.5 * (accuracies[i] + accuracies[i + 1]);
  return auc / static_cast<double>(n - 1);
}

ShiftAucResult shift_auc_evaluate(const model::Checkpoint& ckpt,
                                  const std::vector<std::string>& manifest_dirs) {
  if (manifest_dirs.size() < 2)
    throw argument_error("shift_auc_evaluate: need at least 2 shift points");
  model::HduvaModel m(ckpt.config, 0);
  m.params().copy_values_from(ckpt.params);
  ShiftAucResult res;
  for (const auto& dir : manifest_dirs) {
    const ScenarioManifest man = read_manifest(dir);
    DomainDataset test = DomainDataset::load(man, dir, {"test"});
    res.per_shift_accuracy.push_back(train::accuracy(m, test));
  }
  res.auc = trapezoid_auc(res.per_shift_accuracy);
  return res;
}

double mean_silhouette(const Tensor& points, const std::vector<int>& cluster) {
  if (points.ndim() != 2 ||
      static_cast<int>(cluster.size()) != points.dim(0))
    throw argument_error("mean_silhouette: shape mismatch");
  const int N = points.dim(0), D = points.dim(1);
  int num_clusters = 0;
  for (int c : cluster) num_clusters = std::max(num_clusters, c + 1);
  if (num_clusters < 2)
    throw argument_error("mean_silhouette: need at least 2 clusters");

  auto dist = [&](int i, int j) {
    double acc = 0.0;
    for (int d = 0; d < D; ++d) {
      const double t = points.at(i, d) - points.at(j, d);
      acc += t * t;
    }
    return std::sqrt(acc);
  };
  std::vector<long> counts(num_clusters, 0);
  for (int c : cluster) ++counts[c];

  double total = 0.0;
  long used = 0;
  for (int i = 0; i < N; ++i) {
    std::vector<double> mean_to(num_clusters, 0.0);
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      mean_to[cluster[j]] += dist(i, j);
    }
    const int ci = cluster[i];
    if (counts[ci] < 2) continue;  // silhouette undefined for singletons
    const double a = mean_to[ci] / static_cast<double>(counts[ci] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < num_clusters; ++c) {
      if (c == ci || counts[c] == 0) continue;
      b = std::min(b, mean_to[c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0 ? (b - a) / denom : 0.0;
    ++used;
  }
  if (used == 0) throw argument_error("mean_silhouette: no scorable points");
  return total / static_cast<double>(used);
}

}  // namespace hduva::scen
