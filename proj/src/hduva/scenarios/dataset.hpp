#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hduva/core/rng.hpp"
#include "hduva/core/tensor.hpp"
#include "hduva/scenarios/manifest.hpp"

namespace hduva::scen {

struct DomainBatch {
  int domain_index = -1;
  std::string domain;
  Tensor images;  // [B,C,H,W]
  std::vector<int> labels;
  bool semi_supervised = false;
};

// In-memory view of a manifest restricted to splits/domains; images are
// decoded once at load time.
class DomainDataset {
 public:
  static DomainDataset load(const ScenarioManifest& m, const std::string& dir,
                            const std::vector<std::string>& splits,
                            const std::vector<std::string>& exclude_domains = {},
                            const std::vector<std::string>& only_domains = {});

  int num_classes() const { return num_classes_; }
  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  long size() const { return static_cast<long>(labels_.size()); }
  const std::vector<std::string>& domains() const { return domains_; }
  long domain_size(int d) const {
    return static_cast<long>(by_domain_[d].size());
  }

  // One batch per domain per step, index order deterministic in (seed, epoch).
  // Shorter domains wrap around.
  std::vector<std::vector<DomainBatch>> epoch_steps(int batch_size,
                                                    std::uint64_t seed,
                                                    int epoch) const;

  DomainBatch full_domain(int domain_index) const;
  // All instances pooled into chunks of at most chunk rows.
  std::vector<DomainBatch> pooled_chunks(int chunk) const;

  // Hash of the instance identities (paths, labels, domains) for split
  // equality checks across runs.
  std::uint64_t split_hash() const;

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<int>& domain_of() const { return domain_idx_; }
  Tensor image(long i) const { return images_[i]; }

 private:
  int num_classes_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<std::string> domains_;
  std::vector<Tensor> images_;  // [C,H,W] each
  std::vector<int> labels_;
  std::vector<int> domain_idx_;
  std::vector<std::vector<long>> by_domain_;
  std::vector<std::string> identities_;
};

DomainBatch assemble_batch(const std::vector<Tensor>& images,
                           const std::vector<int>& labels);

}  // namespace hduva::scen
