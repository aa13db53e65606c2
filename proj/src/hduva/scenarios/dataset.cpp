#include "hduva/scenarios/dataset.hpp"

#include <algorithm>

#include "hduva/core/errors.hpp"
#include "hduva/scenarios/image.hpp"

namespace hduva::scen {

DomainDataset DomainDataset::load(const ScenarioManifest& m,
                                  const std::string& dir,
                                  const std::vector<std::string>& splits,
                                  const std::vector<std::string>& exclude_domains,
                                  const std::vector<std::string>& only_domains) {
  DomainDataset ds;
  for (const auto& ins : m.instances)
    ds.num_classes_ = std::max(ds.num_classes_, ins.class_label + 1);
  auto wanted = [&](const Instance& ins) {
    if (!splits.empty() &&
        std::find(splits.begin(), splits.end(), ins.split) == splits.end())
      return false;
    if (std::find(exclude_domains.begin(), exclude_domains.end(),
                  ins.nominal_domain) != exclude_domains.end())
      return false;
    if (!only_domains.empty() &&
        std::find(only_domains.begin(), only_domains.end(),
                  ins.nominal_domain) == only_domains.end())
      return false;
    return true;
  };
  for (const auto& ins : m.instances) {
    if (!wanted(ins)) continue;
    Image img = read_image(resolve_instance_path(dir, ins.path));
    if (ds.c_ == 0) {
      ds.c_ = img.c;
      ds.h_ = img.h;
      ds.w_ = img.w;
    } else if (img.c != ds.c_ || img.h != ds.h_ || img.w != ds.w_) {
      throw io_error("dataset: images have inconsistent shapes: " + ins.path);
    }
    int didx = -1;
    for (std::size_t d = 0; d < ds.domains_.size(); ++d)
      if (ds.domains_[d] == ins.nominal_domain) didx = static_cast<int>(d);
    if (didx < 0) {
      didx = static_cast<int>(ds.domains_.size());
      ds.domains_.push_back(ins.nominal_domain);
      ds.by_domain_.emplace_back();
    }
    ds.by_domain_[didx].push_back(static_cast<long>(ds.images_.size()));
    ds.images_.push_back(image_to_tensor(img));
    ds.labels_.push_back(ins.class_label);
    ds.domain_idx_.push_back(didx);
    ds.identities_.push_back(ins.path + "|" + std::to_string(ins.class_label) +
                             "|" + ins.nominal_domain + "|" + ins.split);
  }
  if (ds.images_.empty()) throw argument_error("dataset: selection is empty");
  return ds;
}

DomainBatch assemble_batch(const std::vector<Tensor>& images,
                           const std::vector<int>& labels) {
  if (images.empty()) throw argument_error("assemble_batch: empty batch");
  const int C = images[0].dim(0), H = images[0].dim(1), W = images[0].dim(2);
  DomainBatch b;
  b.images = Tensor({static_cast<int>(images.size()), C, H, W});
  const std::size_t per = images[0].size();
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = 0; j < per; ++j) b.images[i * per + j] = images[i][j];
  b.labels = labels;
  return b;
}

std::vector<std::vector<DomainBatch>> DomainDataset::epoch_steps(
    int batch_size, std::uint64_t seed, int epoch) const {
  if (batch_size < 1) throw argument_error("epoch_steps: batch_size must be >= 1");
  Rng rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(epoch + 1)));
  std::vector<std::vector<long>> order = by_domain_;
  long max_n = 0;
  for (auto& idx : order) {
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.below(i)]);
    max_n = std::max(max_n, static_cast<long>(idx.size()));
  }
  const long steps = (max_n + batch_size - 1) / batch_size;
  std::vector<std::vector<DomainBatch>> out;
  out.reserve(steps);
  for (long s = 0; s < steps; ++s) {
    std::vector<DomainBatch> step;
    for (std::size_t d = 0; d < order.size(); ++d) {
      std::vector<Tensor> imgs;
      std::vector<int> labs;
      const auto& idx = order[d];
      for (int i = 0; i < batch_size; ++i) {
        const long k = (s * batch_size + i) % static_cast<long>(idx.size());
        imgs.push_back(images_[idx[k]]);
        labs.push_back(labels_[idx[k]]);
      }
      DomainBatch b = assemble_batch(imgs, labs);
      b.domain_index = static_cast<int>(d);
      b.domain = domains_[d];
      step.push_back(std::move(b));
    }
    out.push_back(std::move(step));
  }
  return out;
}

DomainBatch DomainDataset::full_domain(int domain_index) const {
  const auto& idx = by_domain_.at(domain_index);
  std::vector<Tensor> imgs;
  std::vector<int> labs;
  for (long i : idx) {
    imgs.push_back(images_[i]);
    labs.push_back(labels_[i]);
  }
  DomainBatch b = assemble_batch(imgs, labs);
  b.domain_index = domain_index;
  b.domain = domains_[domain_index];
  return b;
}

std::vector<DomainBatch> DomainDataset::pooled_chunks(int chunk) const {
  std::vector<DomainBatch> out;
  std::vector<Tensor> imgs;
  std::vector<int> labs;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    imgs.push_back(images_[i]);
    labs.push_back(labels_[i]);
    if (static_cast<int>(imgs.size()) == chunk) {
      out.push_back(assemble_batch(imgs, labs));
      imgs.clear();
      labs.clear();
    }
  }
  if (!imgs.empty()) out.push_back(assemble_batch(imgs, labs));
  return out;
}

std::uint64_t DomainDataset::split_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& id : identities_) h = fnv1a64(id.data(), id.size(), h);
  return h;
}

}  // namespace hduva::scen
