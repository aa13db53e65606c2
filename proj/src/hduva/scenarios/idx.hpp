#pragma once

#include <string>
#include <vector>

#include "hduva/scenarios/image.hpp"

namespace hduva::scen {

// IDX-format corpora (the MNIST container format).
struct IdxCorpus {
  int rows = 0, cols = 0;
  std::vector<Image> images;     // grayscale
  std::vector<int> labels;
};

IdxCorpus read_idx(const std::string& images_path, const std::string& labels_path);
void write_idx(const IdxCorpus& corpus, const std::string& images_path,
               const std::string& labels_path);

}  // namespace hduva::scen
