#pragma once

#include <map>
#include <string>

#include "hduva/core/nn.hpp"

namespace hduva::train {

// Adam with global-norm gradient clipping. State is keyed by parameter name
// so it survives checkpoint round trips of the parameter store itself.
class Adam {
 public:
  Adam(double lr, double clip_norm = 100.0, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), clip_(clip_norm), b1_(beta1), b2_(beta2), eps_(eps) {}

  // Reads gradients off the workspace leaves and updates every trainable
  // parameter of its store in place.
  void step(nn::Workspace& w);

  long steps_taken() const { return t_; }

 private:
  double lr_, clip_, b1_, b2_, eps_;
  long t_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

}  // namespace hduva::train
