#include "hduva/training/adam.hpp"

#include <cmath>

namespace hduva::train {

void Adam::step(nn::Workspace& w) {
  nn::ParamStore& ps = w.store();
  std::map<std::string, Tensor> grads;
  double sq_norm = 0.0;
  for (const auto& name : ps.names()) {
    if (!ps.trainable(name)) continue;
    Tensor g = w.grad(name);
    for (std::size_t i = 0; i < g.size(); ++i) sq_norm += g[i] * g[i];
    grads.emplace(name, std::move(g));
  }
  const double norm = std::sqrt(sq_norm);
  const double scale = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;

  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& [name, g] : grads) {
    Tensor& p = ps.get(name);
    auto mit = m_.find(name);
    if (mit == m_.end()) {
      mit = m_.emplace(name, Tensor(p.shape())).first;
      v_.emplace(name, Tensor(p.shape()));
    }
    Tensor& m = mit->second;
    Tensor& v = v_.at(name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] * scale;
      m[i] = b1_ * m[i] + (1.0 - b1_) * gi;
      v[i] = b2_ * v[i] + (1.0 - b2_) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace hduva::train
