#pragma once

#include <string>
#include <vector>

#include "hduva/core/rng.hpp"
#include "hduva/core/tensor.hpp"
#include "hduva/distributions/dirichlet.hpp"

namespace hduva::model {

// Source of stochasticity for a forward pass. Tags name the call sites in a
// deterministic order; the production source ignores them and consumes its
// stream, while test sources may cache draws per tag to build common-random-
// number finite differences.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual Tensor normal(const std::string& tag, std::vector<int> shape) = 0;
  // Elementwise Gamma(conc_i, 1) draws at clamped concentrations.
  virtual Tensor gammas(const std::string& tag, const Tensor& conc) = 0;
};

class RngSource final : public SampleSource {
 public:
  explicit RngSource(std::uint64_t seed) : rng_(seed) {}
  explicit RngSource(Rng rng) : rng_(rng) {}

  Tensor normal(const std::string&, std::vector<int> shape) override {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng_.normal();
    return t;
  }

  Tensor gammas(const std::string&, const Tensor& conc) override {
    return dist::draw_gammas(conc, rng_);
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

}  // namespace hduva::model
