#pragma once

#include "hduva/core/graph.hpp"
#include "hduva/core/rng.hpp"
#include "hduva/core/tensor.hpp"

namespace hduva::dist {

// Concentrations below this are clamped before sampling; gamma draws and
// digamma are unstable near zero.
constexpr double kConcentrationFloor = 1e-4;

struct DirichletParams {
  Tensor concentration;

  DirichletParams() = default;
  explicit DirichletParams(Tensor c);
  int dim() const { return static_cast<int>(concentration.size()); }
};

struct SimplexPoint {
  Tensor weights;

  SimplexPoint() = default;
  explicit SimplexPoint(Tensor w);
  int dim() const { return static_cast<int>(weights.size()); }
};

// Normalized independent Gamma(alpha_k, 1) draws.
SimplexPoint dirichlet_sample(const DirichletParams& params, Rng& rng);

// Closed-form KL(Dir(q) || Dir(p)) via log-gamma and digamma.
double kl_dirichlet(const DirichletParams& q, const DirichletParams& p);

Tensor dirichlet_mean(const DirichletParams& params);

// Graph-building variants on batched concentrations [B,K].
//
// dirichlet_from_gammas_var consumes pre-drawn Gamma(alpha_ij, 1) values and
// backpropagates through them with the implicit-reparameterization gradient
// d g / d alpha = -(dP/da)(alpha, g) / pdf(alpha, g). dirichlet_sample_var
// draws the gammas from rng at the clamped concentration values.
ag::Var dirichlet_sample_var(const ag::Var& conc, Rng& rng);
ag::Var dirichlet_from_gammas_var(const ag::Var& conc, const Tensor& gammas);

// Elementwise Gamma(alpha_ij, 1) draws at clamped concentrations.
Tensor draw_gammas(const Tensor& conc, Rng& rng);

// Per-row KL(Dir(q_conc[i,:]) || Dir(p_conc)) -> [B,1]; gradient flows to q.
ag::Var kl_dirichlet_var(const ag::Var& q_conc, const Tensor& p_conc);

}  // namespace hduva::dist
