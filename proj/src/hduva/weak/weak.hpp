#pragma once

#include <string>
#include <vector>

#include "hduva/core/graph.hpp"
#include "hduva/core/rng.hpp"
#include "hduva/distributions/dirichlet.hpp"
#include "hduva/mmd/mmd.hpp"

namespace hduva::weak {

// The four on/off combinations are the ablation cells: Agg-MMD, no-Agg-MMD,
// Agg-no-MMD, no-Agg-no-MMD (the latter is fully domain unsupervised).
struct WeakSupConfig {
  bool use_aggregation = false;
  bool use_mmd = false;
  double gamma_d = 1.0;  // Lagrange multiplier on the pairwise MMD term
  mmd::KernelSpec kernel = mmd::KernelSpec::default_spec();

  std::string cell_name() const;
  void validate() const;
};

// Arithmetic mean of posterior concentrations over a mini-batch.
dist::DirichletParams aggregate_concentration(
    const std::vector<dist::DirichletParams>& batch_concentrations);

// One draw from the aggregated posterior, shared by the whole mini-batch
// when forming the conditional prior of z_d. Training-time only.
dist::SimplexPoint shared_topic_sample(const dist::DirichletParams& aggregated,
                                       Rng& rng);

// loss = -sum F - gamma_d * pairwise MMD^2 over z_d batches (standardized
// jointly, detached) when use_mmd; larger inter-domain MMD lowers the loss.
double constrained_loss(const std::vector<double>& per_domain_objectives,
                        const std::vector<Tensor>& per_domain_zd_samples,
                        const WeakSupConfig& cfg);

// Graph versions used by the training step.
ag::Var aggregate_concentration_var(const ag::Var& batch_conc);  // [B,K] -> [1,K]
ag::Var mmd_penalty_var(const std::vector<ag::Var>& zd_batches,
                        const mmd::KernelSpec& kernel);
ag::Var constrained_loss_var(const std::vector<ag::Var>& per_domain_objectives,
                             const std::vector<ag::Var>& per_domain_zd_samples,
                             const WeakSupConfig& cfg);

}  // namespace hduva::weak
