#include "hduva/weak/weak.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"

namespace hduva::weak {

std::string WeakSupConfig::cell_name() const {
  std::string name = use_aggregation ? "Agg" : "no-Agg";
  name += use_mmd ? "-MMD" : "-no-MMD";
  return name;
}

void WeakSupConfig::validate() const {
  if (gamma_d < 0.0) throw argument_error("WeakSupConfig: gamma_d must be >= 0");
}

dist::DirichletParams aggregate_concentration(
    const std::vector<dist::DirichletParams>& batch_concentrations) {
  if (batch_concentrations.empty())
    throw argument_error("aggregate_concentration: empty batch");
  const int K = batch_concentrations.front().dim();
  Tensor agg({K});
  for (const auto& c : batch_concentrations) {
    if (c.dim() != K)
      throw argument_error("aggregate_concentration: dimension mismatch");
    for (int k = 0; k < K; ++k) agg[k] += c.concentration[k];
  }
  const double inv = 1.0 / static_cast<double>(batch_concentrations.size());
  for (int k = 0; k < K; ++k) agg[k] *= inv;
  return dist::DirichletParams(std::move(agg));
}

dist::SimplexPoint shared_topic_sample(const dist::DirichletParams& aggregated,
                                       Rng& rng) {
  return dist::dirichlet_sample(aggregated, rng);
}

namespace {

// Joint per-dimension standardization of the pooled z_d batches; shifts and
// scales are treated as constants so the penalty geometry stays fixed
// within a step.
std::vector<Tensor> standardize(const std::vector<Tensor>& batches) {
  const int D = batches.front().dim(1);
  long n = 0;
  Tensor mean({D}), var({D});
  for (const auto& b : batches) {
    for (int i = 0; i < b.dim(0); ++i)
      for (int d = 0; d < D; ++d) mean[d] += b.at(i, d);
    n += b.dim(0);
  }
  for (int d = 0; d < D; ++d) mean[d] /= static_cast<double>(n);
  for (const auto& b : batches)
    for (int i = 0; i < b.dim(0); ++i)
      for (int d = 0; d < D; ++d) {
        const double t = b.at(i, d) - mean[d];
        var[d] += t * t;
      }
  Tensor scale({D});
  for (int d = 0; d < D; ++d) {
    const double sd = std::sqrt(var[d] / static_cast<double>(n));
    scale[d] = 1.0 / (sd > 1e-12 ? sd : 1.0);
  }
  std::vector<Tensor> out;
  out.reserve(batches.size());
  for (const auto& b : batches) {
    Tensor z = b.clone();
    for (int i = 0; i < z.dim(0); ++i)
      for (int d = 0; d < D; ++d) z.at(i, d) = (z.at(i, d) - mean[d]) * scale[d];
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace

double constrained_loss(const std::vector<double>& per_domain_objectives,
                        const std::vector<Tensor>& per_domain_zd_samples,
                        const WeakSupConfig& cfg) {
  cfg.validate();
  if (per_domain_objectives.empty())
    throw argument_error("constrained_loss: no domains");
  double loss = 0.0;
  for (double f : per_domain_objectives) loss -= f;
  if (cfg.use_mmd && cfg.gamma_d > 0.0) {
    if (per_domain_zd_samples.size() != per_domain_objectives.size())
      throw argument_error("constrained_loss: objective/embedding count mismatch");
    if (per_domain_zd_samples.size() > 1)
      loss -= cfg.gamma_d *
              mmd::pairwise_domain_mmd(standardize(per_domain_zd_samples),
                                       cfg.kernel);
  }
  return loss;
}

ag::Var aggregate_concentration_var(const ag::Var& batch_conc) {
  if (batch_conc->val.ndim() != 2)
    throw argument_error("aggregate_concentration_var: need [B,K]");
  return ag::mean_rows(batch_conc);
}

ag::Var mmd_penalty_var(const std::vector<ag::Var>& zd_batches,
                        const mmd::KernelSpec& kernel) {
  const int D = zd_batches.front()->val.dim(1);
  long n = 0;
  Tensor mean({D}), var({D});
  for (const auto& v : zd_batches) {
    for (int i = 0; i < v->val.dim(0); ++i)
      for (int d = 0; d < D; ++d) mean[d] += v->val.at(i, d);
    n += v->val.dim(0);
  }
  for (int d = 0; d < D; ++d) mean[d] /= static_cast<double>(n);
  for (const auto& v : zd_batches)
    for (int i = 0; i < v->val.dim(0); ++i)
      for (int d = 0; d < D; ++d) {
        const double t = v->val.at(i, d) - mean[d];
        var[d] += t * t;
      }
  Tensor scale({D});
  for (int d = 0; d < D; ++d) {
    const double sd = std::sqrt(var[d] / static_cast<double>(n));
    scale[d] = 1.0 / (sd > 1e-12 ? sd : 1.0);
  }
  std::vector<ag::Var> std_vars;
  std_vars.reserve(zd_batches.size());
  for (const auto& v : zd_batches) {
    const int B = v->val.dim(0);
    Tensor shift_t({B, D}), scale_t({B, D});
    for (int i = 0; i < B; ++i)
      for (int d = 0; d < D; ++d) {
        shift_t.at(i, d) = -mean[d];
        scale_t.at(i, d) = scale[d];
      }
    std_vars.push_back(
        ag::mul(ag::add(v, ag::constant(shift_t)), ag::constant(scale_t)));
  }
  return mmd::pairwise_domain_mmd_var(std_vars, kernel);
}

ag::Var constrained_loss_var(const std::vector<ag::Var>& per_domain_objectives,
                             const std::vector<ag::Var>& per_domain_zd_samples,
                             const WeakSupConfig& cfg) {
  cfg.validate();
  if (per_domain_objectives.empty())
    throw argument_error("constrained_loss_var: no domains");
  ag::Var loss = ag::constant_scalar(0.0);
  for (const auto& f : per_domain_objectives) loss = ag::sub(loss, f);
  if (cfg.use_mmd && cfg.gamma_d > 0.0 && per_domain_zd_samples.size() > 1)
    loss = ag::sub(loss, ag::scale(mmd_penalty_var(per_domain_zd_samples,
                                                   cfg.kernel),
                                   cfg.gamma_d));
  return loss;
}

}  // namespace hduva::weak
