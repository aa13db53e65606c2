#pragma once

#include "hduva/core/graph.hpp"
#include "hduva/core/tensor.hpp"

namespace hduva::dist {

// Diagonal Gaussian given by mean and log-variance of equal dimension.
// Used both per-instance (1-D tensors) and batched ([B,D]).
struct LatentGaussian {
  Tensor mean;
  Tensor log_variance;

  LatentGaussian() = default;
  LatentGaussian(Tensor m, Tensor lv);
  int dim() const { return static_cast<int>(mean.size()); }
};

Tensor gaussian_reparam(const LatentGaussian& params, const Tensor& noise);

// Closed-form KL(q || p) for diagonal Gaussians, 64-bit accumulation.
double kl_diag_gaussians(const LatentGaussian& q, const LatentGaussian& p);

double gaussian_logpdf(const LatentGaussian& params, const Tensor& x);

// log q(zd_sample) - log p(zd_sample); single-sample estimate of the
// first term of the hierarchical KL decomposition.
double hierarchical_log_ratio(const LatentGaussian& q_zd,
                              const LatentGaussian& p_zd_given_s,
                              const Tensor& zd_sample);

// Graph-building variants. Shapes are elementwise [B,D]; callers reduce.
ag::Var gauss_reparam_var(const ag::Var& mean, const ag::Var& logvar,
                          const Tensor& noise);
ag::Var gauss_kl_elem(const ag::Var& q_mean, const ag::Var& q_logvar,
                      const ag::Var& p_mean, const ag::Var& p_logvar);
ag::Var gauss_logpdf_elem(const ag::Var& mean, const ag::Var& logvar,
                          const ag::Var& x);

// Precision-weighted combination of two diagonal Gaussians (ladder-style
// top-down correction).
struct GaussVar {
  ag::Var mean;
  ag::Var logvar;
};
GaussVar ladder_correct_var(const GaussVar& q, const GaussVar& p);
LatentGaussian ladder_correct(const LatentGaussian& q, const LatentGaussian& p);

}  // namespace hduva::dist
