#include "hduva/distributions/gaussian.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"

namespace hduva::dist {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

void check_pair(const LatentGaussian& q, const LatentGaussian& p,
                const char* op) {
  if (q.dim() != p.dim())
    throw argument_error(std::string(op) + ": dimension mismatch");
}
}  // namespace

LatentGaussian::LatentGaussian(Tensor m, Tensor lv)
    : mean(std::move(m)), log_variance(std::move(lv)) {
  if (mean.size() != log_variance.size() || mean.size() == 0)
    throw argument_error("LatentGaussian: mean/log_variance dims differ");
  if (!mean.all_finite() || !log_variance.all_finite())
    throw argument_error("LatentGaussian: non-finite parameters");
}

Tensor gaussian_reparam(const LatentGaussian& params, const Tensor& noise) {
  if (noise.size() != params.mean.size())
    throw argument_error("gaussian_reparam: noise dimension mismatch");
  Tensor out(params.mean.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = params.mean[i] + std::exp(0.5 * params.log_variance[i]) * noise[i];
  return out;
}

double kl_diag_gaussians(const LatentGaussian& q, const LatentGaussian& p) {
  check_pair(q, p, "kl_diag_gaussians");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.mean.size(); ++i) {
    const double lvq = q.log_variance[i], lvp = p.log_variance[i];
    const double dm = p.mean[i] - q.mean[i];
    acc += 0.5 * (std::exp(lvq - lvp) + dm * dm * std::exp(-lvp) - 1.0 + lvp -
                  lvq);
  }
  return acc;
}

double gaussian_logpdf(const LatentGaussian& params, const Tensor& x) {
  if (x.size() != params.mean.size())
    throw argument_error("gaussian_logpdf: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lv = params.log_variance[i];
    const double d = x[i] - params.mean[i];
    acc += -0.5 * (kLog2Pi + lv + d * d * std::exp(-lv));
  }
  return acc;
}

double hierarchical_log_ratio(const LatentGaussian& q_zd,
                              const LatentGaussian& p_zd_given_s,
                              const Tensor& zd_sample) {
  check_pair(q_zd, p_zd_given_s, "hierarchical_log_ratio");
  if (zd_sample.size() != q_zd.mean.size())
    throw argument_error("hierarchical_log_ratio: sample dimension mismatch");
  return gaussian_logpdf(q_zd, zd_sample) -
         gaussian_logpdf(p_zd_given_s, zd_sample);
}

ag::Var gauss_reparam_var(const ag::Var& mean, const ag::Var& logvar,
                          const Tensor& noise) {
  using namespace ag;
  if (noise.size() != mean->val.size())
    throw argument_error("gauss_reparam_var: noise dimension mismatch");
  Var std = exp(scale(logvar, 0.5));
  return add(mean, mul(std, constant(noise)));
}

ag::Var gauss_kl_elem(const ag::Var& q_mean, const ag::Var& q_logvar,
                      const ag::Var& p_mean, const ag::Var& p_logvar) {
  using namespace ag;
  Var dlv = sub(q_logvar, p_logvar);
  Var dm = sub(p_mean, q_mean);
  Var ratio = exp(dlv);
  Var maha = mul(mul(dm, dm), exp(neg(p_logvar)));
  return scale(sub(add(ratio, maha), add_scalar(dlv, 1.0)), 0.5);
}

ag::Var gauss_logpdf_elem(const ag::Var& mean, const ag::Var& logvar,
                          const ag::Var& x) {
  using namespace ag;
  Var d = sub(x, mean);
  Var quad = mul(mul(d, d), exp(neg(logvar)));
  return scale(add_scalar(add(logvar, quad), kLog2Pi), -0.5);
}

GaussVar ladder_correct_var(const GaussVar& q, const GaussVar& p) {
  using namespace ag;
  if (!q.mean->val.same_shape(p.mean->val))
    throw argument_error("ladder_correct: dimension mismatch");
  Var prec_q = exp(neg(q.logvar));
  Var prec_p = exp(neg(p.logvar));
  Var prec = add(prec_q, prec_p);
  Var mean = divide(add(mul(prec_q, q.mean), mul(prec_p, p.mean)), prec);
  Var logvar = neg(log(prec));
  return {mean, logvar};
}

LatentGaussian ladder_correct(const LatentGaussian& q, const LatentGaussian& p) {
  check_pair(q, p, "ladder_correct");
  Tensor mean(q.mean.shape()), logvar(q.mean.shape());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double pq = std::exp(-q.log_variance[i]);
    const double pp = std::exp(-p.log_variance[i]);
    mean[i] = (pq * q.mean[i] + pp * p.mean[i]) / (pq + pp);
    logvar[i] = -std::log(pq + pp);
  }
  return LatentGaussian(std::move(mean), std::move(logvar));
}

}  // namespace hduva::dist
