#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hduva/core/nn.hpp"
#include "hduva/distributions/dirichlet.hpp"
#include "hduva/distributions/gaussian.hpp"
#include "hduva/model/config.hpp"
#include "hduva/model/sampling.hpp"
#include "hduva/weak/weak.hpp"

namespace hduva::model {

struct Betas {
  double x = 1.0;
  double y = 1.0;
  double d = 1.0;
  double s = 1.0;
};

// Per-batch decomposition of the extended objective. Terms are batch means
// of per-instance sums; the objective reconstructs as
//   recon - bx*kl_zx - by*kl_zy - bd*zd_log_ratio - bs*kl_s + gamma_y*aux.
struct ElboBreakdown {
  double recon_loglik = 0.0;
  bool has_zx = false;
  double kl_zx = 0.0;
  double kl_zy = 0.0;
  double zd_log_ratio = 0.0;
  double kl_s = 0.0;
  double aux_class_loglik = 0.0;
  Betas effective_betas;
};

double extended_objective(const ElboBreakdown& b, double gamma_y);

// Plain (non-graph) encoder outputs in eval mode.
struct EncoderOutputs {
  std::optional<dist::LatentGaussian> q_zx;  // [B,Dzx]
  dist::LatentGaussian q_zy;                 // [B,Dzy]
  dist::DirichletParams q_s;                 // [B,K]
  dist::LatentGaussian q_zd;                 // [B,Dzd]
};

// The HDUVA generative model: four encoders, conditional priors for z_y and
// z_d, a gated decoder and the auxiliary classifier. The lhduva variant
// infers the topic from a z_d sample and ladder-corrects the z_d posterior.
class HduvaModel {
 public:
  HduvaModel(ModelConfig cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  struct ForwardResult {
    ElboBreakdown breakdown;
    ag::Var objective;  // scalar extended objective F
    ag::Var zd_sample;  // [B,Dzd], feeds the MMD penalty
    ag::Var q_s_conc;   // [B,K] posterior concentrations (or [1,K] aggregated)
  };

  // Builds the stochastic graph for one mini-batch on the caller's
  // workspace and returns the extended objective with its breakdown.
  // aggregate_topics enables the weak-supervision concentration aggregation
  // for this batch.
  ForwardResult elbo_forward(nn::Workspace& w, const Tensor& x,
                             const std::vector<int>& labels, const Betas& betas,
                             double gamma_y, SampleSource& noise, bool training,
                             bool aggregate_topics = false);
  ForwardResult elbo_forward(const Tensor& x, const std::vector<int>& labels,
                             const Betas& betas, double gamma_y,
                             SampleSource& noise, bool training,
                             bool aggregate_topics = false) {
    nn::Workspace w(params_);
    return elbo_forward(w, x, labels, betas, gamma_y, noise, training,
                        aggregate_topics);
  }

  // Deep-All / evaluation path: class log-probabilities from the z_y
  // encoder mean and the auxiliary classifier.
  ag::Var classifier_logprobs_graph(nn::Workspace& w, const Tensor& x,
                                    bool training);
  Tensor classify(const Tensor& x);            // [B,C] log-probs, eval mode
  std::vector<int> predict(const Tensor& x);   // argmax labels

  // Eval-mode posteriors (no sampling; lhduva topics use the q_zd mean).
  EncoderOutputs encode_eval(const Tensor& x);
  // Stochastic encode following the generative story; seeded.
  EncoderOutputs encode(const Tensor& x, SampleSource& noise);

  dist::LatentGaussian prior_zy_eval(const std::vector<int>& labels);
  dist::LatentGaussian prior_zd_eval(const Tensor& s);  // [B,K] simplex rows

  Tensor classify_aux_eval(const Tensor& z_y);  // [B,C] log-probs

  // Decode latents to Bernoulli logits [B,C,H,W]. s may be empty when the
  // decoder does not condition on it; z_x empty means "without z_x".
  Tensor decode_eval(const Tensor& s, const Tensor& z_d, const Tensor& z_x,
                     const Tensor& z_y);

  // Class-label sweep with the seed image's domain representation; z_x = 0.
  // Returns sigmoided images [n, C, H, W].
  Tensor conditional_generate(const Tensor& seed_x,
                              const std::vector<int>& class_sweep, Rng& rng);

  // Topic posterior concentrations in eval mode, [B,K].
  Tensor infer_topic_concentration(const Tensor& x);

 private:
  struct TrunkOut {
    ag::Var flat;
    int dim;
  };
  TrunkOut trunk(nn::Workspace& w, const std::string& prefix, const ag::Var& x,
                 bool training);
  dist::GaussVar gauss_heads(nn::Workspace& w, const std::string& prefix,
                             const ag::Var& features);
  ag::Var topic_conc_from(nn::Workspace& w, const ag::Var& features);
  dist::GaussVar prior_zy_graph(nn::Workspace& w, const std::vector<int>& labels);
  dist::GaussVar prior_zd_graph(nn::Workspace& w, const ag::Var& s);
  ag::Var decode_graph(nn::Workspace& w, const ag::Var& dec_in);
  ag::Var classifier_from_zy(nn::Workspace& w, const ag::Var& z_y);
  Tensor one_hot(const std::vector<int>& labels) const;
  void check_image(const Tensor& x) const;
  int trunk_out_dim() const;

  ModelConfig cfg_;
  nn::ParamStore params_;
};

}  // namespace hduva::model
