#include "hduva/model/model.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"

namespace hduva::model {

using ag::Var;
using dist::GaussVar;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::hduva: return "hduva";
    case Variant::lhduva: return "lhduva";
    case Variant::deep_all: return "deep_all";
  }
  return "hduva";
}

Variant variant_from_name(const std::string& name) {
  if (name == "hduva") return Variant::hduva;
  if (name == "lhduva") return Variant::lhduva;
  if (name == "deep_all") return Variant::deep_all;
  throw argument_error("unknown model variant: " + name);
}

double extended_objective(const ElboBreakdown& b, double gamma_y) {
  if (gamma_y < 0.0) throw argument_error("extended_objective: gamma_y < 0");
  const Betas& be = b.effective_betas;
  const double elbo = b.recon_loglik - (b.has_zx ? be.x * b.kl_zx : 0.0) -
                      be.y * b.kl_zy - be.d * b.zd_log_ratio - be.s * b.kl_s;
  return elbo + gamma_y * b.aux_class_loglik;
}

namespace {

Var flatten(const Var& x) {
  const int B = x->val.dim(0);
  const int rest = static_cast<int>(x->val.size()) / B;
  return ag::reshape(x, {B, rest});
}

// Stable Bernoulli log-likelihood of pixels in [0,1] under logits.
Var bernoulli_loglik_sum(const Tensor& x, const Var& logits) {
  Tensor ones_minus(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) ones_minus[i] = 1.0 - x[i];
  Var xv = ag::constant(x);
  Var omv = ag::constant(ones_minus);
  Var term = ag::add(ag::mul(xv, ag::softplus(ag::neg(logits))),
                     ag::mul(omv, ag::softplus(logits)));
  return ag::neg(ag::sum_all(term));
}

}  // namespace

HduvaModel::HduvaModel(ModelConfig cfg, std::uint64_t init_seed)
    : cfg_(cfg) {
  cfg_.validate();
  Rng rng(init_seed);
  const bool conv = cfg_.backbone == Backbone::conv_small;
  const bool bias = conv;
  const int tdim = trunk_out_dim();
  const int K = cfg_.topic_dim;

  auto init_trunk = [&](const std::string& prefix) {
    if (!conv) return;  // linear backbone has no trunk parameters
    nn::init_conv2d(params_, rng, prefix + ".conv1", cfg_.channels, cfg_.trunk_c1,
                    5, 5);
    nn::init_batchnorm2d(params_, prefix + ".bn1", cfg_.trunk_c1);
    nn::init_conv2d(params_, rng, prefix + ".conv2", cfg_.trunk_c1, cfg_.trunk_c2,
                    5, 5);
    nn::init_batchnorm2d(params_, prefix + ".bn2", cfg_.trunk_c2);
  };
  auto init_heads = [&](const std::string& prefix, int in, int out) {
    nn::init_linear(params_, rng, prefix + ".mean", in, out, bias);
    nn::init_linear(params_, rng, prefix + ".logvar", in, out, bias);
  };

  if (cfg_.with_zx) {
    init_trunk("enc_zx.trunk");
    init_heads("enc_zx", tdim, cfg_.zx_dim);
  }
  init_trunk("enc_zy.trunk");
  init_heads("enc_zy", tdim, cfg_.zy_dim);

  if (cfg_.variant == Variant::lhduva) {
    init_trunk("enc_zd.trunk");
    init_heads("enc_zd", tdim, cfg_.zd_dim);
    // Topic encoder consumes z_d samples.
    if (conv) {
      nn::init_linear(params_, rng, "enc_s.h1", cfg_.zd_dim, 64, true);
      nn::init_linear(params_, rng, "enc_s.conc", 64, K, true);
    } else {
      nn::init_linear(params_, rng, "enc_s.conc", cfg_.zd_dim, K, false);
    }
  } else {
    init_trunk("enc_s.trunk");
    nn::init_linear(params_, rng, "enc_s.conc", tdim, K, bias);
    init_trunk("enc_zd.trunk");
    init_heads("enc_zd", tdim + K, cfg_.zd_dim);
  }

  nn::init_linear(params_, rng, "prior_zy.mean", cfg_.num_classes, cfg_.zy_dim,
                  false);
  nn::init_linear(params_, rng, "prior_zy.logvar", cfg_.num_classes, cfg_.zy_dim,
                  false);
  nn::init_linear(params_, rng, "prior_zd.mean", K, cfg_.zd_dim, bias);
  nn::init_linear(params_, rng, "prior_zd.logvar", K, cfg_.zd_dim, bias);

  const int dec_in = cfg_.decoder_input_dim();
  if (conv) {
    nn::init_gated_dense(params_, rng, "dec.gd", dec_in, cfg_.image_size());
    nn::init_gated_conv2d(params_, rng, "dec.gc1", cfg_.channels, 64, 3, 3);
    nn::init_gated_conv2d(params_, rng, "dec.gc2", 64, 64, 3, 3);
    nn::init_conv2d(params_, rng, "dec.proj", 64, cfg_.channels, 1, 1);
  } else {
    nn::init_linear(params_, rng, "dec.lin", dec_in, cfg_.image_size(), false);
  }

  nn::init_linear(params_, rng, "cls", cfg_.zy_dim, cfg_.num_classes, bias);
}

int HduvaModel::trunk_out_dim() const {
  if (cfg_.backbone == Backbone::linear) return cfg_.image_size();
  const int h4 = (cfg_.height / 2) / 2;
  const int w4 = (cfg_.width / 2) / 2;
  return cfg_.trunk_c2 * h4 * w4;
}

void HduvaModel::check_image(const Tensor& x) const {
  if (x.ndim() != 4 || x.dim(1) != cfg_.channels || x.dim(2) != cfg_.height ||
      x.dim(3) != cfg_.width || x.dim(0) < 1)
    throw argument_error("model: image batch does not match configured shape");
}

Tensor HduvaModel::one_hot(const std::vector<int>& labels) const {
  Tensor t({static_cast<int>(labels.size()), cfg_.num_classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= cfg_.num_classes)
      throw argument_error("model: class label out of range");
    t.at(static_cast<int>(i), labels[i]) = 1.0;
  }
  return t;
}

HduvaModel::TrunkOut HduvaModel::trunk(nn::Workspace& w,
                                       const std::string& prefix, const Var& x,
                                       bool training) {
  if (cfg_.backbone == Backbone::linear)
    return {flatten(x), cfg_.image_size()};
  Var h = nn::conv2d(w, prefix + ".conv1", x, 5, 5, 2);
  h = nn::batchnorm2d(w, prefix + ".bn1", h, training);
  h = ag::relu(h);
  h = nn::maxpool2d(h);
  h = nn::conv2d(w, prefix + ".conv2", h, 5, 5, 2);
  h = nn::batchnorm2d(w, prefix + ".bn2", h, training);
  h = ag::relu(h);
  h = nn::maxpool2d(h);
  return {flatten(h), trunk_out_dim()};
}

GaussVar HduvaModel::gauss_heads(nn::Workspace& w, const std::string& prefix,
                                 const Var& features) {
  const bool bias = cfg_.backbone == Backbone::conv_small;
  return {nn::linear(w, prefix + ".mean", features, bias),
          nn::linear(w, prefix + ".logvar", features, bias)};
}

Var HduvaModel::topic_conc_from(nn::Workspace& w, const Var& features) {
  const bool conv = cfg_.backbone == Backbone::conv_small;
  Var h = features;
  if (cfg_.variant == Variant::lhduva && conv)
    h = ag::relu(nn::linear(w, "enc_s.h1", h, true));
  Var raw = nn::linear(w, "enc_s.conc", h, conv);
  return ag::add_scalar(ag::softplus(raw), dist::kConcentrationFloor);
}

GaussVar HduvaModel::prior_zy_graph(nn::Workspace& w,
                                    const std::vector<int>& labels) {
  Var oh = ag::constant(one_hot(labels));
  return {nn::linear(w, "prior_zy.mean", oh, false),
          nn::linear(w, "prior_zy.logvar", oh, false)};
}

GaussVar HduvaModel::prior_zd_graph(nn::Workspace& w, const Var& s) {
  const bool bias = cfg_.backbone == Backbone::conv_small;
  return {nn::linear(w, "prior_zd.mean", s, bias),
          nn::linear(w, "prior_zd.logvar", s, bias)};
}

Var HduvaModel::decode_graph(nn::Workspace& w, const Var& dec_in) {
  if (cfg_.backbone == Backbone::linear) {
    Var flat = nn::linear(w, "dec.lin", dec_in, false);
    return ag::reshape(flat, {dec_in->val.dim(0), cfg_.channels, cfg_.height,
                              cfg_.width});
  }
  Var flat = nn::gated_dense(w, "dec.gd", dec_in);
  Var img = ag::reshape(flat, {dec_in->val.dim(0), cfg_.channels, cfg_.height,
                               cfg_.width});
  img = nn::gated_conv2d(w, "dec.gc1", img, 3, 3, 1);
  img = nn::gated_conv2d(w, "dec.gc2", img, 3, 3, 1);
  return nn::conv2d(w, "dec.proj", img, 1, 1, 0);
}

Var HduvaModel::classifier_from_zy(nn::Workspace& w, const Var& z_y) {
  const bool bias = cfg_.backbone == Backbone::conv_small;
  return ag::log_softmax_rows(nn::linear(w, "cls", ag::relu(z_y), bias));
}

HduvaModel::ForwardResult HduvaModel::elbo_forward(
    nn::Workspace& w, const Tensor& x, const std::vector<int>& labels,
    const Betas& betas, double gamma_y, SampleSource& noise, bool training,
    bool aggregate_topics) {
  check_image(x);
  if (static_cast<int>(labels.size()) != x.dim(0))
    throw argument_error("elbo_forward: label count mismatch");
  if (betas.x < 0 || betas.y < 0 || betas.d < 0 || betas.s < 0)
    throw argument_error("elbo_forward: beta values must be >= 0");
  const int B = x.dim(0);
  const int K = cfg_.topic_dim;
  const int S = cfg_.topic_samples;
  const double invB = 1.0 / static_cast<double>(B);

  Var xv = ag::constant(x);
  const Tensor prior_alpha = Tensor::full({K}, 1.0);

  // zx path
  Var kl_zx_term;
  Var zx;
  if (cfg_.with_zx) {
    GaussVar q_zx = gauss_heads(w, "enc_zx", trunk(w, "enc_zx.trunk", xv, training).flat);
    zx = dist::gauss_reparam_var(q_zx.mean, q_zx.logvar,
                                 noise.normal("zx", {B, cfg_.zx_dim}));
    Var zeros = ag::constant(Tensor({B, cfg_.zx_dim}));
    kl_zx_term = ag::scale(
        ag::sum_all(dist::gauss_kl_elem(q_zx.mean, q_zx.logvar, zeros, zeros)),
        invB);
  }

  // zy path
  GaussVar q_zy = gauss_heads(w, "enc_zy", trunk(w, "enc_zy.trunk", xv, training).flat);
  Var zy = dist::gauss_reparam_var(q_zy.mean, q_zy.logvar,
                                   noise.normal("zy", {B, cfg_.zy_dim}));
  GaussVar p_zy = prior_zy_graph(w, labels);
  Var kl_zy_term = ag::scale(
      ag::sum_all(dist::gauss_kl_elem(q_zy.mean, q_zy.logvar, p_zy.mean,
                                      p_zy.logvar)),
      invB);
  Var aux_term = ag::mean_all(ag::pick_cols(classifier_from_zy(w, zy), labels));

  // d / s path, averaged over S topic samples
  Var recon_acc, zdlr_acc, kls_acc;
  Var zd_last, conc_out;
  auto add_to = [](Var& acc, const Var& v) {
    acc = acc ? ag::add(acc, v) : v;
  };

  if (cfg_.variant != Variant::lhduva) {
    Var trunk_s = trunk(w, "enc_s.trunk", xv, training).flat;
    Var conc = topic_conc_from(w, trunk_s);
    Var trunk_zd = trunk(w, "enc_zd.trunk", xv, training).flat;
    Var agg;
    if (aggregate_topics) agg = weak::aggregate_concentration_var(conc);
    const Var kl_src = aggregate_topics ? agg : conc;
    Var kls = ag::mean_all(dist::kl_dirichlet_var(kl_src, prior_alpha));
    conc_out = aggregate_topics ? agg : conc;
    for (int si = 0; si < S; ++si) {
      const std::string tag = "s" + std::to_string(si);
      Var s;
      if (aggregate_topics) {
        Var s1 = dist::dirichlet_from_gammas_var(agg, noise.gammas(tag, agg->val));
        s = ag::broadcast_rows(s1, B);
      } else {
        s = dist::dirichlet_from_gammas_var(conc, noise.gammas(tag, conc->val));
      }
      GaussVar q_zd = gauss_heads(w, "enc_zd", ag::concat_cols({trunk_zd, s}));
      Var zd = dist::gauss_reparam_var(
          q_zd.mean, q_zd.logvar,
          noise.normal("zd" + std::to_string(si), {B, cfg_.zd_dim}));
      GaussVar p_zd = prior_zd_graph(w, s);
      Var zdlr = ag::scale(
          ag::sub(ag::sum_all(dist::gauss_logpdf_elem(q_zd.mean, q_zd.logvar, zd)),
                  ag::sum_all(dist::gauss_logpdf_elem(p_zd.mean, p_zd.logvar, zd))),
          invB);
      std::vector<Var> dec_parts;
      if (cfg_.decoder_uses_s) dec_parts.push_back(s);
      dec_parts.push_back(zd);
      if (cfg_.with_zx) dec_parts.push_back(zx);
      dec_parts.push_back(zy);
      Var logits = decode_graph(w, ag::concat_cols(dec_parts));
      Var recon = ag::scale(bernoulli_loglik_sum(x, logits), invB);
      add_to(recon_acc, recon);
      add_to(zdlr_acc, zdlr);
      add_to(kls_acc, kls);
      zd_last = zd;
    }
  } else {
    GaussVar q_zd = gauss_heads(w, "enc_zd", trunk(w, "enc_zd.trunk", xv, training).flat);
    for (int si = 0; si < S; ++si) {
      Var zd_raw = dist::gauss_reparam_var(
          q_zd.mean, q_zd.logvar,
          noise.normal("zdr" + std::to_string(si), {B, cfg_.zd_dim}));
      Var conc = topic_conc_from(w, zd_raw);
      Var agg;
      if (aggregate_topics) agg = weak::aggregate_concentration_var(conc);
      const Var kl_src = aggregate_topics ? agg : conc;
      Var kls = ag::mean_all(dist::kl_dirichlet_var(kl_src, prior_alpha));
      const std::string tag = "s" + std::to_string(si);
      Var s;
      if (aggregate_topics) {
        Var s1 = dist::dirichlet_from_gammas_var(agg, noise.gammas(tag, agg->val));
        s = ag::broadcast_rows(s1, B);
      } else {
        s = dist::dirichlet_from_gammas_var(conc, noise.gammas(tag, conc->val));
      }
      GaussVar p_zd = prior_zd_graph(w, s);
      GaussVar q_t = dist::ladder_correct_var(q_zd, p_zd);
      Var zd = dist::gauss_reparam_var(
          q_t.mean, q_t.logvar,
          noise.normal("zd" + std::to_string(si), {B, cfg_.zd_dim}));
      Var zdlr = ag::scale(
          ag::sub(ag::sum_all(dist::gauss_logpdf_elem(q_t.mean, q_t.logvar, zd)),
                  ag::sum_all(dist::gauss_logpdf_elem(p_zd.mean, p_zd.logvar, zd))),
          invB);
      std::vector<Var> dec_parts;
      if (cfg_.decoder_uses_s) dec_parts.push_back(s);
      dec_parts.push_back(zd);
      if (cfg_.with_zx) dec_parts.push_back(zx);
      dec_parts.push_back(zy);
      Var logits = decode_graph(w, ag::concat_cols(dec_parts));
      Var recon = ag::scale(bernoulli_loglik_sum(x, logits), invB);
      add_to(recon_acc, recon);
      add_to(zdlr_acc, zdlr);
      add_to(kls_acc, kls);
      zd_last = zd;
      conc_out = kl_src;
    }
  }
  const double invS = 1.0 / static_cast<double>(S);
  Var recon_term = ag::scale(recon_acc, invS);
  Var zdlr_term = ag::scale(zdlr_acc, invS);
  Var kls_term = ag::scale(kls_acc, invS);

  // F = recon - bx*kl_zx - by*kl_zy - bd*zdlr - bs*kls + gamma_y*aux
  Var obj = recon_term;
  if (cfg_.with_zx) obj = ag::sub(obj, ag::scale(kl_zx_term, betas.x));
  obj = ag::sub(obj, ag::scale(kl_zy_term, betas.y));
  obj = ag::sub(obj, ag::scale(zdlr_term, betas.d));
  obj = ag::sub(obj, ag::scale(kls_term, betas.s));
  obj = ag::add(obj, ag::scale(aux_term, gamma_y));

  ElboBreakdown bd;
  bd.recon_loglik = ag::scalar_value(recon_term);
  bd.has_zx = cfg_.with_zx;
  bd.kl_zx = cfg_.with_zx ? ag::scalar_value(kl_zx_term) : 0.0;
  bd.kl_zy = ag::scalar_value(kl_zy_term);
  bd.zd_log_ratio = ag::scalar_value(zdlr_term);
  bd.kl_s = ag::scalar_value(kls_term);
  bd.aux_class_loglik = ag::scalar_value(aux_term);
  bd.effective_betas = betas;

  return {bd, obj, zd_last, conc_out};
}

ag::Var HduvaModel::classifier_logprobs_graph(nn::Workspace& w, const Tensor& x,
                                              bool training) {
  check_image(x);
  Var xv = ag::constant(x);
  Var feats = trunk(w, "enc_zy.trunk", xv, training).flat;
  const bool bias = cfg_.backbone == Backbone::conv_small;
  Var zy_mean = nn::linear(w, "enc_zy.mean", feats, bias);
  return classifier_from_zy(w, zy_mean);
}

Tensor HduvaModel::classify(const Tensor& x) {
  nn::Workspace w(params_);
  return ag::value(classifier_logprobs_graph(w, x, false));
}

std::vector<int> HduvaModel::predict(const Tensor& x) {
  Tensor lp = classify(x);
  std::vector<int> out(lp.dim(0));
  for (int i = 0; i < lp.dim(0); ++i) {
    int best = 0;
    for (int c = 1; c < lp.dim(1); ++c)
      if (lp.at(i, c) > lp.at(i, best)) best = c;
    out[i] = best;
  }
  return out;
}

EncoderOutputs HduvaModel::encode_eval(const Tensor& x) {
  check_image(x);
  const int B = x.dim(0);
  nn::Workspace w(params_);
  Var xv = ag::constant(x);
  EncoderOutputs out;
  if (cfg_.with_zx) {
    GaussVar q = gauss_heads(w, "enc_zx", trunk(w, "enc_zx.trunk", xv, false).flat);
    out.q_zx = dist::LatentGaussian(ag::value(q.mean), ag::value(q.logvar));
  }
  GaussVar qy = gauss_heads(w, "enc_zy", trunk(w, "enc_zy.trunk", xv, false).flat);
  out.q_zy = dist::LatentGaussian(ag::value(qy.mean), ag::value(qy.logvar));

  if (cfg_.variant != Variant::lhduva) {
    Var conc = topic_conc_from(w, trunk(w, "enc_s.trunk", xv, false).flat);
    out.q_s = dist::DirichletParams(ag::value(conc));
    // Posterior-mean topic for the conditional z_d head.
    Tensor s_mean({B, cfg_.topic_dim});
    for (int i = 0; i < B; ++i) {
      double sum = 0.0;
      for (int k = 0; k < cfg_.topic_dim; ++k) sum += conc->val.at(i, k);
      for (int k = 0; k < cfg_.topic_dim; ++k)
        s_mean.at(i, k) = conc->val.at(i, k) / sum;
    }
    Var trunk_zd = trunk(w, "enc_zd.trunk", xv, false).flat;
    GaussVar qd = gauss_heads(
        w, "enc_zd", ag::concat_cols({trunk_zd, ag::constant(s_mean)}));
    out.q_zd = dist::LatentGaussian(ag::value(qd.mean), ag::value(qd.logvar));
  } else {
    GaussVar qd = gauss_heads(w, "enc_zd", trunk(w, "enc_zd.trunk", xv, false).flat);
    out.q_zd = dist::LatentGaussian(ag::value(qd.mean), ag::value(qd.logvar));
    Var conc = topic_conc_from(w, ag::constant(ag::value(qd.mean)));
    out.q_s = dist::DirichletParams(ag::value(conc));
  }
  return out;
}

EncoderOutputs HduvaModel::encode(const Tensor& x, SampleSource& noise) {
  check_image(x);
  const int B = x.dim(0);
  nn::Workspace w(params_);
  Var xv = ag::constant(x);
  EncoderOutputs out;
  if (cfg_.with_zx) {
    GaussVar q = gauss_heads(w, "enc_zx", trunk(w, "enc_zx.trunk", xv, false).flat);
    out.q_zx = dist::LatentGaussian(ag::value(q.mean), ag::value(q.logvar));
  }
  GaussVar qy = gauss_heads(w, "enc_zy", trunk(w, "enc_zy.trunk", xv, false).flat);
  out.q_zy = dist::LatentGaussian(ag::value(qy.mean), ag::value(qy.logvar));

  if (cfg_.variant != Variant::lhduva) {
    Var conc = topic_conc_from(w, trunk(w, "enc_s.trunk", xv, false).flat);
    out.q_s = dist::DirichletParams(ag::value(conc));
    Var s = dist::dirichlet_from_gammas_var(conc, noise.gammas("s0", conc->val));
    Var trunk_zd = trunk(w, "enc_zd.trunk", xv, false).flat;
    GaussVar qd = gauss_heads(w, "enc_zd",
                              ag::concat_cols({trunk_zd, ag::constant(ag::value(s))}));
    out.q_zd = dist::LatentGaussian(ag::value(qd.mean), ag::value(qd.logvar));
  } else {
    GaussVar qd = gauss_heads(w, "enc_zd", trunk(w, "enc_zd.trunk", xv, false).flat);
    out.q_zd = dist::LatentGaussian(ag::value(qd.mean), ag::value(qd.logvar));
    Tensor zd = ag::value(dist::gauss_reparam_var(
        qd.mean, qd.logvar, noise.normal("zdr0", {B, cfg_.zd_dim})));
    Var conc = topic_conc_from(w, ag::constant(zd));
    out.q_s = dist::DirichletParams(ag::value(conc));
  }
  return out;
}

dist::LatentGaussian HduvaModel::prior_zy_eval(const std::vector<int>& labels) {
  nn::Workspace w(params_);
  GaussVar p = prior_zy_graph(w, labels);
  return dist::LatentGaussian(ag::value(p.mean), ag::value(p.logvar));
}

dist::LatentGaussian HduvaModel::prior_zd_eval(const Tensor& s) {
  if (s.ndim() != 2 || s.dim(1) != cfg_.topic_dim)
    throw argument_error("prior_zd: need simplex rows [B,K]");
  for (int i = 0; i < s.dim(0); ++i) {
    double sum = 0.0;
    for (int k = 0; k < cfg_.topic_dim; ++k) {
      if (s.at(i, k) < -1e-9 || s.at(i, k) > 1.0 + 1e-9)
        throw argument_error("prior_zd: input is not on the simplex");
      sum += s.at(i, k);
    }
    if (std::fabs(sum - 1.0) > 1e-6)
      throw argument_error("prior_zd: input is not on the simplex");
  }
  nn::Workspace w(params_);
  GaussVar p = prior_zd_graph(w, ag::constant(s));
  return dist::LatentGaussian(ag::value(p.mean), ag::value(p.logvar));
}

Tensor HduvaModel::classify_aux_eval(const Tensor& z_y) {
  if (z_y.ndim() != 2 || z_y.dim(1) != cfg_.zy_dim)
    throw argument_error("classify_aux: z_y dimension mismatch");
  nn::Workspace w(params_);
  return ag::value(classifier_from_zy(w, ag::constant(z_y)));
}

Tensor HduvaModel::decode_eval(const Tensor& s, const Tensor& z_d,
                               const Tensor& z_x, const Tensor& z_y) {
  if (z_d.ndim() != 2 || z_d.dim(1) != cfg_.zd_dim)
    throw argument_error("decode: z_d dimension mismatch");
  const int B = z_d.dim(0);
  if (cfg_.with_zx && z_x.empty())
    throw argument_error("decode: z_x required when with_zx is set");
  if (cfg_.decoder_uses_s && s.empty())
    throw argument_error("decode: s required when decoder_uses_s is set");
  std::vector<Var> parts;
  if (cfg_.decoder_uses_s) parts.push_back(ag::constant(s));
  parts.push_back(ag::constant(z_d));
  if (cfg_.with_zx) parts.push_back(ag::constant(z_x));
  parts.push_back(ag::constant(z_y));
  for (const auto& p : parts)
    if (p->val.dim(0) != B) throw argument_error("decode: latent batch mismatch");
  nn::Workspace w(params_);
  return ag::value(decode_graph(w, ag::concat_cols(parts)));
}

Tensor HduvaModel::conditional_generate(const Tensor& seed_x,
                                        const std::vector<int>& class_sweep,
                                        Rng& rng) {
  if (seed_x.ndim() != 4 || seed_x.dim(0) != 1)
    throw argument_error("conditional_generate: need a single seed image");
  for (const auto& name : params_.names())
    if (!params_.get(name).all_finite())
      throw state_error("conditional_generate: parameters contain non-finite values");
  EncoderOutputs enc = encode_eval(seed_x);
  const int n = static_cast<int>(class_sweep.size());
  const int K = cfg_.topic_dim;

  Tensor s_mean = dist::dirichlet_mean(enc.q_s);
  Tensor s_rows({n, K});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) s_rows.at(i, k) = s_mean[k];

  Tensor zd_row = enc.q_zd.mean;  // [1,Dzd] posterior mean
  if (cfg_.variant == Variant::lhduva) {
    // Ladder-corrected posterior mean given the mean topic.
    dist::LatentGaussian p = prior_zd_eval(s_mean.reshaped({1, K}));
    zd_row = dist::ladder_correct(enc.q_zd, p).mean;
  }
  Tensor zd({n, cfg_.zd_dim});
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < cfg_.zd_dim; ++d) zd.at(i, d) = zd_row[d];

  Tensor zx;
  if (cfg_.with_zx) zx = Tensor({n, cfg_.zx_dim});  // z_x set to zero

  dist::LatentGaussian p_zy = prior_zy_eval(class_sweep);  // [n,Dzy]
  Tensor eps({n, cfg_.zy_dim});
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  Tensor zy = dist::gaussian_reparam(p_zy, eps);

  Tensor logits = decode_eval(cfg_.decoder_uses_s ? s_rows : Tensor(), zd, zx,
                              zy.reshaped({n, cfg_.zy_dim}));
  Tensor imgs(logits.shape());
  for (std::size_t i = 0; i < imgs.size(); ++i)
    imgs[i] = 1.0 / (1.0 + std::exp(-logits[i]));
  return imgs;
}

Tensor HduvaModel::infer_topic_concentration(const Tensor& x) {
  return encode_eval(x).q_s.concentration;
}

}  // namespace hduva::model
