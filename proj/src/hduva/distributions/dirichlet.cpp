#include "hduva/distributions/dirichlet.hpp"

#include <cmath>
#include <memory>

#include "hduva/core/errors.hpp"
#include "hduva/core/special.hpp"

namespace hduva::dist {
namespace {

void check_positive(const Tensor& conc, const char* op) {
  for (std::size_t i = 0; i < conc.size(); ++i)
    if (!(conc[i] > 0.0) || !std::isfinite(conc[i]))
      throw argument_error(std::string(op) + ": concentration must be positive and finite");
}

inline double clampc(double a) {
  return a < kConcentrationFloor ? kConcentrationFloor : a;
}

// dg/dalpha for a Gamma(alpha, 1) draw g, holding the uniform path fixed.
inline double implicit_gamma_grad(double alpha, double g) {
  const double pdf = std::exp(gamma_logpdf(alpha, g));
  if (pdf < 1e-280) return 0.0;
  double d = -gamma_p_da(alpha, g) / pdf;
  // Far-tail draws make the ratio explode; cap to keep averages usable.
  if (d > 1e8) d = 1e8;
  if (d < -1e8) d = -1e8;
  return d;
}

double kl_dirichlet_row(const double* q, const double* p, int K) {
  double qa = 0.0, pa = 0.0;
  for (int k = 0; k < K; ++k) {
    qa += q[k];
    pa += p[k];
  }
  double acc = std::lgamma(qa) - std::lgamma(pa);
  const double dg_qa = digamma(qa);
  for (int k = 0; k < K; ++k) {
    acc += std::lgamma(p[k]) - std::lgamma(q[k]);
    acc += (q[k] - p[k]) * (digamma(q[k]) - dg_qa);
  }
  return acc;
}

}  // namespace

DirichletParams::DirichletParams(Tensor c) : concentration(std::move(c)) {
  if (concentration.size() == 0)
    throw argument_error("DirichletParams: empty concentration");
  check_positive(concentration, "DirichletParams");
}

SimplexPoint::SimplexPoint(Tensor w) : weights(std::move(w)) {
  if (weights.size() == 0) throw argument_error("SimplexPoint: empty weights");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < -1e-9 || weights[i] > 1.0 + 1e-9)
      throw argument_error("SimplexPoint: weight outside [0,1]");
    sum += weights[i];
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw argument_error("SimplexPoint: weights do not sum to 1");
}

Tensor draw_gammas(const Tensor& conc, Rng& rng) {
  Tensor g(conc.shape());
  for (std::size_t i = 0; i < conc.size(); ++i)
    g[i] = rng.gamma(clampc(conc[i]));
  return g;
}

SimplexPoint dirichlet_sample(const DirichletParams& params, Rng& rng) {
  check_positive(params.concentration, "dirichlet_sample");
  Tensor g = draw_gammas(params.concentration, rng);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += g[i];
  Tensor w(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = g[i] / sum;
  return SimplexPoint(std::move(w));
}

double kl_dirichlet(const DirichletParams& q, const DirichletParams& p) {
  if (q.dim() != p.dim()) throw argument_error("kl_dirichlet: dimension mismatch");
  check_positive(q.concentration, "kl_dirichlet");
  check_positive(p.concentration, "kl_dirichlet");
  return kl_dirichlet_row(q.concentration.data(), p.concentration.data(),
                          q.dim());
}

Tensor dirichlet_mean(const DirichletParams& params) {
  double sum = 0.0;
  for (std::size_t i = 0; i < params.concentration.size(); ++i)
    sum += params.concentration[i];
  Tensor out(params.concentration.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = params.concentration[i] / sum;
  return out;
}

ag::Var dirichlet_from_gammas_var(const ag::Var& conc, const Tensor& gammas) {
  if (!conc->val.same_shape(gammas))
    throw argument_error("dirichlet_from_gammas_var: shape mismatch");
  if (conc->val.ndim() != 2)
    throw argument_error("dirichlet_from_gammas_var: need [B,K]");
  const int B = conc->val.dim(0), K = conc->val.dim(1);
  auto g = std::make_shared<Tensor>(gammas.clone());
  auto rowsum = std::make_shared<Tensor>(std::vector<int>{B});
  Tensor s({B, K});
  for (int i = 0; i < B; ++i) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += g->at(i, k);
    (*rowsum)[i] = sum;
    for (int k = 0; k < K; ++k) s.at(i, k) = g->at(i, k) / sum;
  }
  return ag::make_node(std::move(s), {conc}, [conc, g, rowsum, B, K](ag::Node& self) {
    Tensor grad({B, K});
    for (int i = 0; i < B; ++i) {
      const double T = (*rowsum)[i];
      double dot = 0.0;
      for (int k = 0; k < K; ++k) dot += self.grad.at(i, k) * g->at(i, k);
      for (int k = 0; k < K; ++k) {
        const double dgd = implicit_gamma_grad(clampc(conc->val.at(i, k)),
                                               g->at(i, k));
        grad.at(i, k) = dgd * (self.grad.at(i, k) * T - dot) / (T * T);
      }
    }
    ag::accumulate(conc, grad);
  });
}

ag::Var dirichlet_sample_var(const ag::Var& conc, Rng& rng) {
  check_positive(conc->val, "dirichlet_sample_var");
  return dirichlet_from_gammas_var(conc, draw_gammas(conc->val, rng));
}

ag::Var kl_dirichlet_var(const ag::Var& q_conc, const Tensor& p_conc) {
  if (q_conc->val.ndim() != 2 ||
      q_conc->val.dim(1) != static_cast<int>(p_conc.size()))
    throw argument_error("kl_dirichlet_var: shape mismatch");
  check_positive(p_conc, "kl_dirichlet_var");
  const int B = q_conc->val.dim(0), K = q_conc->val.dim(1);
  Tensor out({B, 1});
  for (int i = 0; i < B; ++i)
    out[i] = kl_dirichlet_row(q_conc->val.data() + static_cast<long>(i) * K,
                              p_conc.data(), K);
  return ag::make_node(std::move(out), {q_conc}, [q_conc, p_conc, B, K](ag::Node& self) {
    Tensor g({B, K});
    for (int i = 0; i < B; ++i) {
      const double* q = q_conc->val.data() + static_cast<long>(i) * K;
      double qa = 0.0, diff_sum = 0.0;
      for (int k = 0; k < K; ++k) {
        qa += q[k];
        diff_sum += q[k] - p_conc[k];
      }
      const double tg_qa = trigamma(qa);
      for (int k = 0; k < K; ++k)
        g.at(i, k) = self.grad[i] *
                     ((q[k] - p_conc[k]) * trigamma(q[k]) - tg_qa * diff_sum);
    }
    ag::accumulate(q_conc, g);
  });
}

}  // namespace hduva::dist
