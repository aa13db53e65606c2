#include "hduva/mmd/mmd.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"
#include "hduva/kernels/kernels.hpp"

namespace hduva::mmd {
namespace {

void check_matrix(const Tensor& X, const char* op) {
  if (X.ndim() != 2 || X.dim(0) < 1 || X.dim(1) < 1)
    throw argument_error(std::string(op) + ": need a nonempty matrix");
}

void check_spec(const KernelSpec& spec) {
  if (spec.kind == KernelSpec::Kind::linear) return;
  if (spec.bandwidths.empty())
    throw argument_error("KernelSpec: need at least one bandwidth");
  for (double a : spec.bandwidths)
    if (!(a > 0.0) || !std::isfinite(a))
      throw argument_error("KernelSpec: bandwidths must be positive and finite");
}

double apply_kernel(double sqdist, const KernelSpec& spec) {
  double acc = 0.0;
  for (double a : spec.bandwidths) acc += std::exp(-a * sqdist);
  return acc;
}

Tensor kernel_matrix(const Tensor& A, const Tensor& B, const KernelSpec& spec) {
  const int M = A.dim(0), N = B.dim(0), D = A.dim(1);
  Tensor out({M, N});
  if (spec.kind == KernelSpec::Kind::linear) {
    kernels::active().gemm_nt(M, N, D, A.data(), B.data(), out.data());
    return out;
  }
  kernels::active().pairwise_sqdist(M, N, D, A.data(), B.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = apply_kernel(out[i], spec);
  return out;
}

double sum_of(const Tensor& t) {
  return kernels::active().reduce_sum(static_cast<int>(t.size()), t.data());
}

double trace_of(const Tensor& t) {
  const int n = t.dim(0) < t.dim(1) ? t.dim(0) : t.dim(1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += t.at(i, i);
  return acc;
}

}  // namespace

KernelSpec KernelSpec::gaussian(std::vector<double> alphas) {
  KernelSpec s;
  s.kind = Kind::gaussian;
  s.bandwidths = std::move(alphas);
  check_spec(s);
  return s;
}

KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.kind = Kind::linear;
  return s;
}

double kernel_eval(const Tensor& u, const Tensor& v, const KernelSpec& spec) {
  if (u.size() != v.size())
    throw argument_error("kernel_eval: dimension mismatch");
  check_spec(spec);
  if (spec.kind == KernelSpec::Kind::linear)
    return kernels::active().dot(static_cast<int>(u.size()), u.data(), v.data());
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    sq += d * d;
  }
  return apply_kernel(sq, spec);
}

GramBlocks gram_blocks(const Tensor& X, const Tensor& Y, const KernelSpec& spec) {
  check_matrix(X, "gram_blocks");
  check_matrix(Y, "gram_blocks");
  if (X.dim(1) != Y.dim(1))
    throw argument_error("gram_blocks: feature dimension mismatch");
  check_spec(spec);
  return {kernel_matrix(X, X, spec), kernel_matrix(Y, Y, spec),
          kernel_matrix(X, Y, spec)};
}

double mmd2_biased(const Tensor& X, const Tensor& Y, const KernelSpec& spec) {
  GramBlocks g = gram_blocks(X, Y, spec);
  const double M = X.dim(0), N = Y.dim(0);
  return sum_of(g.kxx) / (M * M) + sum_of(g.kyy) / (N * N) -
         2.0 * sum_of(g.kxy) / (M * N);
}

double mmd2_unbiased_paired(const Tensor& X, const Tensor& Y,
                            const KernelSpec& spec) {
  check_matrix(X, "mmd2_unbiased_paired");
  check_matrix(Y, "mmd2_unbiased_paired");
  if (X.dim(0) != Y.dim(0))
    throw argument_error("mmd2_unbiased_paired: needs paired samples (equal rows)");
  if (X.dim(0) < 2)
    throw argument_error("mmd2_unbiased_paired: needs at least 2 pairs");
  GramBlocks g = gram_blocks(X, Y, spec);
  const double M = X.dim(0);
  return (sum_of(g.kxx) - trace_of(g.kxx) + sum_of(g.kyy) - trace_of(g.kyy) -
          2.0 * sum_of(g.kxy) + 2.0 * trace_of(g.kxy)) /
         (M * (M - 1.0));
}

double pairwise_domain_mmd(const std::vector<Tensor>& embeddings_by_domain,
                           const KernelSpec& spec) {
  if (embeddings_by_domain.empty())
    throw argument_error("pairwise_domain_mmd: empty domain list");
  for (const auto& e : embeddings_by_domain)
    check_matrix(e, "pairwise_domain_mmd");
  double acc = 0.0;
  for (std::size_t i = 0; i < embeddings_by_domain.size(); ++i)
    for (std::size_t j = i + 1; j < embeddings_by_domain.size(); ++j)
      acc += mmd2_biased(embeddings_by_domain[i], embeddings_by_domain[j], spec);
  return acc;
}

double moment_match_check(const Tensor& X, const Tensor& Y) {
  return mmd2_biased(X, Y, KernelSpec::linear());
}

ag::Var pairwise_sqdist_var(const ag::Var& X, const ag::Var& Y) {
  if (X->val.ndim() != 2 || Y->val.ndim() != 2 || X->val.dim(1) != Y->val.dim(1))
    throw argument_error("pairwise_sqdist_var: shape mismatch");
  const int M = X->val.dim(0), N = Y->val.dim(0), D = X->val.dim(1);
  Tensor out({M, N});
  kernels::active().pairwise_sqdist(M, N, D, X->val.data(), Y->val.data(),
                                    out.data());
  return ag::make_node(std::move(out), {X, Y}, [X, Y, M, N, D](ag::Node& self) {
    Tensor gx({M, D}), gy({N, D});
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < N; ++j) {
        const double g2 = 2.0 * self.grad.at(i, j);
        if (g2 == 0.0) continue;
        const double* xi = X->val.data() + static_cast<long>(i) * D;
        const double* yj = Y->val.data() + static_cast<long>(j) * D;
        double* gxi = gx.data() + static_cast<long>(i) * D;
        double* gyj = gy.data() + static_cast<long>(j) * D;
        for (int d = 0; d < D; ++d) {
          const double t = g2 * (xi[d] - yj[d]);
          gxi[d] += t;
          gyj[d] -= t;
        }
      }
    ag::accumulate(X, gx);
    ag::accumulate(Y, gy);
  });
}

namespace {

ag::Var composite_kernel_var(const ag::Var& sqd, std::vector<double> alphas) {
  Tensor out(sqd->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (double a : alphas) acc += std::exp(-a * sqd->val[i]);
    out[i] = acc;
  }
  return ag::make_node(std::move(out), {sqd}, [sqd, alphas](ag::Node& self) {
    Tensor g(sqd->val.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      double der = 0.0;
      for (double a : alphas) der -= a * std::exp(-a * sqd->val[i]);
      g[i] = self.grad[i] * der;
    }
    ag::accumulate(sqd, g);
  });
}

}  // namespace

ag::Var mmd2_biased_var(const ag::Var& X, const ag::Var& Y,
                        const KernelSpec& spec) {
  if (spec.kind != KernelSpec::Kind::gaussian)
    throw argument_error("mmd2_biased_var: gaussian kernel only");
  check_spec(spec);
  const double M = X->val.dim(0), N = Y->val.dim(0);
  using namespace ag;
  Var kxx = composite_kernel_var(pairwise_sqdist_var(X, X), spec.bandwidths);
  Var kyy = composite_kernel_var(pairwise_sqdist_var(Y, Y), spec.bandwidths);
  Var kxy = composite_kernel_var(pairwise_sqdist_var(X, Y), spec.bandwidths);
  return add(add(scale(sum_all(kxx), 1.0 / (M * M)),
                 scale(sum_all(kyy), 1.0 / (N * N))),
             scale(sum_all(kxy), -2.0 / (M * N)));
}

ag::Var pairwise_domain_mmd_var(const std::vector<ag::Var>& domains,
                                const KernelSpec& spec) {
  if (domains.empty())
    throw argument_error("pairwise_domain_mmd_var: empty domain list");
  ag::Var acc = ag::constant_scalar(0.0);
  for (std::size_t i = 0; i < domains.size(); ++i)
    for (std::size_t j = i + 1; j < domains.size(); ++j)
      acc = ag::add(acc, mmd2_biased_var(domains[i], domains[j], spec));
  return acc;
}

}  // namespace hduva::mmd
