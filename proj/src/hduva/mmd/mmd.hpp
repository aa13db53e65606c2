#pragma once

#include <vector>

#include "hduva/core/graph.hpp"
#include "hduva/core/tensor.hpp"

namespace hduva::mmd {

// Composite kernel k(x,x') = sum_j exp(-alpha_j ||x-x'||^2), so k(x,x)
// equals the number of bandwidth terms. The linear kind k(u,v) = u.v exists
// for the moment-matching identity and worked examples.
struct KernelSpec {
  enum class Kind { gaussian, linear };
  Kind kind = Kind::gaussian;
  std::vector<double> bandwidths;

  static KernelSpec gaussian(std::vector<double> alphas);
  static KernelSpec linear();
  // Multi-scale default for standardized embeddings.
  static KernelSpec default_spec() { return gaussian({0.1, 1.0, 10.0}); }
};

struct GramBlocks {
  Tensor kxx;  // M x M
  Tensor kyy;  // N x N
  Tensor kxy;  // M x N
};

double kernel_eval(const Tensor& u, const Tensor& v, const KernelSpec& spec);

// X is M x D, Y is N x D.
GramBlocks gram_blocks(const Tensor& X, const Tensor& Y, const KernelSpec& spec);

// (1/M^2) sum Kxx + (1/N^2) sum Kyy - (2/MN) sum Kxy; >= 0 up to rounding.
double mmd2_biased(const Tensor& X, const Tensor& Y, const KernelSpec& spec);

// Paired estimator dropping i = j terms with prefactor 1/(M(M-1));
// may be negative. Requires equal row counts and M >= 2.
double mmd2_unbiased_paired(const Tensor& X, const Tensor& Y,
                            const KernelSpec& spec);

// Sum of mmd2_biased over unordered domain pairs.
double pairwise_domain_mmd(const std::vector<Tensor>& embeddings_by_domain,
                           const KernelSpec& spec);

// Linear-kernel biased MMD^2, which equals ||mean(X) - mean(Y)||^2.
double moment_match_check(const Tensor& X, const Tensor& Y);

// Differentiable gaussian-kernel path used in the training penalty.
ag::Var pairwise_sqdist_var(const ag::Var& X, const ag::Var& Y);
ag::Var mmd2_biased_var(const ag::Var& X, const ag::Var& Y,
                        const KernelSpec& spec);
ag::Var pairwise_domain_mmd_var(const std::vector<ag::Var>& domains,
                                const KernelSpec& spec);

}  // namespace hduva::mmd
