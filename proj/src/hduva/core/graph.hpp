#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hduva/core/tensor.hpp"

namespace hduva::ag {

// Reverse-mode autodiff on a dynamically built graph. Nodes hold values by
// Tensor (shared buffers), gradients are allocated during backward().
struct Node {
  Tensor val;
  Tensor grad;
  bool requires_grad = false;
  bool has_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;
};

using Var = std::shared_ptr<Node>;

Var leaf(Tensor t, bool requires_grad = true);
Var constant(Tensor t);
Var constant_scalar(double v);

// Factory for custom ops defined in other modules.
Var make_node(Tensor val, std::vector<Var> parents,
              std::function<void(Node&)> backprop);

// Adds g into v's gradient accumulator (no-op when v does not need grads).
void accumulate(const Var& v, const Tensor& g);
// Ensures grad storage exists and returns it.
Tensor& grad_buffer(const Var& v);

// Runs backward from a scalar root (seeds with 1).
void backward(const Var& root);

const Tensor& value(const Var& v);
double scalar_value(const Var& v);
Tensor grad_of(const Var& v);

// Elementwise; shapes must match.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var divide(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var relu(const Var& a);

Var matmul(const Var& a, const Var& b);     // [M,K] x [K,N]
Var matmul_nt(const Var& a, const Var& b);  // [M,K] x [N,K]^T -> [M,N]
Var bias_add(const Var& x, const Var& b);   // [B,N] + [1,N]

Var sum_all(const Var& a);   // -> [1]
Var mean_all(const Var& a);  // -> [1]
Var mean_rows(const Var& a);            // [B,N] -> [1,N]
Var broadcast_rows(const Var& a, int rows);  // [1,N] -> [rows,N]
Var slice_cols(const Var& a, int c0, int c1);
Var concat_cols(const std::vector<Var>& parts);
Var reshape(const Var& a, std::vector<int> shape);
Var log_softmax_rows(const Var& a);
// out[i,0] = x[i, idx[i]]
Var pick_cols(const Var& x, std::vector<int> idx);

}  // namespace hduva::ag
