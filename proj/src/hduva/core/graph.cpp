#include "hduva/core/graph.hpp"

#include <cmath>
#include <unordered_set>

#include "hduva/core/errors.hpp"
#include "hduva/kernels/kernels.hpp"

namespace hduva::ag {
namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a->val.same_shape(b->val))
    throw argument_error(std::string(op) + ": shape mismatch");
}

bool any_grad(const std::vector<Var>& parents) {
  for (const auto& p : parents)
    if (p->requires_grad) return true;
  return false;
}

// Elementwise unary op helper; dfun maps (x, y) -> dy/dx.
Var unary(const Var& a, double (*fun)(double), double (*dfun)(double, double)) {
  Tensor out(a->val.shape());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = fun(a->val[i]);
  Var node = make_node(std::move(out), {a}, nullptr);
  if (node->requires_grad) {
    node->backprop = [a, dfun](Node& self) {
      Tensor g(a->val.shape());
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = self.grad[i] * dfun(a->val[i], self.val[i]);
      accumulate(a, g);
    };
  }
  return node;
}

}  // namespace

Var leaf(Tensor t, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->val = std::move(t);
  n->requires_grad = requires_grad;
  return n;
}

Var constant(Tensor t) { return leaf(std::move(t), false); }

Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

Var make_node(Tensor val, std::vector<Var> parents,
              std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->requires_grad = any_grad(parents);
  n->parents = std::move(parents);
  if (n->requires_grad) n->backprop = std::move(backprop);
  return n;
}

void accumulate(const Var& v, const Tensor& g) {
  if (!v->requires_grad) return;
  Tensor& buf = grad_buffer(v);
  const std::size_t n = buf.size();
  for (std::size_t i = 0; i < n; ++i) buf[i] += g[i];
}

Tensor& grad_buffer(const Var& v) {
  if (!v->has_grad) {
    v->grad = Tensor(v->val.shape());
    v->has_grad = true;
  }
  return v->grad;
}

void backward(const Var& root) {
  if (root->val.size() != 1)
    throw argument_error("backward: root must be a scalar");
  // Iterative post-order DFS.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Var, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Var next = node->parents[idx++];
      if (next->requires_grad && seen.insert(next.get()).second)
        stack.emplace_back(std::move(next), 0);
    } else {
      order.push_back(node.get());
      stack.pop_back();
    }
  }
  grad_buffer(root)[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->has_grad) n->backprop(*n);
  }
}

const Tensor& value(const Var& v) { return v->val; }

double scalar_value(const Var& v) {
  if (v->val.size() != 1) throw argument_error("scalar_value: not a scalar");
  return v->val[0];
}

Tensor grad_of(const Var& v) {
  if (v->has_grad) return v->grad;
  return Tensor(v->val.shape());
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out(a->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] + b->val[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    accumulate(a, self.grad);
    accumulate(b, self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out(a->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] - b->val[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    accumulate(a, self.grad);
    if (b->requires_grad) {
      Tensor g(b->val.shape());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = -self.grad[i];
      accumulate(b, g);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out(a->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] * b->val[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      Tensor g(a->val.shape());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * b->val[i];
      accumulate(a, g);
    }
    if (b->requires_grad) {
      Tensor g(b->val.shape());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * a->val[i];
      accumulate(b, g);
    }
  });
}

Var divide(const Var& a, const Var& b) {
  check_same_shape(a, b, "divide");
  Tensor out(a->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] / b->val[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      Tensor g(a->val.shape());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] / b->val[i];
      accumulate(a, g);
    }
    if (b->requires_grad) {
      Tensor g(b->val.shape());
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = -self.grad[i] * a->val[i] / (b->val[i] * b->val[i]);
      accumulate(b, g);
    }
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
  Tensor out(a->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a->val[i];
  return make_node(std::move(out), {a}, [a, c](Node& self) {
    Tensor g(a->val.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = c * self.grad[i];
    accumulate(a, g);
  });
}

Var add_scalar(const Var& a, double c) {
  Tensor out(a->val.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->val[i] + c;
  return make_node(std::move(out), {a},
                   [a](Node& self) { accumulate(a, self.grad); });
}

Var exp(const Var& a) {
  return unary(
      a, +[](double x) { return std::exp(x); },
      +[](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary(
      a, +[](double x) { return std::log(x); },
      +[](double x, double) { return 1.0 / x; });
}

Var sigmoid(const Var& a) {
  return unary(
      a,
      +[](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                        : std::exp(x) / (1.0 + std::exp(x));
      },
      +[](double, double y) { return y * (1.0 - y); });
}

Var softplus(const Var& a) {
  return unary(
      a,
      +[](double x) {
        // log(1 + e^x), stable on both tails
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      },
      +[](double x, double) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                        : std::exp(x) / (1.0 + std::exp(x));
      });
}

Var relu(const Var& a) {
  return unary(
      a, +[](double x) { return x > 0.0 ? x : 0.0; },
      +[](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var matmul(const Var& a, const Var& b) {
  if (a->val.ndim() != 2 || b->val.ndim() != 2 || a->val.dim(1) != b->val.dim(0))
    throw argument_error("matmul: incompatible shapes");
  const int M = a->val.dim(0), K = a->val.dim(1), N = b->val.dim(1);
  Tensor out({M, N});
  kernels::active().gemm_nn(M, N, K, a->val.data(), b->val.data(), out.data());
  return make_node(std::move(out), {a, b}, [a, b, M, K, N](Node& self) {
    if (a->requires_grad) {
      Tensor& ga = grad_buffer(a);
      kernels::active().gemm_nt(M, K, N, self.grad.data(), b->val.data(),
                                ga.data());
    }
    if (b->requires_grad) {
      Tensor& gb = grad_buffer(b);
      kernels::active().gemm_tn(K, N, M, a->val.data(), self.grad.data(),
                                gb.data());
    }
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a->val.ndim() != 2 || b->val.ndim() != 2 || a->val.dim(1) != b->val.dim(1))
    throw argument_error("matmul_nt: incompatible shapes");
  const int M = a->val.dim(0), K = a->val.dim(1), N = b->val.dim(0);
  Tensor out({M, N});
  kernels::active().gemm_nt(M, N, K, a->val.data(), b->val.data(), out.data());
  return make_node(std::move(out), {a, b}, [a, b, M, K, N](Node& self) {
    if (a->requires_grad) {
      Tensor& ga = grad_buffer(a);
      kernels::active().gemm_nn(M, K, N, self.grad.data(), b->val.data(),
                                ga.data());
    }
    if (b->requires_grad) {
      Tensor& gb = grad_buffer(b);
      kernels::active().gemm_tn(N, K, M, self.grad.data(), a->val.data(),
                                gb.data());
    }
  });
}

Var bias_add(const Var& x, const Var& b) {
  if (x->val.ndim() != 2 || b->val.size() != static_cast<std::size_t>(x->val.dim(1)))
    throw argument_error("bias_add: incompatible shapes");
  const int B = x->val.dim(0), N = x->val.dim(1);
  Tensor out({B, N});
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < N; ++j) out.at(i, j) = x->val.at(i, j) + b->val[j];
  return make_node(std::move(out), {x, b}, [x, b, B, N](Node& self) {
    accumulate(x, self.grad);
    if (b->requires_grad) {
      Tensor g(b->val.shape());
      for (int i = 0; i < B; ++i)
        for (int j = 0; j < N; ++j) g[j] += self.grad.at(i, j);
      accumulate(b, g);
    }
  });
}

Var sum_all(const Var& a) {
  Tensor out({1});
  out[0] = kernels::active().reduce_sum(static_cast<int>(a->val.size()),
                                        a->val.data());
  return make_node(std::move(out), {a}, [a](Node& self) {
    Tensor g(a->val.shape());
    g.fill(self.grad[0]);
    accumulate(a, g);
  });
}

Var mean_all(const Var& a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(a->val.size()));
}

Var mean_rows(const Var& a) {
  if (a->val.ndim() != 2) throw argument_error("mean_rows: need 2-D input");
  const int B = a->val.dim(0), N = a->val.dim(1);
  Tensor out({1, N});
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < N; ++j) out[j] += a->val.at(i, j);
  for (int j = 0; j < N; ++j) out[j] /= B;
  return make_node(std::move(out), {a}, [a, B, N](Node& self) {
    Tensor g(a->val.shape());
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < N; ++j) g.at(i, j) = self.grad[j] / B;
    accumulate(a, g);
  });
}

Var broadcast_rows(const Var& a, int rows) {
  if (a->val.ndim() != 2 || a->val.dim(0) != 1)
    throw argument_error("broadcast_rows: need [1,N] input");
  const int N = a->val.dim(1);
  Tensor out({rows, N});
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < N; ++j) out.at(i, j) = a->val[j];
  return make_node(std::move(out), {a}, [a, rows, N](Node& self) {
    Tensor g({1, N});
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < N; ++j) g[j] += self.grad.at(i, j);
    accumulate(a, g);
  });
}

Var slice_cols(const Var& a, int c0, int c1) {
  if (a->val.ndim() != 2 || c0 < 0 || c1 > a->val.dim(1) || c0 >= c1)
    throw argument_error("slice_cols: bad range");
  const int B = a->val.dim(0), N = a->val.dim(1), W = c1 - c0;
  Tensor out({B, W});
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < W; ++j) out.at(i, j) = a->val.at(i, c0 + j);
  return make_node(std::move(out), {a}, [a, B, N, W, c0](Node& self) {
    Tensor g({B, N});
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < W; ++j) g.at(i, c0 + j) = self.grad.at(i, j);
    accumulate(a, g);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw argument_error("concat_cols: empty input");
  const int B = parts[0]->val.dim(0);
  int N = 0;
  for (const auto& p : parts) {
    if (p->val.ndim() != 2 || p->val.dim(0) != B)
      throw argument_error("concat_cols: row mismatch");
    N += p->val.dim(1);
  }
  Tensor out({B, N});
  int off = 0;
  for (const auto& p : parts) {
    const int w = p->val.dim(1);
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < w; ++j) out.at(i, off + j) = p->val.at(i, j);
    off += w;
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return make_node(std::move(out), std::move(parents), [parts, B](Node& self) {
    int off2 = 0;
    for (const auto& p : parts) {
      const int w = p->val.dim(1);
      if (p->requires_grad) {
        Tensor g({B, w});
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < w; ++j) g.at(i, j) = self.grad.at(i, off2 + j);
        accumulate(p, g);
      }
      off2 += w;
    }
  });
}

Var reshape(const Var& a, std::vector<int> shape) {
  Tensor out = a->val.reshaped(shape);
  return make_node(std::move(out), {a}, [a](Node& self) {
    accumulate(a, self.grad.reshaped(a->val.shape()));
  });
}

Var log_softmax_rows(const Var& a) {
  if (a->val.ndim() != 2) throw argument_error("log_softmax_rows: need 2-D");
  const int B = a->val.dim(0), N = a->val.dim(1);
  Tensor out({B, N});
  for (int i = 0; i < B; ++i) {
    double mx = a->val.at(i, 0);
    for (int j = 1; j < N; ++j) mx = std::max(mx, a->val.at(i, j));
    double lse = 0.0;
    for (int j = 0; j < N; ++j) lse += std::exp(a->val.at(i, j) - mx);
    lse = mx + std::log(lse);
    for (int j = 0; j < N; ++j) out.at(i, j) = a->val.at(i, j) - lse;
  }
  return make_node(std::move(out), {a}, [a, B, N](Node& self) {
    Tensor g({B, N});
    for (int i = 0; i < B; ++i) {
      double gsum = 0.0;
      for (int j = 0; j < N; ++j) gsum += self.grad.at(i, j);
      for (int j = 0; j < N; ++j)
        g.at(i, j) = self.grad.at(i, j) - std::exp(self.val.at(i, j)) * gsum;
    }
    accumulate(a, g);
  });
}

Var pick_cols(const Var& x, std::vector<int> idx) {
  if (x->val.ndim() != 2 || static_cast<int>(idx.size()) != x->val.dim(0))
    throw argument_error("pick_cols: index count must equal row count");
  const int B = x->val.dim(0), N = x->val.dim(1);
  for (int i : idx)
    if (i < 0 || i >= N) throw argument_error("pick_cols: index out of range");
  Tensor out({B, 1});
  for (int i = 0; i < B; ++i) out[i] = x->val.at(i, idx[i]);
  return make_node(std::move(out), {x}, [x, idx, B, N](Node& self) {
    Tensor g({B, N});
    for (int i = 0; i < B; ++i) g.at(i, idx[i]) = self.grad[i];
    accumulate(x, g);
  });
}

}  // namespace hduva::ag
