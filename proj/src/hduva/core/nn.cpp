#include "hduva/core/nn.hpp"

#include <cmath>
#include <memory>

#include "hduva/core/errors.hpp"
#include "hduva/kernels/kernels.hpp"

namespace hduva::nn {

using ag::Var;

Tensor& ParamStore::create(const std::string& name, std::vector<int> shape,
                           bool trainable) {
  if (map_.count(name)) throw state_error("param already exists: " + name);
  order_.push_back(name);
  trainable_[name] = trainable;
  return map_.emplace(name, Tensor(std::move(shape))).first->second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = map_.find(name);
  if (it == map_.end()) throw state_error("unknown param: " + name);
  return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = map_.find(name);
  if (it == map_.end()) throw state_error("unknown param: " + name);
  return it->second;
}

bool ParamStore::trainable(const std::string& name) const {
  auto it = trainable_.find(name);
  if (it == trainable_.end()) throw state_error("unknown param: " + name);
  return it->second;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& name : order_) n += map_.at(name).size();
  return n;
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  out.order_ = order_;
  out.trainable_ = trainable_;
  for (const auto& name : order_) out.map_.emplace(name, map_.at(name).clone());
  return out;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  for (const auto& name : order_) {
    Tensor& dst = map_.at(name);
    const Tensor& src = other.map_.at(name);
    if (!dst.same_shape(src)) throw state_error("param shape mismatch: " + name);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i];
  }
}

std::uint64_t ParamStore::checksum() const {
  // FNV-1a over the raw little-endian bytes, in registration order.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& name : order_) {
    mix(name.data(), name.size());
    const Tensor& t = map_.at(name);
    mix(t.data(), t.size() * sizeof(double));
  }
  return h;
}

Var Workspace::operator()(const std::string& name) {
  auto it = leaves_.find(name);
  if (it != leaves_.end()) return it->second;
  Var v = ag::leaf(store_->get(name), store_->trainable(name));
  leaves_.emplace(name, v);
  return v;
}

Tensor Workspace::grad(const std::string& name) const {
  auto it = leaves_.find(name);
  if (it == leaves_.end()) return Tensor(store_->get(name).shape());
  return ag::grad_of(it->second);
}

namespace {

void fill_kaiming(Tensor& t, Rng& rng, int fan_in) {
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std * rng.normal();
}

// cols[(ic*KH+ky)*KW+kx, b*S + oy*OW + ox], stride 1.
void im2col(const Tensor& x, int kh, int kw, int pad, Tensor& cols) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int OH = H + 2 * pad - kh + 1, OW = W + 2 * pad - kw + 1;
  const int S = OH * OW, BS = B * S;
  const double* xp = x.data();
  double* cp = cols.data();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        double* row = cp + (static_cast<long>((c * kh + ky) * kw + kx)) * BS;
        for (int b = 0; b < B; ++b) {
          const double* xb = xp + (static_cast<long>(b) * C + c) * H * W;
          double* rb = row + static_cast<long>(b) * S;
          for (int oy = 0; oy < OH; ++oy) {
            const int iy = oy + ky - pad;
            double* ro = rb + static_cast<long>(oy) * OW;
            if (iy < 0 || iy >= H) {
              for (int ox = 0; ox < OW; ++ox) ro[ox] = 0.0;
              continue;
            }
            const double* xr = xb + static_cast<long>(iy) * W;
            for (int ox = 0; ox < OW; ++ox) {
              const int ix = ox + kx - pad;
              ro[ox] = (ix < 0 || ix >= W) ? 0.0 : xr[ix];
            }
          }
        }
      }
}

void col2im_add(const Tensor& cols, int kh, int kw, int pad, Tensor& dx) {
  const int B = dx.dim(0), C = dx.dim(1), H = dx.dim(2), W = dx.dim(3);
  const int OH = H + 2 * pad - kh + 1, OW = W + 2 * pad - kw + 1;
  const int S = OH * OW, BS = B * S;
  const double* cp = cols.data();
  double* xp = dx.data();
  // channels write disjoint planes; (ky,kx) stay serial within a channel
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const double* row = cp + (static_cast<long>((c * kh + ky) * kw + kx)) * BS;
        for (int b = 0; b < B; ++b) {
          double* xb = xp + (static_cast<long>(b) * C + c) * H * W;
          const double* rb = row + static_cast<long>(b) * S;
          for (int oy = 0; oy < OH; ++oy) {
            const int iy = oy + ky - pad;
            if (iy < 0 || iy >= H) continue;
            const double* ro = rb + static_cast<long>(oy) * OW;
            double* xr = xb + static_cast<long>(iy) * W;
            for (int ox = 0; ox < OW; ++ox) {
              const int ix = ox + kx - pad;
              if (ix >= 0 && ix < W) xr[ix] += ro[ox];
            }
          }
        }
      }
}

}  // namespace

void init_linear(ParamStore& ps, Rng& rng, const std::string& prefix, int in,
                 int out, bool bias) {
  Tensor& w = ps.create(prefix + ".w", {out, in});
  fill_kaiming(w, rng, in);
  if (bias) ps.create(prefix + ".b", {1, out});
}

Var linear(Workspace& w, const std::string& prefix, const Var& x, bool bias) {
  Var out = ag::matmul_nt(x, w(prefix + ".w"));
  if (bias) out = ag::bias_add(out, w(prefix + ".b"));
  return out;
}

void init_conv2d(ParamStore& ps, Rng& rng, const std::string& prefix, int ic,
                 int oc, int kh, int kw) {
  Tensor& wt = ps.create(prefix + ".w", {oc, ic * kh * kw});
  fill_kaiming(wt, rng, ic * kh * kw);
  ps.create(prefix + ".b", {oc});
}

Var conv2d(Workspace& w, const std::string& prefix, const Var& x, int kh,
           int kw, int pad) {
  if (x->val.ndim() != 4) throw argument_error("conv2d: need [B,C,H,W] input");
  Var wv = w(prefix + ".w");
  Var bv = w(prefix + ".b");
  const int B = x->val.dim(0), C = x->val.dim(1), H = x->val.dim(2),
            W = x->val.dim(3);
  const int OC = wv->val.dim(0), KK = wv->val.dim(1);
  if (KK != C * kh * kw) throw argument_error("conv2d: weight/input mismatch");
  const int OH = H + 2 * pad - kh + 1, OW = W + 2 * pad - kw + 1;
  const int S = OH * OW, BS = B * S;

  auto cols = std::make_shared<Tensor>(std::vector<int>{KK, BS});
  im2col(x->val, kh, kw, pad, *cols);
  Tensor out2d({OC, BS});
  kernels::active().gemm_nn(OC, BS, KK, wv->val.data(), cols->data(),
                            out2d.data());
  Tensor out({B, OC, OH, OW});
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < OC; ++oc) {
    const double* src = out2d.data() + static_cast<long>(oc) * BS;
    const double bias = bv->val[oc];
    for (int b = 0; b < B; ++b) {
      double* dst = out.data() + ((static_cast<long>(b) * OC + oc)) * S;
      const double* sb = src + static_cast<long>(b) * S;
      for (int i = 0; i < S; ++i) dst[i] = sb[i] + bias;
    }
  }

  return ag::make_node(
      std::move(out), {x, wv, bv},
      [x, wv, bv, cols, B, OC, KK, S, BS, kh, kw, pad](ag::Node& self) {
        Tensor g2d({OC, BS});
#pragma omp parallel for schedule(static)
        for (int oc = 0; oc < OC; ++oc) {
          double* dst = g2d.data() + static_cast<long>(oc) * BS;
          for (int b = 0; b < B; ++b) {
            const double* src =
                self.grad.data() + ((static_cast<long>(b) * OC + oc)) * S;
            double* db = dst + static_cast<long>(b) * S;
            for (int i = 0; i < S; ++i) db[i] = src[i];
          }
        }
        if (bv->requires_grad) {
          Tensor gb({OC});
          for (int oc = 0; oc < OC; ++oc)
            gb[oc] = kernels::active().reduce_sum(
                BS, g2d.data() + static_cast<long>(oc) * BS);
          ag::accumulate(bv, gb);
        }
        if (wv->requires_grad) {
          Tensor& gw = ag::grad_buffer(wv);
          kernels::active().gemm_nt(OC, KK, BS, g2d.data(), cols->data(),
                                    gw.data());
        }
        if (x->requires_grad) {
          Tensor dcols({KK, BS});
          kernels::active().gemm_tn(KK, BS, OC, wv->val.data(), g2d.data(),
                                    dcols.data());
          Tensor& gx = ag::grad_buffer(x);
          col2im_add(dcols, kh, kw, pad, gx);
        }
      });
}

void init_batchnorm2d(ParamStore& ps, const std::string& prefix, int channels) {
  ps.create(prefix + ".gamma", {channels}).fill(1.0);
  ps.create(prefix + ".beta", {channels});
  ps.create(prefix + ".running_mean", {channels}, /*trainable=*/false);
  ps.create(prefix + ".running_var", {channels}, /*trainable=*/false).fill(1.0);
}

Var batchnorm2d(Workspace& w, const std::string& prefix, const Var& x,
                bool training) {
  if (x->val.ndim() != 4) throw argument_error("batchnorm2d: need [B,C,H,W]");
  const double eps = 1e-5;
  const double momentum = 0.1;
  Var gv = w(prefix + ".gamma");
  Var bv = w(prefix + ".beta");
  Tensor& rmean = w.store().get(prefix + ".running_mean");
  Tensor& rvar = w.store().get(prefix + ".running_var");
  const int B = x->val.dim(0), C = x->val.dim(1), H = x->val.dim(2),
            W = x->val.dim(3);
  const long S = static_cast<long>(H) * W;
  const long N = static_cast<long>(B) * S;

  Tensor mean({C}), var({C});
  if (training) {
    for (int c = 0; c < C; ++c) {
      double m = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* p = x->val.data() + (static_cast<long>(b) * C + c) * S;
        for (long i = 0; i < S; ++i) m += p[i];
      }
      m /= static_cast<double>(N);
      double v = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* p = x->val.data() + (static_cast<long>(b) * C + c) * S;
        for (long i = 0; i < S; ++i) v += (p[i] - m) * (p[i] - m);
      }
      v /= static_cast<double>(N);
      mean[c] = m;
      var[c] = v;
      rmean[c] = (1.0 - momentum) * rmean[c] + momentum * m;
      rvar[c] = (1.0 - momentum) * rvar[c] + momentum * v;
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = rmean[c];
      var[c] = rvar[c];
    }
  }

  auto xhat = std::make_shared<Tensor>(x->val.shape());
  Tensor invstd({C});
  for (int c = 0; c < C; ++c) invstd[c] = 1.0 / std::sqrt(var[c] + eps);
  Tensor out(x->val.shape());
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const double* p = x->val.data() + (static_cast<long>(b) * C + c) * S;
      double* xh = xhat->data() + (static_cast<long>(b) * C + c) * S;
      double* o = out.data() + (static_cast<long>(b) * C + c) * S;
      const double g = gv->val[c], be = bv->val[c], is = invstd[c], m = mean[c];
      for (long i = 0; i < S; ++i) {
        xh[i] = (p[i] - m) * is;
        o[i] = g * xh[i] + be;
      }
    }

  return ag::make_node(
      std::move(out), {x, gv, bv},
      [x, gv, bv, xhat, invstd, B, C, S, N, training](ag::Node& self) {
        Tensor dgamma({C}), dbeta({C});
        for (int b = 0; b < B; ++b)
          for (int c = 0; c < C; ++c) {
            const double* gr =
                self.grad.data() + (static_cast<long>(b) * C + c) * S;
            const double* xh = xhat->data() + (static_cast<long>(b) * C + c) * S;
            double sg = 0.0, sb = 0.0;
            for (long i = 0; i < S; ++i) {
              sg += gr[i] * xh[i];
              sb += gr[i];
            }
            dgamma[c] += sg;
            dbeta[c] += sb;
          }
        ag::accumulate(gv, dgamma);
        ag::accumulate(bv, dbeta);
        if (!x->requires_grad) return;
        Tensor gx(x->val.shape());
        for (int b = 0; b < B; ++b)
          for (int c = 0; c < C; ++c) {
            const double* gr =
                self.grad.data() + (static_cast<long>(b) * C + c) * S;
            const double* xh = xhat->data() + (static_cast<long>(b) * C + c) * S;
            double* d = gx.data() + (static_cast<long>(b) * C + c) * S;
            const double scale = gv->val[c] * invstd[c];
            if (training) {
              const double mg = dbeta[c] / static_cast<double>(N);
              const double mgx = dgamma[c] / static_cast<double>(N);
              for (long i = 0; i < S; ++i)
                d[i] = scale * (gr[i] - mg - xh[i] * mgx);
            } else {
              for (long i = 0; i < S; ++i) d[i] = scale * gr[i];
            }
          }
        ag::accumulate(x, gx);
      });
}

Var maxpool2d(const Var& x) {
  if (x->val.ndim() != 4) throw argument_error("maxpool2d: need [B,C,H,W]");
  const int B = x->val.dim(0), C = x->val.dim(1), H = x->val.dim(2),
            W = x->val.dim(3);
  const int OH = H / 2, OW = W / 2;
  Tensor out({B, C, OH, OW});
  auto argmax = std::make_shared<std::vector<int>>(out.size());
  long o = 0;
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const double* p = x->val.data() + (static_cast<long>(b) * C + c) * H * W;
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          int best = (2 * oy) * W + 2 * ox;
          double bv = p[best];
          const int cands[3] = {(2 * oy) * W + 2 * ox + 1,
                                (2 * oy + 1) * W + 2 * ox,
                                (2 * oy + 1) * W + 2 * ox + 1};
          for (int idx : cands)
            if (p[idx] > bv) {
              bv = p[idx];
              best = idx;
            }
          out[o] = bv;
          (*argmax)[o] = (((static_cast<int>(b) * C + c) * H * W)) + best;
          ++o;
        }
    }
  return ag::make_node(std::move(out), {x}, [x, argmax](ag::Node& self) {
    Tensor gx(x->val.shape());
    for (std::size_t i = 0; i < argmax->size(); ++i)
      gx[(*argmax)[i]] += self.grad[i];
    accumulate(x, gx);
  });
}

void init_gated_dense(ParamStore& ps, Rng& rng, const std::string& prefix,
                      int in, int out) {
  init_linear(ps, rng, prefix + ".h", in, out);
  init_linear(ps, rng, prefix + ".g", in, out);
}

Var gated_dense(Workspace& w, const std::string& prefix, const Var& x) {
  return ag::mul(linear(w, prefix + ".h", x),
                 ag::sigmoid(linear(w, prefix + ".g", x)));
}

void init_gated_conv2d(ParamStore& ps, Rng& rng, const std::string& prefix,
                       int ic, int oc, int kh, int kw) {
  init_conv2d(ps, rng, prefix + ".h", ic, oc, kh, kw);
  init_conv2d(ps, rng, prefix + ".g", ic, oc, kh, kw);
}

Var gated_conv2d(Workspace& w, const std::string& prefix, const Var& x, int kh,
                 int kw, int pad) {
  return ag::mul(conv2d(w, prefix + ".h", x, kh, kw, pad),
                 ag::sigmoid(conv2d(w, prefix + ".g", x, kh, kw, pad)));
}

}  // namespace hduva::nn
