#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "hduva/core/graph.hpp"
#include "hduva/core/rng.hpp"
#include "hduva/core/tensor.hpp"

namespace hduva::nn {

// Insertion-ordered parameter store. Buffers (running batch-norm statistics)
// are registered non-trainable so the optimizer skips them but checkpoints
// still carry them.
class ParamStore {
 public:
  Tensor& create(const std::string& name, std::vector<int> shape,
                 bool trainable = true);
  bool has(const std::string& name) const { return map_.count(name) != 0; }
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool trainable(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t total_size() const;
  ParamStore clone() const;
  // In-place copy of values from another store with identical layout.
  void copy_values_from(const ParamStore& other);
  std::uint64_t checksum() const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> map_;
  std::unordered_map<std::string, bool> trainable_;
};

// Per-forward-pass view binding parameters to graph leaves, so gradients can
// be read back by name after backward().
class Workspace {
 public:
  explicit Workspace(ParamStore& store) : store_(&store) {}
  ag::Var operator()(const std::string& name);
  Tensor grad(const std::string& name) const;
  ParamStore& store() { return *store_; }

 private:
  ParamStore* store_;
  std::unordered_map<std::string, ag::Var> leaves_;
};

// Initializers register parameters; forwards read them. Weight layout for
// linear layers is [out, in]; conv weights are [oc, ic*kh*kw].
void init_linear(ParamStore& ps, Rng& rng, const std::string& prefix, int in,
                 int out, bool bias = true);
ag::Var linear(Workspace& w, const std::string& prefix, const ag::Var& x,
               bool bias = true);

void init_conv2d(ParamStore& ps, Rng& rng, const std::string& prefix, int ic,
                 int oc, int kh, int kw);
ag::Var conv2d(Workspace& w, const std::string& prefix, const ag::Var& x,
               int kh, int kw, int pad);

void init_batchnorm2d(ParamStore& ps, const std::string& prefix, int channels);
ag::Var batchnorm2d(Workspace& w, const std::string& prefix, const ag::Var& x,
                    bool training);

ag::Var maxpool2d(const ag::Var& x);  // kernel 2, stride 2

void init_gated_dense(ParamStore& ps, Rng& rng, const std::string& prefix,
                      int in, int out);
ag::Var gated_dense(Workspace& w, const std::string& prefix, const ag::Var& x);

void init_gated_conv2d(ParamStore& ps, Rng& rng, const std::string& prefix,
                       int ic, int oc, int kh, int kw);
ag::Var gated_conv2d(Workspace& w, const std::string& prefix, const ag::Var& x,
                     int kh, int kw, int pad);

}  // namespace hduva::nn
