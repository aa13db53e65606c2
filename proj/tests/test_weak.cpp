#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hduva/core/errors.hpp"
#include "hduva/weak/weak.hpp"
#include "test_util.hpp"

using namespace hduva;
using dist::DirichletParams;
using testutil::random_tensor;
using weak::WeakSupConfig;

TEST_CASE("aggregate_concentration is the per-coordinate mean") {
  std::vector<DirichletParams> batch;
  batch.emplace_back(Tensor::row({1.0, 2.0, 3.0}));
  batch.emplace_back(Tensor::row({3.0, 2.0, 1.0}));
  DirichletParams agg = weak::aggregate_concentration(batch);
  for (int k = 0; k < 3; ++k) CHECK(agg.concentration[k] == 2.0);

  std::vector<DirichletParams> single;
  single.emplace_back(Tensor::row({0.4, 1.1}));
  DirichletParams same = weak::aggregate_concentration(single);
  CHECK(same.concentration[0] == 0.4);
  CHECK(same.concentration[1] == 1.1);

  std::vector<DirichletParams> identical(5, DirichletParams(Tensor::row({2.0, 0.7})));
  DirichletParams out = weak::aggregate_concentration(identical);
  CHECK(out.concentration[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.concentration[1] == doctest::Approx(0.7).epsilon(1e-15));

  const std::vector<DirichletParams> empty;
  CHECK_THROWS_AS(weak::aggregate_concentration(empty), argument_error);
}

TEST_CASE("aggregation is permutation invariant and commutes with scaling") {
  Rng rng(1);
  std::vector<DirichletParams> batch;
  for (int i = 0; i < 8; ++i)
    batch.emplace_back(random_tensor({1, 4}, rng, 0.2, 3.0));
  DirichletParams base = weak::aggregate_concentration(batch);

  std::vector<DirichletParams> shuffled = batch;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[1], shuffled[5]);
  DirichletParams perm = weak::aggregate_concentration(shuffled);
  for (int k = 0; k < 4; ++k)
    CHECK(perm.concentration[k] ==
          doctest::Approx(base.concentration[k]).epsilon(1e-15));

  const double c = 2.5;
  std::vector<DirichletParams> scaled;
  for (const auto& b : batch) {
    Tensor t = b.concentration.clone();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= c;
    scaled.emplace_back(std::move(t));
  }
  DirichletParams out = weak::aggregate_concentration(scaled);
  for (int k = 0; k < 4; ++k)
    CHECK(out.concentration[k] ==
          doctest::Approx(c * base.concentration[k]).epsilon(1e-12));
}

TEST_CASE("shared topic broadcasts one draw; per-instance topics differ") {
  Rng rng(2);
  DirichletParams agg(Tensor::row({1.2, 0.8, 2.0}));
  dist::SimplexPoint s = weak::shared_topic_sample(agg, rng);
  double sum = 0;
  for (int k = 0; k < 3; ++k) sum += s.weights[k];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  // The graph path used in training: aggregate -> one draw -> broadcast.
  const int B = 16;
  Tensor conc = random_tensor({B, 3}, rng, 0.3, 2.0);
  ag::Var conc_var = ag::constant(conc);
  ag::Var agg_var = weak::aggregate_concentration_var(conc_var);
  ag::Var one = dist::dirichlet_sample_var(agg_var, rng);
  ag::Var shared = ag::broadcast_rows(one, B);
  const Tensor sh = ag::value(shared);
  for (int i = 1; i < B; ++i)
    for (int k = 0; k < 3; ++k) CHECK(sh.at(i, k) == sh.at(0, k));

  // Without aggregation each instance draws its own topic.
  ag::Var per = dist::dirichlet_sample_var(conc_var, rng);
  const Tensor pv = ag::value(per);
  bool any_differ = false;
  for (int i = 1; i < B; ++i)
    for (int k = 0; k < 3; ++k)
      if (pv.at(i, k) != pv.at(0, k)) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("constrained_loss sign structure and switches") {
  WeakSupConfig cfg;
  cfg.use_mmd = false;
  const std::vector<double> objectives = {1.5, -2.0, 0.25};
  Rng rng(3);
  std::vector<Tensor> zd = {random_tensor({4, 2}, rng), random_tensor({4, 2}, rng),
                            random_tensor({4, 2}, rng)};
  const double base = -(1.5 - 2.0 + 0.25);
  CHECK(weak::constrained_loss(objectives, zd, cfg) == base);

  cfg.use_mmd = true;
  cfg.gamma_d = 0.0;
  CHECK(weak::constrained_loss(objectives, zd, cfg) == base);

  cfg.gamma_d = 1.0;
  std::vector<Tensor> same = {zd[0], zd[0], zd[0]};
  CHECK(weak::constrained_loss(objectives, same, cfg) ==
        doctest::Approx(base).epsilon(1e-12));

  // Separated embeddings lower the loss (the penalty rewards separation).
  std::vector<Tensor> near = {random_tensor({6, 2}, rng, 0.0, 0.1),
                              random_tensor({6, 2}, rng, 0.0, 0.1)};
  std::vector<Tensor> far = {near[0].clone(), near[1].clone()};
  for (int i = 0; i < 6; ++i)
    for (int d = 0; d < 2; ++d) far[1].at(i, d) += 10.0;
  const std::vector<double> two = {0.0, 0.0};
  CHECK(weak::constrained_loss(two, far, cfg) <
        weak::constrained_loss(two, near, cfg));

  // Linearity in the penalty: doubling gamma_d doubles the gap to -sum F.
  const double l1 = weak::constrained_loss(two, far, cfg);
  cfg.gamma_d = 2.0;
  const double l2 = weak::constrained_loss(two, far, cfg);
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));

  const std::vector<double> none;
  CHECK_THROWS_AS(weak::constrained_loss(none, zd, cfg), argument_error);
}

TEST_CASE("constrained_loss_var agrees with the plain version") {
  Rng rng(4);
  WeakSupConfig cfg;
  cfg.use_mmd = true;
  cfg.gamma_d = 0.7;
  std::vector<Tensor> zd = {random_tensor({5, 3}, rng), random_tensor({6, 3}, rng)};
  std::vector<double> objectives = {0.4, -1.1};
  std::vector<ag::Var> ovars = {ag::constant_scalar(0.4), ag::constant_scalar(-1.1)};
  std::vector<ag::Var> zvars = {ag::leaf(zd[0].clone()), ag::leaf(zd[1].clone())};
  const double plain = weak::constrained_loss(objectives, zd, cfg);
  ag::Var var = weak::constrained_loss_var(ovars, zvars, cfg);
  CHECK(ag::scalar_value(var) == doctest::Approx(plain).epsilon(1e-12));
  ag::backward(var);  // gradient path exists through the embeddings
  CHECK(ag::grad_of(zvars[0]).size() == zd[0].size());
}

TEST_CASE("ablation cell names") {
  WeakSupConfig cfg;
  cfg.use_aggregation = true;
  cfg.use_mmd = true;
  CHECK(cfg.cell_name() == "Agg-MMD");
  cfg.use_aggregation = false;
  CHECK(cfg.cell_name() == "no-Agg-MMD");
  cfg.use_mmd = false;
  CHECK(cfg.cell_name() == "no-Agg-no-MMD");
  cfg.use_aggregation = true;
  CHECK(cfg.cell_name() == "Agg-no-MMD");
  cfg.gamma_d = -1.0;
  CHECK_THROWS_AS(cfg.validate(), argument_error);
}
