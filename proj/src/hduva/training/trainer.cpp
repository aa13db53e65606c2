#include "hduva/training/trainer.hpp"

#include <cmath>
#include <fstream>

#include "hduva/core/errors.hpp"

namespace hduva::train {

using model::Betas;
using model::ElboBreakdown;
using model::HduvaModel;

void TrainConfig::validate() const {
  if (beta_targets.x < 0 || beta_targets.y < 0 || beta_targets.d < 0 ||
      beta_targets.s < 0)
    throw argument_error("TrainConfig: beta targets must be >= 0");
  if (gamma_y < 0) throw argument_error("TrainConfig: gamma_y must be >= 0");
  if (warmup_epochs < 0) throw argument_error("TrainConfig: warmup_epochs < 0");
  if (max_epochs < 1) throw argument_error("TrainConfig: max_epochs must be >= 1");
  if (patience > max_epochs)
    throw argument_error("TrainConfig: patience must be <= max_epochs");
  if (!(learning_rate >= 0))
    throw argument_error("TrainConfig: learning rate must be >= 0");
  if (batch_size < 1) throw argument_error("TrainConfig: batch_size must be >= 1");
  weak.validate();
}

Betas warmup_beta(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw argument_error("warmup_beta: epoch must be >= 0");
  const double ramp =
      cfg.warmup_epochs == 0
          ? 1.0
          : std::min(1.0, static_cast<double>(epoch) /
                              static_cast<double>(cfg.warmup_epochs));
  return {cfg.beta_targets.x * ramp, cfg.beta_targets.y * ramp,
          cfg.beta_targets.d * ramp, cfg.beta_targets.s * ramp};
}

namespace {

const char* first_nonfinite_term(const ElboBreakdown& b) {
  if (!std::isfinite(b.recon_loglik)) return "recon_loglik";
  if (b.has_zx && !std::isfinite(b.kl_zx)) return "kl_zx";
  if (!std::isfinite(b.kl_zy)) return "kl_zy";
  if (!std::isfinite(b.zd_log_ratio)) return "zd_log_ratio";
  if (!std::isfinite(b.kl_s)) return "kl_s";
  if (!std::isfinite(b.aux_class_loglik)) return "aux_class_loglik";
  return nullptr;
}

}  // namespace

StepResult train_step(HduvaModel& m, Adam& opt,
                      const std::vector<scen::DomainBatch>& batches,
                      const Betas& betas, const TrainConfig& cfg,
                      model::SampleSource& noise, TrainCounters* counters) {
  if (batches.empty()) throw argument_error("train_step: no batches");
  nn::Workspace w(m.params());
  std::vector<ag::Var> objectives;
  std::vector<ag::Var> zd_for_mmd;
  StepResult result;
  for (const auto& b : batches) {
    const bool aggregate = cfg.weak.use_aggregation && !b.semi_supervised;
    auto fw = m.elbo_forward(w, b.images, b.labels, betas, cfg.gamma_y, noise,
                             /*training=*/true, aggregate);
    if (const char* term = first_nonfinite_term(fw.breakdown))
      throw training_error(term, std::string("training diverged: term ") + term +
                                     " is non-finite in domain " + b.domain);
    objectives.push_back(fw.objective);
    if (!b.semi_supervised) {
      zd_for_mmd.push_back(fw.zd_sample);
    } else if (counters) {
      ++counters->semi_batches;
      if (aggregate) ++counters->semi_shared_topic;
      // fw.zd_sample deliberately not added to zd_for_mmd
    }
    result.per_domain.push_back(fw.breakdown);
    result.mean_objective += ag::scalar_value(fw.objective);
  }
  result.mean_objective /= static_cast<double>(batches.size());

  ag::Var loss = weak::constrained_loss_var(objectives, zd_for_mmd, cfg.weak);
  result.loss = ag::scalar_value(loss);
  if (!std::isfinite(result.loss))
    throw training_error("constrained_loss", "training diverged: loss is non-finite");
  ag::backward(loss);
  opt.step(w);
  return result;
}

double accuracy(HduvaModel& m, const scen::DomainDataset& data) {
  long correct = 0, total = 0;
  for (const auto& chunk : data.pooled_chunks(256)) {
    const std::vector<int> pred = m.predict(chunk.images);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      correct += pred[i] == chunk.labels[i] ? 1 : 0;
      ++total;
    }
  }
  return total > 0 ? static_cast<double>(correct) / static_cast<double>(total)
                   : 0.0;
}

double accuracy(const model::Checkpoint& ckpt, const scen::DomainDataset& data) {
  HduvaModel m(ckpt.config, /*init_seed=*/0);
  m.params().copy_values_from(ckpt.params);
  return accuracy(m, data);
}

namespace {

ElboBreakdown mean_breakdowns(const std::vector<ElboBreakdown>& xs) {
  ElboBreakdown out;
  if (xs.empty()) return out;
  out.has_zx = xs.front().has_zx;
  out.effective_betas = xs.front().effective_betas;
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (const auto& b : xs) {
    out.recon_loglik += b.recon_loglik * inv;
    out.kl_zx += b.kl_zx * inv;
    out.kl_zy += b.kl_zy * inv;
    out.zd_log_ratio += b.zd_log_ratio * inv;
    out.kl_s += b.kl_s * inv;
    out.aux_class_loglik += b.aux_class_loglik * inv;
  }
  return out;
}

struct SelectionState {
  double best_score = -std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int since_improve = 0;
};

bool update_selection(SelectionState& st, double score, int epoch, double tol) {
  if (score > st.best_score + tol) {
    st.best_score = score;
    st.best_epoch = epoch;
    st.since_improve = 0;
    return true;
  }
  ++st.since_improve;
  return false;
}

model::Checkpoint make_checkpoint(const HduvaModel& m, const TrainConfig& cfg,
                                  const char* tag) {
  model::Checkpoint ckpt;
  ckpt.config = m.config();
  ckpt.variant_tag = tag;
  ckpt.seed = cfg.seed;
  ckpt.train_config = cfg.snapshot;
  ckpt.params = m.params().clone();
  return ckpt;
}

}  // namespace

TrainResult fit(const model::ModelConfig& mc, const TrainConfig& cfg,
                const TrainData& data) {
  cfg.validate();
  if (data.train.size() < 1) throw argument_error("fit: empty training set");
  if (cfg.selection == Selection::val_accuracy && !data.val)
    throw argument_error("fit: selection=val_accuracy requires a val split");

  HduvaModel m(mc, cfg.seed);
  Adam opt(cfg.learning_rate, cfg.grad_clip);
  model::RngSource noise(cfg.seed ^ 0x5bf03635ull);
  Rng semisup_rng(cfg.seed ^ 0x77aa11ull);

  TrainResult res;
  res.data_split_hash = data.train.split_hash();
  SelectionState sel;
  res.best = make_checkpoint(m, cfg, model::variant_name(mc.variant));

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const Betas betas = warmup_beta(epoch, cfg);
    auto steps = data.train.epoch_steps(cfg.batch_size, cfg.seed, epoch);
    std::vector<std::vector<scen::DomainBatch>> semi_steps;
    if (data.semisup)
      semi_steps = data.semisup->epoch_steps(cfg.batch_size,
                                             cfg.seed ^ 0x5151ull, epoch);
    double obj_sum = 0.0;
    std::vector<ElboBreakdown> terms;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      auto batch_set = steps[s];
      if (!semi_steps.empty()) {
        auto& extra = semi_steps[s % semi_steps.size()];
        for (auto b : extra) {
          b.semi_supervised = true;
          batch_set.push_back(std::move(b));
        }
      }
      StepResult sr =
          train_step(m, opt, batch_set, betas, cfg, noise, &res.counters);
      obj_sum += sr.mean_objective;
      for (const auto& b : sr.per_domain) terms.push_back(b);
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.mean_objective = obj_sum / static_cast<double>(steps.size());
    em.mean_terms = mean_breakdowns(terms);
    em.effective = betas;
    if (cfg.track_accuracy) em.train_accuracy = accuracy(m, data.train);
    res.history.push_back(em);

    const double score = cfg.selection == Selection::val_accuracy
                             ? accuracy(m, *data.val)
                             : em.mean_objective;
    if (update_selection(sel, score, epoch, cfg.improve_tol)) {
      res.best = make_checkpoint(m, cfg, model::variant_name(mc.variant));
      res.best.objective_history.clear();
    }
    if (sel.since_improve >= cfg.patience) break;
  }
  res.best_epoch = sel.best_epoch;
  res.best_score = sel.best_score;
  for (const auto& em : res.history)
    res.best.objective_history.push_back(em.mean_objective);
  return res;
}

TrainResult deep_all_fit(const model::ModelConfig& mc_in, const TrainConfig& cfg,
                         const TrainData& data) {
  cfg.validate();
  if (data.train.size() < 1) throw argument_error("deep_all_fit: empty training set");
  model::ModelConfig mc = mc_in;
  mc.variant = model::Variant::deep_all;

  HduvaModel m(mc, cfg.seed);
  Adam opt(cfg.learning_rate, cfg.grad_clip);
  Rng shuffle_rng(cfg.seed);

  TrainResult res;
  res.data_split_hash = data.train.split_hash();
  SelectionState sel;
  res.best = make_checkpoint(m, cfg, "deep_all");

  // Pooled batches, reshuffled per epoch deterministically.
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    auto steps = data.train.epoch_steps(cfg.batch_size, cfg.seed + 17, epoch);
    double loglik_sum = 0.0;
    long count = 0;
    for (const auto& step : steps) {
      // Pool the per-domain batches of this step into one batch.
      std::vector<ag::Var> losses;
      nn::Workspace w(m.params());
      for (const auto& b : step) {
        ag::Var lp = m.classifier_logprobs_graph(w, b.images, true);
        ag::Var picked = ag::pick_cols(lp, b.labels);
        losses.push_back(ag::mean_all(picked));
      }
      ag::Var mean_ll = ag::scale(losses[0], 1.0 / static_cast<double>(losses.size()));
      for (std::size_t i = 1; i < losses.size(); ++i)
        mean_ll = ag::add(mean_ll,
                          ag::scale(losses[i], 1.0 / static_cast<double>(losses.size())));
      const double ll = ag::scalar_value(mean_ll);
      if (!std::isfinite(ll))
        throw training_error("cross_entropy", "deep-all training diverged");
      ag::backward(ag::neg(mean_ll));
      opt.step(w);
      loglik_sum += ll;
      ++count;
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.mean_objective = loglik_sum / static_cast<double>(count);
    em.effective = warmup_beta(epoch, cfg);
    if (cfg.track_accuracy) em.train_accuracy = accuracy(m, data.train);
    res.history.push_back(em);
    const double score = cfg.selection == Selection::val_accuracy && data.val
                             ? accuracy(m, *data.val)
                             : em.mean_objective;
    if (update_selection(sel, score, epoch, cfg.improve_tol))
      res.best = make_checkpoint(m, cfg, "deep_all");
    if (sel.since_improve >= cfg.patience) break;
  }
  res.best_epoch = sel.best_epoch;
  res.best_score = sel.best_score;
  for (const auto& em : res.history)
    res.best.objective_history.push_back(em.mean_objective);
  return res;
}

std::vector<AblationRow> run_ablation_matrix(
    const model::ModelConfig& mc, const TrainConfig& base, const TrainData& data,
    const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw argument_error("run_ablation_matrix: need seeds");
  const bool cells[4][2] = {{true, true}, {false, true}, {true, false},
                            {false, false}};
  std::vector<AblationRow> rows;
  for (const auto& cell : cells) {
    TrainConfig cfg = base;
    cfg.weak.use_aggregation = cell[0];
    cfg.weak.use_mmd = cell[1];
    std::vector<double> accs;
    std::uint64_t split_hash = 0;
    for (std::uint64_t seed : seeds) {
      cfg.seed = seed;
      TrainResult r = fit(mc, cfg, data);
      if (split_hash == 0)
        split_hash = r.data_split_hash;
      else if (split_hash != r.data_split_hash)
        throw state_error("ablation: data split hash changed between cells");
      const scen::DomainDataset& eval_set = data.val ? *data.val : data.train;
      accs.push_back(accuracy(r.best, eval_set));
    }
    AblationRow row;
    row.cell = cfg.weak.cell_name();
    row.repeats = static_cast<int>(accs.size());
    for (double a : accs) row.mean_accuracy += a;
    row.mean_accuracy /= static_cast<double>(accs.size());
    if (accs.size() > 1) {
      double var = 0.0;
      for (double a : accs)
        var += (a - row.mean_accuracy) * (a - row.mean_accuracy);
      row.sd_accuracy = std::sqrt(var / static_cast<double>(accs.size() - 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_metrics_csv(const std::vector<EpochMetrics>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write metrics csv: " + path);
  out << "epoch,objective,recon,kl_zx,kl_zy,zd_log_ratio,kl_s,aux,"
         "beta_x,beta_y,beta_d,beta_s,train_accuracy\n";
  for (const auto& em : history) {
    out << em.epoch << ',' << em.mean_objective << ',' << em.mean_terms.recon_loglik
        << ',' << em.mean_terms.kl_zx << ',' << em.mean_terms.kl_zy << ','
        << em.mean_terms.zd_log_ratio << ',' << em.mean_terms.kl_s << ','
        << em.mean_terms.aux_class_loglik << ',' << em.effective.x << ','
        << em.effective.y << ',' << em.effective.d << ',' << em.effective.s
        << ',' << em.train_accuracy << '\n';
  }
}

}  // namespace hduva::train
