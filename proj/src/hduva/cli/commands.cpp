#include "hduva/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "hduva/cli/config_file.hpp"
#include "hduva/core/errors.hpp"
#include "hduva/mmd/mmd.hpp"
#include "hduva/model/checkpoint.hpp"
#include "hduva/scenarios/evaluate.hpp"
#include "hduva/scenarios/generators.hpp"
#include "hduva/training/trainer.hpp"

namespace hduva::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

std::string fmt3(double v) {
  std::ostringstream out;
  out << std::setprecision(3) << v;
  return out.str();
}

std::string data_dir_of(const KeyValues& kv) {
  const char* env = std::getenv("HDUVA_DATA_DIR");
  return get_string(kv, "data-dir", env != nullptr ? env : "./data");
}

void write_run_record_at(const fs::path& file, const std::string& command,
                         const KeyValues& resolved, std::uint64_t manifest_hash,
                         const std::string& checkpoint_path,
                         const std::string& metrics_path) {
  json j;
  std::string blob = command;
  for (const auto& [k, v] : resolved) blob += "|" + k + "=" + v;
  blob += "|" + hex64(manifest_hash);
  j["run_id"] = hex64(scen::fnv1a64(blob.data(), blob.size()));
  j["command"] = command;
  j["config"] = resolved;
  j["manifest_hash"] = hex64(manifest_hash);
  j["checkpoint"] = checkpoint_path;
  j["metrics_csv"] = metrics_path;
  std::ofstream out(file);
  if (!out) throw io_error("cannot write run record " + file.string());
  out << j.dump(2) << "\n";
}

void write_run_record(const std::string& dir, const std::string& command,
                      const KeyValues& resolved, std::uint64_t manifest_hash,
                      const std::string& checkpoint_path,
                      const std::string& metrics_path) {
  write_run_record_at(fs::path(dir) / "run_record.json", command, resolved,
                      manifest_hash, checkpoint_path, metrics_path);
}

// Record for commands whose primary output is a single file.
void write_sidecar_record(const std::string& out_file, const std::string& command,
                          const KeyValues& resolved, std::uint64_t manifest_hash) {
  // Destination paths are excluded from the record identity.
  KeyValues cfg = resolved;
  cfg.erase("out");
  write_run_record_at(out_file + ".run_record.json", command, cfg,
                      manifest_hash, "", "");
}

// ---- gen-scenario ----------------------------------------------------

int cmd_gen_scenario(const ParsedArgs& args) {
  const KeyValues& kv = args.kv;
  const std::string name = get_string(kv, "name", "");
  const std::string known =
      "color-hier, color-seq-vlag, color-seq-red, rotated-overlap, "
      "virtual-hospitals, toy-hier";
  if (name.empty())
    throw argument_error("gen-scenario: --name required (one of " + known + ")");
  scen::GenOptions opt;
  opt.out_dir = get_string(kv, "out", "");
  if (opt.out_dir.empty()) throw argument_error("gen-scenario: --out required");
  opt.seed = static_cast<std::uint64_t>(get_int(kv, "seed", 0));
  opt.data_dir = data_dir_of(kv);

  scen::ScenarioManifest m;
  if (name == "color-hier") {
    m = scen::gen_color_hierarchical(opt);
  } else if (name == "color-seq-vlag") {
    m = scen::gen_color_sequential(scen::PaletteSpec::vlag(), opt);
  } else if (name == "color-seq-red") {
    m = scen::gen_color_sequential(scen::PaletteSpec::red_diverging(), opt);
  } else if (name == "rotated-overlap") {
    const std::string mode = get_string(kv, "mode", "workshop");
    if (mode != "workshop" && mode != "erratum")
      throw argument_error("gen-scenario: --mode must be workshop or erratum");
    m = scen::gen_rotated_overlap(mode == "workshop"
                                      ? scen::RotatedMode::workshop
                                      : scen::RotatedMode::erratum,
                                  opt);
  } else if (name == "virtual-hospitals") {
    m = scen::gen_virtual_hospitals(opt);
  } else if (name == "toy-hier") {
    scen::ToyOptions toy;
    toy.num_domains = get_int(kv, "toy.domains", toy.num_domains);
    toy.subs_per_domain = get_int(kv, "toy.subs", toy.subs_per_domain);
    toy.per_sub = get_int(kv, "toy.per-sub", toy.per_sub);
    toy.image_size = get_int(kv, "toy.size", toy.image_size);
    toy.num_classes = get_int(kv, "toy.classes", toy.num_classes);
    m = scen::gen_toy_hier(toy, opt);
  } else {
    throw argument_error("gen-scenario: unknown scenario '" + name +
                         "'; known scenarios: " + known);
  }
  {
    KeyValues cfg = kv;
    cfg.erase("out");
    write_run_record(opt.out_dir, "gen-scenario", cfg, m.content_hash, "", "");
  }
  std::cout << "manifest_hash " << hex64(m.content_hash) << "\n";
  std::cout << "instances " << m.instances.size() << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------

struct Resolved {
  model::ModelConfig mc;
  train::TrainConfig tc;
  KeyValues snapshot;
};

Resolved resolve_train_config(KeyValues kv, const scen::DomainDataset& ds) {
  Resolved r;
  r.mc.variant = model::variant_from_name(get_string(kv, "model.variant", "hduva"));
  r.mc.zx_dim = get_int(kv, "model.zx_dim", 64);
  r.mc.zy_dim = get_int(kv, "model.zy_dim", 64);
  r.mc.zd_dim = get_int(kv, "model.zd_dim", 64);
  r.mc.topic_dim = get_int(kv, "model.topic_dim", 3);
  r.mc.with_zx = get_bool(kv, "model.with_zx", true);
  r.mc.topic_samples = get_int(kv, "model.topic_samples", 1);
  r.mc.trunk_c1 = get_int(kv, "model.trunk_c1", 32);
  r.mc.trunk_c2 = get_int(kv, "model.trunk_c2", 64);
  r.mc.backbone = get_string(kv, "model.backbone", "conv_small") == "linear"
                      ? model::Backbone::linear
                      : model::Backbone::conv_small;
  r.mc.apply_variant_default_decoder_s();
  if (kv.count("model.decoder_uses_s"))
    r.mc.decoder_uses_s = get_bool(kv, "model.decoder_uses_s", r.mc.decoder_uses_s);
  r.mc.num_classes = ds.num_classes();
  r.mc.channels = ds.channels();
  r.mc.height = ds.height();
  r.mc.width = ds.width();

  r.tc.beta_targets.x = get_double(kv, "train.beta_x", 1.0);
  r.tc.beta_targets.y = get_double(kv, "train.beta_y", 1.0);
  r.tc.beta_targets.d = get_double(kv, "train.beta_d", 1.0);
  r.tc.beta_targets.s = get_double(kv, "train.beta_s", 1.0);
  r.tc.gamma_y = get_double(kv, "train.gamma_y", 1e5);
  r.tc.warmup_epochs = get_int(kv, "train.warmup_epochs", 100);
  r.tc.max_epochs = get_int(kv, "train.max_epochs", 500);
  r.tc.patience = get_int(kv, "train.patience", std::min(100, r.tc.max_epochs));
  r.tc.learning_rate = get_double(kv, "train.lr", 1e-4);
  r.tc.batch_size = get_int(kv, "train.batch_size", 32);
  r.tc.seed = static_cast<std::uint64_t>(get_int(kv, "train.seed", 0));
  r.tc.track_accuracy = get_bool(kv, "train.track_accuracy", false);
  const std::string sel = get_string(kv, "train.selection", "extended_elbo");
  if (sel == "extended_elbo")
    r.tc.selection = train::Selection::extended_elbo;
  else if (sel == "val_accuracy")
    r.tc.selection = train::Selection::val_accuracy;
  else
    throw argument_error("train.selection must be extended_elbo or val_accuracy");
  r.tc.weak.use_aggregation = get_bool(kv, "weak.aggregation", false);
  r.tc.weak.use_mmd = get_bool(kv, "weak.mmd", false);
  r.tc.weak.gamma_d = get_double(kv, "weak.gamma_d", 1.0);
  r.tc.weak.kernel = mmd::KernelSpec::gaussian(
      get_double_list(kv, "weak.bandwidths", {0.1, 1.0, 10.0}));

  // Snapshot of every effective value for reproduction.
  auto put = [&kv](const std::string& k, const std::string& v) {
    if (!kv.count(k)) kv[k] = v;
  };
  put("model.variant", model::variant_name(r.mc.variant));
  put("model.zx_dim", std::to_string(r.mc.zx_dim));
  put("model.zy_dim", std::to_string(r.mc.zy_dim));
  put("model.zd_dim", std::to_string(r.mc.zd_dim));
  put("model.topic_dim", std::to_string(r.mc.topic_dim));
  put("model.with_zx", r.mc.with_zx ? "on" : "off");
  put("model.decoder_uses_s", r.mc.decoder_uses_s ? "on" : "off");
  put("model.topic_samples", std::to_string(r.mc.topic_samples));
  put("model.backbone",
      r.mc.backbone == model::Backbone::linear ? "linear" : "conv_small");
  put("train.gamma_y", fmt3(r.tc.gamma_y));
  put("train.warmup_epochs", std::to_string(r.tc.warmup_epochs));
  put("train.max_epochs", std::to_string(r.tc.max_epochs));
  put("train.patience", std::to_string(r.tc.patience));
  put("train.lr", fmt3(r.tc.learning_rate));
  put("train.batch_size", std::to_string(r.tc.batch_size));
  put("train.seed", std::to_string(r.tc.seed));
  put("train.selection", sel);
  put("weak.aggregation", r.tc.weak.use_aggregation ? "on" : "off");
  put("weak.mmd", r.tc.weak.use_mmd ? "on" : "off");
  put("weak.gamma_d", fmt3(r.tc.weak.gamma_d));
  r.snapshot = kv;
  r.tc.snapshot = kv;
  return r;
}

int train_single(const KeyValues& kv_in, const scen::ScenarioManifest& man,
                 const std::string& manifest_dir, const std::string& out_dir) {
  // Destination paths are not configuration; keep artifacts byte-identical
  // across output directories.
  KeyValues kv = kv_in;
  kv.erase("out");
  scen::DomainDataset train_ds =
      scen::DomainDataset::load(man, manifest_dir, {"train"});
  Resolved r = resolve_train_config(kv, train_ds);
  train::TrainData data{std::move(train_ds), std::nullopt, std::nullopt};
  // Optional validation split.
  bool has_val = false;
  for (const auto& ins : man.instances)
    if (ins.split == "val") has_val = true;
  if (has_val)
    data.val = scen::DomainDataset::load(man, manifest_dir, {"val"});
  const std::string semisup_dir = get_string(kv, "train.semi_supervised_manifest", "");
  if (!semisup_dir.empty()) {
    scen::ScenarioManifest sm = scen::read_manifest(semisup_dir);
    data.semisup = scen::DomainDataset::load(sm, semisup_dir, {"train"});
  }

  fs::create_directories(out_dir);
  train::TrainResult res = r.mc.variant == model::Variant::deep_all
                               ? train::deep_all_fit(r.mc, r.tc, data)
                               : train::fit(r.mc, r.tc, data);
  const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.bin").string();
  const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  model::save_checkpoint(res.best, ckpt_path);
  train::write_metrics_csv(res.history, metrics_path);
  write_run_record(out_dir, "train", r.snapshot, man.content_hash, ckpt_path,
                   metrics_path);
  std::cout << "best_epoch " << res.best_epoch << "\n";
  std::cout << "best_score " << res.best_score << "\n";
  std::cout << "checkpoint " << ckpt_path << "\n";
  return kExitOk;
}

int cmd_train(const ParsedArgs& args) {
  KeyValues kv = args.kv;
  if (kv.count("config")) {
    KeyValues from_file = parse_config_file(kv.at("config"));
    kv.erase("config");
    // CLI flags override file keys.
    for (const auto& [k, v] : from_file) kv.emplace(k, v);
  }
  const std::string manifest_dir = get_string(kv, "manifest", "");
  if (manifest_dir.empty()) throw argument_error("train: --manifest required");
  const std::string out_dir = get_string(kv, "out", "runs/train");
  scen::ScenarioManifest man = scen::read_manifest(manifest_dir);

  // A comma-separated gamma_y triggers the sensitivity sweep.
  const std::string gy = get_string(kv, "train.gamma_y", "");
  if (gy.find(',') != std::string::npos) {
    for (const auto& v : split_list(gy)) {
      KeyValues kv2 = kv;
      kv2["train.gamma_y"] = v;
      const std::string sub = (fs::path(out_dir) / ("gamma_y_" + v)).string();
      std::cout << "[sweep] train.gamma_y=" << v << "\n";
      const int rc = train_single(kv2, man, manifest_dir, sub);
      if (rc != kExitOk) return rc;
    }
    return kExitOk;
  }
  return train_single(kv, man, manifest_dir, out_dir);
}

// ---- eval-lodo / eval-auc ---------------------------------------------

std::vector<std::uint64_t> seeds_from(const KeyValues& kv) {
  std::vector<std::uint64_t> seeds;
  const std::string list = get_string(kv, "seeds", "");
  if (!list.empty()) {
    for (const auto& s : split_list(list))
      seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
  } else {
    const int n = get_int(kv, "repeats", 10);
    const std::uint64_t base = static_cast<std::uint64_t>(get_int(kv, "seed", 0));
    for (int i = 0; i < n; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  if (seeds.empty()) throw argument_error("need --seeds or --repeats");
  return seeds;
}

int cmd_eval_lodo(const ParsedArgs& args) {
  const KeyValues& kv = args.kv;
  const std::string manifest_dir = get_string(kv, "manifest", "");
  if (manifest_dir.empty()) throw argument_error("eval-lodo: --manifest required");
  scen::ScenarioManifest man = scen::read_manifest(manifest_dir);
  scen::DomainDataset probe = scen::DomainDataset::load(man, manifest_dir, {"train"});
  Resolved r = resolve_train_config(kv, probe);
  const std::string algo_name = get_string(kv, "algo", "hduva");
  scen::AlgorithmId algo = scen::AlgorithmId::hduva;
  if (algo_name == "lhduva") {
    algo = scen::AlgorithmId::lhduva;
    r.mc.variant = model::Variant::lhduva;
    r.mc.apply_variant_default_decoder_s();
  } else if (algo_name == "deep_all") {
    algo = scen::AlgorithmId::deep_all;
  } else if (algo_name != "hduva") {
    throw argument_error("eval-lodo: --algo must be hduva, lhduva or deep_all");
  }

  const auto rows = scen::lodo_evaluate(algo, man, manifest_dir, r.mc, r.tc,
                                        seeds_from(kv));
  if (man.scenario_id == "rotated-overlap-erratum")
    std::cout << "# reference (full-scale runs, not asserted): "
                 "DIVA 0.821 ± 0.007, HDUVA 0.821 ± 0.007\n";
  std::ostringstream table;
  table << "test_domain,mean_accuracy,sd_accuracy,repeats\n";
  for (const auto& row : rows) {
    table << row.test_domain << ',' << row.mean_accuracy << ','
          << row.sd_accuracy << ',' << row.repeats << '\n';
    std::cout << row.test_domain << "  " << fmt3(row.mean_accuracy) << " ± "
              << fmt3(row.sd_accuracy) << "  (n=" << row.repeats << ")\n";
  }
  const std::string out = get_string(kv, "out", "");
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw io_error("cannot write " + out);
    f << table.str();
    write_sidecar_record(out, "eval-lodo", kv, man.content_hash);
  }
  return kExitOk;
}

model::Checkpoint load_checkpoint_or_exit5(const std::string& path) {
  if (path.empty()) throw argument_error("--checkpoint required");
  if (!fs::exists(path)) {
    std::cerr << "missing checkpoint: " << path << "\n";
    std::exit(kExitMissing);
  }
  return model::load_checkpoint(path);
}

int cmd_eval_auc(const ParsedArgs& args) {
  const KeyValues& kv = args.kv;
  model::Checkpoint ckpt =
      load_checkpoint_or_exit5(get_string(kv, "checkpoint", ""));
  const std::vector<std::string> dirs =
      split_list(get_string(kv, "shifts", ""));
  if (dirs.size() < 2)
    throw argument_error("eval-auc: --shifts needs >= 2 manifest dirs");
  scen::ShiftAucResult res = scen::shift_auc_evaluate(ckpt, dirs);
  for (std::size_t i = 0; i < res.per_shift_accuracy.size(); ++i)
    std::cout << "shift " << i << " accuracy " << fmt3(res.per_shift_accuracy[i])
              << "\n";
  std::cout << "auc " << std::setprecision(12) << res.auc << "\n";
  const std::string out = get_string(kv, "out", "");
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw io_error("cannot write " + out);
    f << "shift,accuracy\n";
    for (std::size_t i = 0; i < res.per_shift_accuracy.size(); ++i)
      f << i << ',' << res.per_shift_accuracy[i] << '\n';
    f << "auc," << std::setprecision(15) << res.auc << '\n';
    write_sidecar_record(out, "eval-auc", kv, 0);
  }
  return kExitOk;
}

// ---- plot-topics -------------------------------------------------------

int cmd_plot_topics(const ParsedArgs& args) {
  const KeyValues& kv = args.kv;
  model::Checkpoint ckpt =
      load_checkpoint_or_exit5(get_string(kv, "checkpoint", ""));
  const std::string manifest_dir = get_string(kv, "manifest", "");
  if (manifest_dir.empty()) throw argument_error("plot-topics: --manifest required");
  const std::string out = get_string(kv, "out", "topics.svg");
  const int max_points = get_int(kv, "max-points", 300);
  const std::uint64_t seed = static_cast<std::uint64_t>(get_int(kv, "seed", 0));

  scen::ScenarioManifest man = scen::read_manifest(manifest_dir);
  scen::DomainDataset ds = scen::DomainDataset::load(man, manifest_dir, {"train"});
  model::HduvaModel m(ckpt.config, 0);
  m.params().copy_values_from(ckpt.params);
  if (ckpt.config.topic_dim != 3)
    std::cerr << "warning: topic_dim != 3; projecting first 3 coordinates "
                 "renormalized\n";

  // Deterministic subsample.
  Rng rng(seed);
  std::vector<long> idx(ds.size());
  for (long i = 0; i < ds.size(); ++i) idx[i] = i;
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.below(i)]);
  if (static_cast<long>(idx.size()) > max_points) idx.resize(max_points);
  std::sort(idx.begin(), idx.end());

  const int n = static_cast<int>(idx.size());
  Tensor pts({n, 2});
  Tensor means({n, 3});
  std::vector<int> cluster(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Tensor> one = {ds.image(idx[i])};
    std::vector<int> lab = {0};
    scen::DomainBatch b = scen::assemble_batch(one, lab);
    Tensor conc = m.infer_topic_concentration(b.images);  // [1,K]
    double sum = 0.0;
    const int K = conc.dim(1);
    for (int k = 0; k < std::min(3, K); ++k) sum += conc.at(0, k);
    double s0 = conc.at(0, 0) / sum;
    double s1 = K > 1 ? conc.at(0, 1) / sum : 0.0;
    double s2 = K > 2 ? conc.at(0, 2) / sum : 0.0;
    means.at(i, 0) = s0;
    means.at(i, 1) = s1;
    means.at(i, 2) = s2;
    // barycentric corners (0,0), (1,0), (0.5, sqrt(3)/2)
    pts.at(i, 0) = s1 * 1.0 + s2 * 0.5;
    pts.at(i, 1) = s2 * 0.8660254037844386;
    cluster[i] = ds.domain_of()[idx[i]];
  }
  const double sil = scen::mean_silhouette(means, cluster);

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << std::fixed << std::setprecision(3);
  const double W = 420, H = 400, pad = 30, side = W - 2 * pad;
  auto X = [&](double x) { return pad + x * side; };
  auto Y = [&](double y) { return H - pad - y * side; };
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  svg << "<polygon points=\"" << X(0) << ',' << Y(0) << ' ' << X(1) << ','
      << Y(0) << ' ' << X(0.5) << ',' << Y(0.8660254037844386)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i < n; ++i)
    svg << "<circle cx=\"" << X(pts.at(i, 0)) << "\" cy=\"" << Y(pts.at(i, 1))
        << "\" r=\"3\" fill=\"" << colors[cluster[i] % 6] << "\" fill-opacity=\"0.7\"/>\n";
  for (std::size_t d = 0; d < ds.domains().size(); ++d)
    svg << "<text x=\"" << pad << "\" y=\"" << 14 + 14 * d << "\" fill=\""
        << colors[d % 6] << "\" font-size=\"12\">" << ds.domains()[d]
        << "</text>\n";
  svg << "</svg>\n";
  std::ofstream f(out);
  if (!f) throw io_error("cannot write " + out);
  f << svg.str();
  write_sidecar_record(out, "plot-topics", kv, man.content_hash);
  std::cout << "silhouette " << std::setprecision(6) << sil << "\n";
  std::cout << "figure " << out << "\n";
  return kExitOk;
}

// ---- gen-conditional ----------------------------------------------------

int cmd_gen_conditional(const ParsedArgs& args) {
  const KeyValues& kv = args.kv;
  model::Checkpoint ckpt =
      load_checkpoint_or_exit5(get_string(kv, "checkpoint", ""));
  const std::string out = get_string(kv, "out", "grid.ppm");
  const std::uint64_t seed = static_cast<std::uint64_t>(get_int(kv, "seed", 0));

  Tensor seed_img;
  const std::string seed_path = get_string(kv, "seed-image", "");
  if (!seed_path.empty()) {
    seed_img = scen::image_to_tensor(scen::read_image(seed_path));
  } else {
    const std::string manifest_dir = get_string(kv, "manifest", "");
    if (manifest_dir.empty())
      throw argument_error("gen-conditional: need --seed-image or --manifest");
    scen::ScenarioManifest man = scen::read_manifest(manifest_dir);
    const int index = get_int(kv, "index", 0);
    if (index < 0 || index >= static_cast<int>(man.instances.size()))
      throw argument_error("gen-conditional: --index out of range");
    seed_img = scen::image_to_tensor(scen::read_image(scen::resolve_instance_path(
        manifest_dir, man.instances[index].path)));
  }
  std::vector<int> labels;
  const std::string label_list = get_string(kv, "labels", "");
  if (label_list.empty()) {
    for (int c = 0; c < ckpt.config.num_classes; ++c) labels.push_back(c);
  } else {
    for (const auto& s : split_list(label_list)) labels.push_back(std::stoi(s));
  }

  model::HduvaModel m(ckpt.config, 0);
  m.params().copy_values_from(ckpt.params);
  Rng rng(seed);
  const Tensor batch = seed_img.reshaped(
      {1, ckpt.config.channels, ckpt.config.height, ckpt.config.width});
  Tensor grid = m.conditional_generate(batch, labels, rng);

  // One wide strip image.
  const int n = grid.dim(0), C = grid.dim(1), H = grid.dim(2), W = grid.dim(3);
  Tensor strip({C, H, n * W});
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          strip[(static_cast<std::size_t>(c) * H + y) * (n * W) + i * W + x] =
              grid[((static_cast<std::size_t>(i) * C + c) * H + y) * W + x];
  scen::write_image(scen::tensor_to_image(strip), out);
  write_sidecar_record(out, "gen-conditional", kv, 0);
  std::cout << "grid " << out << " images " << n << "\n";
  return kExitOk;
}

// ---- two-sample -----------------------------------------------------------

Tensor read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open csv: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && rows.front().size() != row.size())
      throw io_error("ragged csv: " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw argument_error("empty csv: " + path);
  Tensor t({static_cast<int>(rows.size()), static_cast<int>(rows[0].size())});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return t;
}

int cmd_two_sample(const ParsedArgs& args) {
  const KeyValues& kv = args.kv;
  const std::string xp = get_string(kv, "x", ""), yp = get_string(kv, "y", "");
  if (xp.empty() || yp.empty())
    throw argument_error("two-sample: --x and --y csv files required");
  Tensor X = read_numeric_csv(xp), Y = read_numeric_csv(yp);
  mmd::KernelSpec spec = mmd::KernelSpec::gaussian(
      get_double_list(kv, "bandwidths", {0.1, 1.0, 10.0}));
  std::cout << std::setprecision(12);
  std::cout << "mmd2_biased " << mmd::mmd2_biased(X, Y, spec) << "\n";
  if (X.dim(0) == Y.dim(0) && X.dim(0) >= 2)
    std::cout << "mmd2_unbiased_paired " << mmd::mmd2_unbiased_paired(X, Y, spec)
              << "\n";
  return kExitOk;
}

// ---- dispatch ---------------------------------------------------------

int dispatch(const std::vector<std::string>& args) {
  if (args.empty()) {
    std::cerr << "usage: hduva <gen-scenario|train|eval-lodo|eval-auc|"
                 "plot-topics|gen-conditional|two-sample> [flags]\n";
    return kExitArgs;
  }
  const std::string cmd = args.front();
  ParsedArgs parsed =
      parse_args(std::vector<std::string>(args.begin() + 1, args.end()));
  if (cmd == "gen-scenario") return cmd_gen_scenario(parsed);
  if (cmd == "train") return cmd_train(parsed);
  if (cmd == "eval-lodo") return cmd_eval_lodo(parsed);
  if (cmd == "eval-auc") return cmd_eval_auc(parsed);
  if (cmd == "plot-topics") return cmd_plot_topics(parsed);
  if (cmd == "gen-conditional") return cmd_gen_conditional(parsed);
  if (cmd == "two-sample") return cmd_two_sample(parsed);
  std::cerr << "unknown command: " << cmd << "\n";
  return kExitArgs;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const training_error& e) {
    std::cerr << "training diverged (term " << e.term << "): " << e.what()
              << "\n";
    return kExitDiverged;
  } catch (const argument_error& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace hduva::cli
