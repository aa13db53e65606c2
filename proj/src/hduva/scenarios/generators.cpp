#include "hduva/scenarios/generators.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hduva/core/errors.hpp"
#include "hduva/scenarios/idx.hpp"
#include "hduva/scenarios/synth.hpp"

namespace hduva::scen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex2(std::uint8_t v) {
  static const char* digits = "0123456789abcdef";
  return {digits[v >> 4], digits[v & 0xf]};
}

std::string color_tag(const Rgb& fg, const Rgb& bg) {
  return "fg=" + hex2(fg[0]) + hex2(fg[1]) + hex2(fg[2]) + ";bg=" + hex2(bg[0]) +
         hex2(bg[1]) + hex2(bg[2]);
}

IdxCorpus load_mnist(const std::string& data_dir) {
  const fs::path base = fs::path(data_dir) / "mnist";
  const std::string imgs = (base / "train-images-idx3-ubyte").string();
  const std::string labs = (base / "train-labels-idx1-ubyte").string();
  if (!fs::exists(imgs) || !fs::exists(labs))
    throw io_error(
        "base MNIST corpus not found; expected IDX files at " + imgs + " and " +
        labs + " (set HDUVA_DATA_DIR or --data-dir to the dataset root)");
  return read_idx(imgs, labs);
}

std::vector<int> sample_without_replacement(int n, int total, Rng& rng) {
  if (n > total)
    throw argument_error("sample_without_replacement: not enough base images");
  std::vector<int> idx(total);
  for (int i = 0; i < total; ++i) idx[i] = i;
  // partial Fisher-Yates
  for (int i = 0; i < n; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(total - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

std::string palette_json(const PaletteSpec& p) {
  json j;
  j["name"] = p.name;
  j["bg_hues"] = p.bg_hues;
  j["fg_hues"] = p.fg_hues;
  j["bg_saturation"] = p.bg_saturation;
  j["bg_lightness"] = p.bg_lightness;
  j["fg_saturation"] = p.fg_saturation;
  j["fg_lightness"] = p.fg_lightness;
  return j.dump();
}

}  // namespace

ScenarioManifest gen_color_hierarchical(const GenOptions& opt) {
  const IdxCorpus mnist = load_mnist(opt.data_dir);
  const PaletteSpec pal = PaletteSpec::three_domain_basic();
  ScenarioManifest m;
  m.scenario_id = "color-hier";
  m.seed = opt.seed;
  m.generator_version = kGeneratorVersion;
  m.extra_meta_json = std::string("{\"palette\":") + palette_json(pal) + "}";

  fs::create_directories(fs::path(opt.out_dir) / "images");
  Rng root(opt.seed);
  const int per_sub = 1000;
  for (int d = 0; d < 3; ++d) {
    const std::string dom = "domain" + std::to_string(d + 1);
    m.domains.push_back(dom);
    for (int s = 0; s < 2; ++s) {
      const int scheme = 2 * d + s;
      const Rgb fg = pal.fg_color(scheme), bg = pal.bg_color(scheme);
      Rng rng = root.split(static_cast<std::uint64_t>(scheme) + 1);
      const std::vector<int> picks = sample_without_replacement(
          per_sub, static_cast<int>(mnist.images.size()), rng);
      for (int i = 0; i < per_sub; ++i) {
        const Image colored = colorize(mnist.images[picks[i]], fg, bg);
        std::ostringstream rel;
        rel << "images/d" << d << "_s" << s << "_" << i << ".ppm";
        write_image(colored, (fs::path(opt.out_dir) / rel.str()).string());
        Instance ins;
        ins.path = rel.str();
        ins.class_label = mnist.labels[picks[i]];
        ins.nominal_domain = dom;
        ins.sub_domain = "scheme" + std::to_string(scheme);
        ins.transform = color_tag(fg, bg);
        ins.split = "train";
        m.instances.push_back(std::move(ins));
      }
    }
  }
  write_manifest(m, opt.out_dir);
  return m;
}

ScenarioManifest gen_color_sequential(const PaletteSpec& palette,
                                      const GenOptions& opt) {
  if (palette.schemes() != 7)
    throw argument_error("gen_color_sequential: palette needs 7 schemes");
  const IdxCorpus mnist = load_mnist(opt.data_dir);
  ScenarioManifest m;
  m.scenario_id = "color-seq-" + palette.name;
  m.seed = opt.seed;
  m.generator_version = kGeneratorVersion;
  m.extra_meta_json = std::string("{\"palette\":") + palette_json(palette) + "}";

  // Nominal domains over schemes {0,1,2}, {2,3,4}, {4,5,6}; a scheme's base
  // sample is drawn with the seed of the first domain containing it, so
  // overlapping schemes reuse identical colored images.
  const int domain_of_scheme[7] = {0, 0, 0, 1, 1, 2, 2};
  const int schemes_of_domain[3][3] = {{0, 1, 2}, {2, 3, 4}, {4, 5, 6}};
  const int per_sub = 1000;

  fs::create_directories(fs::path(opt.out_dir) / "images");
  Rng root(opt.seed);
  std::vector<std::vector<int>> scheme_picks(7);
  std::vector<std::vector<std::string>> scheme_paths(7);
  for (int sc = 0; sc < 7; ++sc) {
    Rng rng = root.split(static_cast<std::uint64_t>(domain_of_scheme[sc]) + 1);
    // shared domain seed: consume the stream per scheme position inside the
    // domain so the sub-domains differ while the seed is shared
    const int pos = sc - schemes_of_domain[domain_of_scheme[sc]][0];
    for (int skip = 0; skip < pos; ++skip)
      sample_without_replacement(per_sub, static_cast<int>(mnist.images.size()), rng);
    scheme_picks[sc] = sample_without_replacement(
        per_sub, static_cast<int>(mnist.images.size()), rng);
    const Rgb fg = palette.fg_color(sc), bg = palette.bg_color(sc);
    scheme_paths[sc].resize(per_sub);
    for (int i = 0; i < per_sub; ++i) {
      const Image colored = colorize(mnist.images[scheme_picks[sc][i]], fg, bg);
      std::ostringstream rel;
      rel << "images/scheme" << sc << "_" << i << ".ppm";
      write_image(colored, (fs::path(opt.out_dir) / rel.str()).string());
      scheme_paths[sc][i] = rel.str();
    }
  }

  Rng split_rng = root.split(101);
  for (int d = 0; d < 3; ++d) {
    const std::string dom = "domain" + std::to_string(d + 1);
    m.domains.push_back(dom);
    std::vector<Instance> rows;
    for (int k = 0; k < 3; ++k) {
      const int sc = schemes_of_domain[d][k];
      const Rgb fg = palette.fg_color(sc), bg = palette.bg_color(sc);
      for (int i = 0; i < per_sub; ++i) {
        Instance ins;
        ins.path = scheme_paths[sc][i];
        ins.class_label = mnist.labels[scheme_picks[sc][i]];
        ins.nominal_domain = dom;
        ins.sub_domain = "scheme" + std::to_string(sc);
        ins.transform = color_tag(fg, bg);
        rows.push_back(std::move(ins));
      }
    }
    // 50 percent train, rest validation, per nominal domain.
    std::vector<int> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[split_rng.below(i)]);
    for (std::size_t i = 0; i < order.size(); ++i)
      rows[order[i]].split = i < order.size() / 2 ? "train" : "val";
    for (auto& r : rows) m.instances.push_back(std::move(r));
  }
  m.bridge_domains = {"domain2"};
  write_manifest(m, opt.out_dir);
  return m;
}

ScenarioManifest gen_rotated_overlap(RotatedMode mode, const GenOptions& opt) {
  const IdxCorpus mnist = load_mnist(opt.data_dir);
  ScenarioManifest m;
  m.scenario_id = mode == RotatedMode::workshop ? "rotated-overlap-workshop"
                                                : "rotated-overlap-erratum";
  m.seed = opt.seed;
  m.generator_version = kGeneratorVersion;

  fs::create_directories(fs::path(opt.out_dir) / "images");
  Rng root(opt.seed);
  Rng pick_rng = root.split(1);
  const int n_base = 1000;
  const std::vector<int> picks = sample_without_replacement(
      n_base, static_cast<int>(mnist.images.size()), pick_rng);

  // One shared pool of rotated training images keyed by (angle, index).
  const int train_angles[4] = {15, 30, 45, 60};
  std::map<int, std::vector<std::string>> angle_paths;
  for (int angle : train_angles) {
    auto& paths = angle_paths[angle];
    paths.resize(n_base);
    for (int i = 0; i < n_base; ++i) {
      const Image rot = rotate_bilinear(mnist.images[picks[i]], angle);
      std::ostringstream rel;
      rel << "images/rot" << angle << "_" << i << ".pgm";
      write_image(rot, (fs::path(opt.out_dir) / rel.str()).string());
      paths[i] = rel.str();
    }
  }

  const std::vector<std::vector<int>> domain_angles = {{15, 30, 45}, {30, 45, 60}};
  for (std::size_t d = 0; d < domain_angles.size(); ++d) {
    const std::string dom = "domain" + std::to_string(d + 1);
    m.domains.push_back(dom);
    for (int angle : domain_angles[d])
      for (int i = 0; i < n_base; ++i) {
        Instance ins;
        ins.path = angle_paths[angle][i];
        ins.class_label = mnist.labels[picks[i]];
        ins.nominal_domain = dom;
        ins.sub_domain = "rot" + std::to_string(angle);
        ins.transform = "angle=" + std::to_string(angle);
        ins.split = "train";
        m.instances.push_back(std::move(ins));
      }
  }

  const int test_angles[3] = {0, 22, 75};
  for (int angle : test_angles) {
    const std::string dom = "test_rot" + std::to_string(angle);
    m.domains.push_back(dom);
    if (mode == RotatedMode::workshop) {
      for (int i = 0; i < n_base; ++i) {
        const Image rot = rotate_bilinear(mnist.images[picks[i]], angle);
        std::ostringstream rel;
        rel << "images/test" << angle << "_" << i << ".pgm";
        write_image(rot, (fs::path(opt.out_dir) / rel.str()).string());
        Instance ins;
        ins.path = rel.str();
        ins.class_label = mnist.labels[picks[i]];
        ins.nominal_domain = dom;
        ins.sub_domain = "rot" + std::to_string(angle);
        ins.transform = "angle=" + std::to_string(angle);
        ins.split = "test";
        m.instances.push_back(std::move(ins));
      }
    } else {
      // Erratum: the whole corpus rotated by the test angle.
      for (std::size_t i = 0; i < mnist.images.size(); ++i) {
        const Image rot = rotate_bilinear(mnist.images[i], angle);
        std::ostringstream rel;
        rel << "images/test" << angle << "_" << i << ".pgm";
        write_image(rot, (fs::path(opt.out_dir) / rel.str()).string());
        Instance ins;
        ins.path = rel.str();
        ins.class_label = mnist.labels[i];
        ins.nominal_domain = dom;
        ins.sub_domain = "rot" + std::to_string(angle);
        ins.transform = "angle=" + std::to_string(angle);
        ins.split = "test";
        m.instances.push_back(std::move(ins));
      }
    }
  }
  write_manifest(m, opt.out_dir);
  return m;
}

namespace {

struct HospitalRef {
  const char* key;
  int patients;
  int infected;
  int total;
};
// Reference counts from the virtual-hospital construction.
constexpr HospitalRef kHospitalRefs[] = {{"C1", 90, 8023, 14190},
                                         {"C6", 10, 1061, 1748},
                                         {"C8", 10, 957, 1638},
                                         {"C9", 10, 1284, 1964}};

std::string patient_id_of(const std::string& filename) {
  // Leading token C<digits>P<digits>.
  if (filename.empty() || filename[0] != 'C') return "";
  std::size_t i = 1;
  while (i < filename.size() && std::isdigit(static_cast<unsigned char>(filename[i]))) ++i;
  if (i == 1 || i >= filename.size() || filename[i] != 'P') return "";
  std::size_t j = i + 1;
  while (j < filename.size() && std::isdigit(static_cast<unsigned char>(filename[j]))) ++j;
  if (j == i + 1) return "";
  return filename.substr(0, j);
}

std::string hospital_of(const std::string& patient_id) {
  const std::size_t p = patient_id.find('P');
  return patient_id.substr(0, p);
}

}  // namespace

ScenarioManifest gen_virtual_hospitals(const GenOptions& opt) {
  const fs::path base = fs::path(opt.data_dir) / "malaria";
  if (!fs::exists(base / "Parasitized") || !fs::exists(base / "Uninfected"))
    throw io_error(
        "malaria cell corpus not found under " + base.string() +
        "; expected Parasitized/ and Uninfected/ directories of PNM cell "
        "images named C<num>P<num>... (NIH malaria cell dataset, converted)");

  struct Cell {
    std::string path;
    std::string patient;
    std::string hospital;
    int infected;
  };
  std::vector<Cell> cells;
  for (int infected = 0; infected <= 1; ++infected) {
    const fs::path dir = base / (infected ? "Parasitized" : "Uninfected");
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string pid = patient_id_of(f);
      if (pid.empty()) continue;
      const std::string hosp = hospital_of(pid);
      if (hosp != "C1" && hosp != "C6" && hosp != "C8" && hosp != "C9") continue;
      cells.push_back({(dir / f).string(), pid, hosp, infected});
    }
  }
  if (cells.empty())
    throw io_error("malaria corpus at " + base.string() +
                   " holds no parseable C<num>P<num> cell images");

  // Conformance counts against the reference table.
  std::map<std::string, std::set<std::string>> patients;
  std::map<std::string, int> totals, infected_counts;
  for (const auto& c : cells) {
    patients[c.hospital].insert(c.patient);
    totals[c.hospital] += 1;
    infected_counts[c.hospital] += c.infected;
  }
  json conf = json::array();
  bool conformant = true;
  for (const auto& ref : kHospitalRefs) {
    json row;
    row["hospital"] = ref.key;
    row["expected"] = {{"patients", ref.patients},
                       {"infected", ref.infected},
                       {"total", ref.total}};
    row["actual"] = {{"patients", static_cast<int>(patients[ref.key].size())},
                     {"infected", infected_counts[ref.key]},
                     {"total", totals[ref.key]}};
    const bool ok = static_cast<int>(patients[ref.key].size()) == ref.patients &&
                    infected_counts[ref.key] == ref.infected &&
                    totals[ref.key] == ref.total;
    row["matches_reference"] = ok;
    conformant = conformant && ok;
    conf.push_back(row);
  }

  ScenarioManifest m;
  m.scenario_id = "virtual-hospitals";
  m.seed = opt.seed;
  m.generator_version = kGeneratorVersion;
  m.domains = {"C6", "C8", "C9", "C1"};
  json extra;
  extra["conformance"] = conf;
  extra["conformant"] = conformant;
  m.extra_meta_json = extra.dump();

  // Train: 20% sample of C6+C8+C9; test: all of C1.
  Rng rng(opt.seed);
  std::vector<int> train_pool;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].hospital != "C1") train_pool.push_back(static_cast<int>(i));
  const int n_train = static_cast<int>(train_pool.size()) / 5;
  for (std::size_t i = train_pool.size(); i > 1; --i)
    std::swap(train_pool[i - 1], train_pool[rng.below(i)]);
  std::set<int> train_set(train_pool.begin(), train_pool.begin() + n_train);

  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const bool is_test = c.hospital == "C1";
    if (!is_test && train_set.count(static_cast<int>(i)) == 0) continue;
    Instance ins;
    ins.path = c.path;  // absolute reference into the user corpus
    ins.class_label = c.infected;
    ins.nominal_domain = c.hospital;
    ins.sub_domain = c.patient;
    ins.transform = "";
    ins.split = is_test ? "test" : "train";
    m.instances.push_back(std::move(ins));
  }
  fs::create_directories(opt.out_dir);
  write_manifest(m, opt.out_dir);
  return m;
}

ScenarioManifest gen_toy_hier(const ToyOptions& toy, const GenOptions& opt) {
  if (toy.num_domains * toy.subs_per_domain > 6)
    throw argument_error("gen_toy_hier: at most 6 sub-domains (palette size)");
  const PaletteSpec pal = PaletteSpec::three_domain_basic();
  ScenarioManifest m;
  m.scenario_id = "toy-hier";
  m.seed = opt.seed;
  m.generator_version = kGeneratorVersion;
  m.extra_meta_json = std::string("{\"palette\":") + palette_json(pal) + "}";

  fs::create_directories(fs::path(opt.out_dir) / "images");
  Rng root(opt.seed);
  for (int d = 0; d < toy.num_domains; ++d) {
    const std::string dom = "domain" + std::to_string(d + 1);
    m.domains.push_back(dom);
    for (int s = 0; s < toy.subs_per_domain; ++s) {
      const int scheme = d * toy.subs_per_domain + s;
      const Rgb fg = pal.fg_color(scheme), bg = pal.bg_color(scheme);
      Rng rng = root.split(static_cast<std::uint64_t>(scheme) + 1);
      for (int i = 0; i < toy.per_sub; ++i) {
        const int cls = static_cast<int>(rng.below(toy.num_classes));
        const Image glyph = synth_glyph(cls, toy.image_size, toy.image_size, rng);
        const Image colored = colorize(glyph, fg, bg);
        std::ostringstream rel;
        rel << "images/d" << d << "_s" << s << "_" << i << ".ppm";
        write_image(colored, (fs::path(opt.out_dir) / rel.str()).string());
        Instance ins;
        ins.path = rel.str();
        ins.class_label = cls;
        ins.nominal_domain = dom;
        ins.sub_domain = "scheme" + std::to_string(scheme);
        ins.transform = color_tag(fg, bg);
        ins.split = "train";
        m.instances.push_back(std::move(ins));
      }
    }
  }
  write_manifest(m, opt.out_dir);
  return m;
}

}  // namespace hduva::scen
