#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "hduva/core/errors.hpp"
#include "hduva/scenarios/dataset.hpp"
#include "hduva/scenarios/evaluate.hpp"
#include "hduva/scenarios/generators.hpp"
#include "hduva/scenarios/idx.hpp"
#include "hduva/scenarios/synth.hpp"
#include "test_util.hpp"

using namespace hduva;
using namespace hduva::scen;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path path;
  explicit TmpDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("hduva_scen_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TmpDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// Writes a small synthetic IDX corpus under dir/mnist/.
void make_base_corpus(const fs::path& dir, int n, int hw = 28) {
  fs::create_directories(dir / "mnist");
  write_synthetic_idx((dir / "mnist" / "train-images-idx3-ubyte").string(),
                      (dir / "mnist" / "train-labels-idx1-ubyte").string(), n,
                      hw, hw, 10, 4242);
}

}  // namespace

TEST_CASE("synthetic IDX corpus round trip and determinism") {
  TmpDir tmp("idx");
  make_base_corpus(tmp.path, 200, 16);
  IdxCorpus c = read_idx((tmp.path / "mnist" / "train-images-idx3-ubyte").string(),
                         (tmp.path / "mnist" / "train-labels-idx1-ubyte").string());
  CHECK(c.images.size() == 200);
  CHECK(c.rows == 16);
  CHECK(c.labels[0] == 0);
  CHECK(c.labels[13] == 3);
  // Each glyph reaches full intensity somewhere.
  std::uint8_t mx = 0;
  for (auto p : c.images[0].px) mx = std::max(mx, p);
  CHECK(mx == 255);

  TmpDir tmp2("idx2");
  make_base_corpus(tmp2.path, 200, 16);
  IdxCorpus c2 = read_idx((tmp2.path / "mnist" / "train-images-idx3-ubyte").string(),
                          (tmp2.path / "mnist" / "train-labels-idx1-ubyte").string());
  CHECK(image_hash(c.images[7]) == image_hash(c2.images[7]));
}

TEST_CASE("rotation: zero degrees is the identity, pivot is the center") {
  Rng rng(51);
  Image img(1, 15, 15);
  for (auto& p : img.px) p = static_cast<std::uint8_t>(rng.below(256));
  Image same = rotate_bilinear(img, 0.0);
  CHECK(image_hash(same) == image_hash(img));

  // 180-degree rotation of a centered point pattern maps onto itself.
  Image dot(1, 15, 15);
  dot.at(0, 7, 7) = 255;
  Image flipped = rotate_bilinear(dot, 180.0);
  CHECK(static_cast<int>(flipped.at(0, 7, 7)) == 255);
}

TEST_CASE("coloring keeps the foreground mask and geometry intact") {
  Rng rng(52);
  for (int t = 0; t < 10; ++t) {
    Image glyph = synth_glyph(static_cast<int>(rng.below(10)), 16, 16, rng);
    const PaletteSpec pal = PaletteSpec::three_domain_basic();
    const int scheme = static_cast<int>(rng.below(6));
    const Rgb fg = pal.fg_color(scheme), bg = pal.bg_color(scheme);
    Image colored = colorize(glyph, fg, bg);
    const std::vector<bool> before = foreground_mask(glyph);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * 16 + x;
        const bool differs = colored.at(0, y, x) != bg[0] ||
                             colored.at(1, y, x) != bg[1] ||
                             colored.at(2, y, x) != bg[2];
        CHECK(differs == before[i]);
      }
  }
}

TEST_CASE("palette construction invariants") {
  for (const auto& pal : {PaletteSpec::vlag(), PaletteSpec::red_diverging()}) {
    CHECK(pal.schemes() == 7);
    // Foreground hues equally spaced over the circle.
    for (int i = 1; i < 7; ++i)
      CHECK(pal.fg_hues[i] - pal.fg_hues[i - 1] ==
            doctest::Approx(360.0 / 7).epsilon(1e-12));
    // Each zipped pair has clear channel contrast in RGB.
    for (int i = 0; i < 7; ++i) {
      const Rgb f = pal.fg_color(i), b = pal.bg_color(i);
      int maxdiff = 0;
      for (int c = 0; c < 3; ++c)
        maxdiff = std::max(maxdiff, std::abs(int(f[c]) - int(b[c])));
      CHECK(maxdiff >= 50);
    }
  }
  CHECK(hsl_to_rgb(0.0, 1.0, 0.5)[0] == 255);
  CHECK(hsl_to_rgb(0.0, 1.0, 0.5)[1] == 0);
  CHECK_THROWS_AS(PaletteSpec::by_name("nope"), argument_error);
}

TEST_CASE("toy hierarchical scenario: counts, determinism, manifest round trip") {
  TmpDir a("toyA"), b("toyB");
  GenOptions opt;
  opt.out_dir = a.str();
  opt.seed = 5;
  ToyOptions toy;
  toy.num_domains = 3;
  toy.subs_per_domain = 2;
  toy.per_sub = 12;
  toy.image_size = 12;
  ScenarioManifest m1 = gen_toy_hier(toy, opt);
  CHECK(m1.instances.size() == 3 * 2 * 12);
  CHECK(m1.domains.size() == 3);

  opt.out_dir = b.str();
  ScenarioManifest m2 = gen_toy_hier(toy, opt);
  CHECK(m1.content_hash == m2.content_hash);

  opt.seed = 6;
  ScenarioManifest m3 = gen_toy_hier(toy, opt);
  CHECK(m3.content_hash != m1.content_hash);

  ScenarioManifest back = read_manifest(a.str());
  CHECK(back.scenario_id == m1.scenario_id);
  CHECK(back.content_hash == m1.content_hash);
  CHECK(back.instances.size() == m1.instances.size());
  CHECK(back.instances[5].nominal_domain == m1.instances[5].nominal_domain);
}

TEST_CASE("color-hier keeps base class histogram; sub-domain metadata present") {
  TmpDir data("mnist_hier");
  make_base_corpus(data.path, 2100, 14);
  TmpDir out("hier_out");
  GenOptions opt;
  opt.out_dir = out.str();
  opt.seed = 3;
  opt.data_dir = data.str();
  ScenarioManifest m = gen_color_hierarchical(opt);
  CHECK(m.instances.size() == 6000);
  CHECK(m.domains.size() == 3);
  std::set<std::string> subs;
  std::map<int, int> histogram;
  for (const auto& ins : m.instances) {
    subs.insert(ins.sub_domain);
    histogram[ins.class_label]++;
    CHECK(!ins.sub_domain.empty());
  }
  CHECK(subs.size() == 6);
  // Labels must be valid base labels 0..9.
  for (const auto& [cls, n] : histogram) {
    CHECK(cls >= 0);
    CHECK(cls <= 9);
    CHECK(n > 0);
  }

  // Coloring-only relabeling: every instance keeps its base image label.
  IdxCorpus base =
      read_idx((data.path / "mnist" / "train-images-idx3-ubyte").string(),
               (data.path / "mnist" / "train-labels-idx1-ubyte").string());
  // Spot-check a few instances by re-deriving the mask from the color file.
  for (int i = 0; i < 5; ++i) {
    const Instance& ins = m.instances[i * 997 % m.instances.size()];
    Image img = read_image(resolve_instance_path(out.str(), ins.path));
    CHECK(img.c == 3);
    CHECK(img.h == 14);
  }
}

TEST_CASE("missing base corpus raises an io error naming the path") {
  TmpDir out("nohier");
  GenOptions opt;
  opt.out_dir = out.str();
  opt.seed = 1;
  opt.data_dir = (out.path / "nowhere").string();
  try {
    gen_color_hierarchical(opt);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("train-images-idx3-ubyte") != std::string::npos);
  }
}

TEST_CASE("sequential scenario: bridge flag, split halves, shared overlap images") {
  TmpDir data("mnist_seq");
  make_base_corpus(data.path, 1200, 12);
  TmpDir out("seq_out");
  GenOptions opt;
  opt.out_dir = out.str();
  opt.seed = 9;
  opt.data_dir = data.str();
  ScenarioManifest m = gen_color_sequential(PaletteSpec::vlag(), opt);
  CHECK(m.instances.size() == 9000);  // 3 domains x 3 schemes x 1000
  CHECK(m.bridge_domains == std::vector<std::string>{"domain2"});
  CHECK(m.test_rotation_domains() ==
        std::vector<std::string>({"domain1", "domain3"}));

  std::map<std::string, std::map<std::string, int>> split_counts;
  std::map<std::string, std::set<std::string>> paths_by_domain_scheme;
  for (const auto& ins : m.instances) {
    split_counts[ins.nominal_domain][ins.split]++;
    paths_by_domain_scheme[ins.nominal_domain + "/" + ins.sub_domain].insert(
        ins.path);
  }
  for (const auto& [dom, counts] : split_counts) {
    CHECK(counts.at("train") == 1500);
    CHECK(counts.at("val") == 1500);
  }
  // Overlapping schemes share the very same files.
  CHECK(paths_by_domain_scheme["domain1/scheme2"] ==
        paths_by_domain_scheme["domain2/scheme2"]);
  CHECK(paths_by_domain_scheme["domain2/scheme4"] ==
        paths_by_domain_scheme["domain3/scheme4"]);
}

TEST_CASE("rotated overlap workshop: domain sizes and shared rotations") {
  TmpDir data("mnist_rot");
  make_base_corpus(data.path, 1100, 12);
  TmpDir out("rot_out");
  GenOptions opt;
  opt.out_dir = out.str();
  opt.seed = 7;
  opt.data_dir = data.str();
  ScenarioManifest m = gen_rotated_overlap(RotatedMode::workshop, opt);

  std::map<std::string, int> train_counts;
  std::map<std::string, std::set<std::string>> paths;
  int test_count = 0;
  for (const auto& ins : m.instances) {
    if (ins.split == "train") {
      train_counts[ins.nominal_domain]++;
      paths[ins.nominal_domain + "/" + ins.sub_domain].insert(ins.path);
    } else {
      ++test_count;
    }
  }
  CHECK(train_counts["domain1"] == 3000);
  CHECK(train_counts["domain2"] == 3000);
  CHECK(test_count == 3000);  // three test rotations of the same 1000 samples
  // Shared rotations point at identical files (2000 shared instances).
  CHECK(paths["domain1/rot30"] == paths["domain2/rot30"]);
  CHECK(paths["domain1/rot45"] == paths["domain2/rot45"]);
  CHECK(paths["domain1/rot15"] != paths["domain2/rot60"]);

  // Determinism across reruns.
  TmpDir out2("rot_out2");
  opt.out_dir = out2.str();
  ScenarioManifest m2 = gen_rotated_overlap(RotatedMode::workshop, opt);
  CHECK(m.content_hash == m2.content_hash);
}

TEST_CASE("virtual hospitals: grouping, sampling and conformance reporting") {
  TmpDir data("malaria");
  const fs::path base = data.path / "malaria";
  fs::create_directories(base / "Parasitized");
  fs::create_directories(base / "Uninfected");
  Rng rng(77);
  // Miniature corpus: intentionally NOT matching the reference counts.
  auto put = [&](const std::string& patient, int infected, int n) {
    for (int i = 0; i < n; ++i) {
      Image cell(3, 6, 6);
      for (auto& p : cell.px) p = static_cast<std::uint8_t>(rng.below(256));
      const fs::path dir = base / (infected ? "Parasitized" : "Uninfected");
      write_image(cell, (dir / (patient + "ThinF_IMG_" + std::to_string(i) +
                                "_cell.ppm")).string());
    }
  };
  put("C1P01", 1, 4);
  put("C1P02", 0, 6);
  put("C6P03", 1, 5);
  put("C6P04", 0, 5);
  put("C8P05", 1, 5);
  put("C8P06", 0, 5);
  put("C9P07", 1, 5);
  put("C9P08", 0, 5);
  put("C3P99", 1, 3);  // outside the virtual hospitals; ignored

  TmpDir out("hosp_out");
  GenOptions opt;
  opt.out_dir = out.str();
  opt.seed = 4;
  opt.data_dir = data.str();
  ScenarioManifest m = gen_virtual_hospitals(opt);

  std::map<std::string, int> counts;
  std::map<std::string, std::set<std::string>> hospital_of_patient;
  int train = 0, test = 0;
  for (const auto& ins : m.instances) {
    counts[ins.nominal_domain]++;
    hospital_of_patient[ins.sub_domain].insert(ins.nominal_domain);
    (ins.split == "train" ? train : test)++;
    CHECK(ins.nominal_domain != "C3");
  }
  CHECK(counts["C1"] == 10);  // all of C1 is test
  CHECK(test == 10);
  CHECK(train == 30 / 5);  // 20% of C6+C8+C9 (30 cells)
  for (const auto& [patient, hospitals] : hospital_of_patient)
    CHECK(hospitals.size() == 1);
  CHECK(m.extra_meta_json.find("\"conformant\":false") != std::string::npos);

  // Missing corpus gives an acquisition hint.
  GenOptions missing = opt;
  missing.data_dir = (out.path / "void").string();
  try {
    gen_virtual_hospitals(missing);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    CHECK(std::string(e.what()).find("malaria") != std::string::npos);
  }
}

TEST_CASE("dataset loading, filtering and deterministic batching") {
  TmpDir tmp("ds");
  GenOptions opt;
  opt.out_dir = tmp.str();
  opt.seed = 8;
  ToyOptions toy;
  toy.num_domains = 3;
  toy.per_sub = 10;
  toy.image_size = 10;
  ScenarioManifest m = gen_toy_hier(toy, opt);

  DomainDataset all = DomainDataset::load(m, tmp.str(), {"train"});
  CHECK(all.size() == 60);
  CHECK(all.domains().size() == 3);
  CHECK(all.num_classes() == 3);

  DomainDataset excl = DomainDataset::load(m, tmp.str(), {"train"}, {"domain2"});
  CHECK(excl.domains().size() == 2);
  CHECK(excl.size() == 40);

  DomainDataset only = DomainDataset::load(m, tmp.str(), {}, {}, {"domain3"});
  CHECK(only.domains().size() == 1);
  CHECK(only.size() == 20);

  auto s1 = all.epoch_steps(8, 1, 0);
  auto s2 = all.epoch_steps(8, 1, 0);
  REQUIRE(!s1.empty());
  CHECK(s1.size() == s2.size());
  CHECK(testutil::max_abs_diff(s1[0][0].images, s2[0][0].images) == 0.0);
  CHECK(s1[0].size() == 3);  // one batch per domain
  CHECK(s1[0][1].images.dim(0) == 8);

  auto s3 = all.epoch_steps(8, 1, 1);  // different epoch shuffles differently
  bool differs = testutil::max_abs_diff(s1[0][0].images, s3[0][0].images) > 0;
  CHECK(differs);
  CHECK(all.split_hash() == DomainDataset::load(m, tmp.str(), {"train"}).split_hash());
}

TEST_CASE("trapezoid AUC") {
  CHECK(trapezoid_auc({0.7, 0.7, 0.7}) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(trapezoid_auc({1.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(trapezoid_auc({1.0, 0.5, 0.0}) == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(trapezoid_auc(one), argument_error);
}

TEST_CASE("mean silhouette separates well-clustered points") {
  Rng rng(91);
  const int N = 40;
  Tensor pts({2 * N, 2});
  std::vector<int> cl(2 * N);
  for (int i = 0; i < N; ++i) {
    pts.at(i, 0) = 0.05 * rng.normal();
    pts.at(i, 1) = 0.05 * rng.normal();
    cl[i] = 0;
    pts.at(N + i, 0) = 3.0 + 0.05 * rng.normal();
    pts.at(N + i, 1) = 3.0 + 0.05 * rng.normal();
    cl[N + i] = 1;
  }
  CHECK(mean_silhouette(pts, cl) > 0.8);

  // Interleaved labels on one blob hover near zero or below.
  std::vector<int> mixed(2 * N);
  for (int i = 0; i < 2 * N; ++i) mixed[i] = i % 2;
  Tensor blob({2 * N, 2});
  for (int i = 0; i < 2 * N; ++i) {
    blob.at(i, 0) = rng.normal();
    blob.at(i, 1) = rng.normal();
  }
  CHECK(mean_silhouette(blob, mixed) < 0.2);
}
