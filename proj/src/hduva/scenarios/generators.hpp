#pragma once

#include <cstdint>
#include <string>

#include "hduva/scenarios/manifest.hpp"
#include "hduva/scenarios/palette.hpp"

namespace hduva::scen {

inline constexpr const char* kGeneratorVersion = "hduva-gen-1";

struct GenOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string data_dir;  // root holding mnist/ and malaria/ corpora
};

// 3 nominal domains x 2 color-scheme sub-domains, 1000 base images each,
// foreground and background colored; sub-domain identity recorded but only
// the nominal label is meant for supervised baselines.
ScenarioManifest gen_color_hierarchical(const GenOptions& opt);

// 7 zipped color schemes -> nominal domains {1-3},{3-5},{5-7}; overlapping
// schemes share the very same colored images; domain 2 is a bridge; 50/50
// train/val split per nominal domain.
ScenarioManifest gen_color_sequential(const PaletteSpec& palette,
                                      const GenOptions& opt);

enum class RotatedMode { workshop, erratum };

// Two training domains rotating one 1000-image subset by {15,30,45} and
// {30,45,60} degrees (30/45 shared). Test rotations 0/22/75: from the same
// subset in workshop mode, from the full 60k corpus in erratum mode.
ScenarioManifest gen_rotated_overlap(RotatedMode mode, const GenOptions& opt);

// Groups a user-supplied malaria cell corpus into virtual hospitals
// C1/C6/C8/C9 by patient-ID prefix; trains on a 20% sample of C6+C8+C9 and
// tests on C1. Emits reference-count conformance results in the sidecar.
ScenarioManifest gen_virtual_hospitals(const GenOptions& opt);

struct ToyOptions {
  int num_domains = 3;
  int subs_per_domain = 2;
  int per_sub = 200;
  int image_size = 16;
  int num_classes = 3;
};

// Hierarchical color scenario over procedural glyphs; no external corpus.
ScenarioManifest gen_toy_hier(const ToyOptions& toy, const GenOptions& opt);

}  // namespace hduva::scen
