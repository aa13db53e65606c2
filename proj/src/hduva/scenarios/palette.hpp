#pragma once

#include <string>
#include <vector>

#include "hduva/scenarios/image.hpp"

namespace hduva::scen {

// Seven background hues spanning a declared range and seven foreground hues
// equally spaced over the full circle, zipped index-for-index. Saturation
// and lightness are fixed per role with enough contrast that blended
// foreground pixels never quantize onto the background color.
struct PaletteSpec {
  std::string name;
  std::vector<double> bg_hues;  // degrees
  std::vector<double> fg_hues;
  double bg_saturation = 0.55, bg_lightness = 0.65;
  double fg_saturation = 0.85, fg_lightness = 0.35;

  Rgb bg_color(int scheme) const;
  Rgb fg_color(int scheme) const;
  int schemes() const { return static_cast<int>(bg_hues.size()); }

  static PaletteSpec vlag();
  static PaletteSpec red_diverging();
  static PaletteSpec three_domain_basic();  // 6 schemes, 3 domains x 2 subs
  static PaletteSpec by_name(const std::string& name);
};

}  // namespace hduva::scen
