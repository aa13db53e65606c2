#include "hduva/scenarios/palette.hpp"

#include "hduva/core/errors.hpp"

namespace hduva::scen {
namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return v;
}

std::vector<double> circle_hues(int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 360.0 * static_cast<double>(i) / n;
  return v;
}

}  // namespace

Rgb PaletteSpec::bg_color(int scheme) const {
  return hsl_to_rgb(bg_hues.at(scheme), bg_saturation, bg_lightness);
}

Rgb PaletteSpec::fg_color(int scheme) const {
  return hsl_to_rgb(fg_hues.at(scheme), fg_saturation, fg_lightness);
}

PaletteSpec PaletteSpec::vlag() {
  PaletteSpec p;
  p.name = "vlag";
  // Diverging cool-to-warm hue walk.
  p.bg_hues = linspace(250.0, 10.0, 7);
  p.fg_hues = circle_hues(7);
  return p;
}

PaletteSpec PaletteSpec::red_diverging() {
  PaletteSpec p;
  p.name = "red_diverging";
  p.bg_hues = linspace(0.0, 350.0, 7);
  p.fg_hues = circle_hues(7);
  return p;
}

PaletteSpec PaletteSpec::three_domain_basic() {
  PaletteSpec p;
  p.name = "three_domain_basic";
  p.bg_hues = {210.0, 180.0, 120.0, 90.0, 30.0, 0.0};
  p.fg_hues = {30.0, 0.0, 300.0, 270.0, 210.0, 180.0};
  return p;
}

PaletteSpec PaletteSpec::by_name(const std::string& name) {
  if (name == "vlag") return vlag();
  if (name == "red_diverging") return red_diverging();
  if (name == "three_domain_basic") return three_domain_basic();
  throw argument_error("unknown palette: " + name);
}

}  // namespace hduva::scen
