#include "hduva/scenarios/synth.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"

namespace hduva::scen {
namespace {

struct Seg {
  double x0, y0, x1, y1;
};
struct Ring {
  double cx, cy, r;
};

struct Glyph {
  std::vector<Seg> segs;
  std::vector<Ring> rings;
};

// Shapes in unit coordinates, visually distinct under coloring/rotation.
Glyph glyph_for(int cls) {
  Glyph g;
  switch (cls % 10) {
    case 0:
      g.rings.push_back({0.5, 0.5, 0.30});
      break;
    case 1:
      g.segs.push_back({0.5, 0.15, 0.5, 0.85});
      break;
    case 2:
      g.segs.push_back({0.2, 0.2, 0.8, 0.2});
      g.segs.push_back({0.8, 0.2, 0.2, 0.8});
      g.segs.push_back({0.2, 0.8, 0.8, 0.8});
      break;
    case 3:
      g.segs.push_back({0.25, 0.2, 0.75, 0.2});
      g.segs.push_back({0.25, 0.5, 0.75, 0.5});
      g.segs.push_back({0.25, 0.8, 0.75, 0.8});
      g.segs.push_back({0.75, 0.2, 0.75, 0.8});
      break;
    case 4:
      g.segs.push_back({0.25, 0.15, 0.25, 0.85});
      g.segs.push_back({0.75, 0.15, 0.75, 0.85});
      g.segs.push_back({0.25, 0.5, 0.75, 0.5});
      break;
    case 5:
      g.segs.push_back({0.75, 0.2, 0.25, 0.2});
      g.segs.push_back({0.25, 0.2, 0.25, 0.5});
      g.segs.push_back({0.25, 0.5, 0.75, 0.5});
      g.segs.push_back({0.75, 0.5, 0.75, 0.8});
      g.segs.push_back({0.75, 0.8, 0.25, 0.8});
      break;
    case 6:
      g.rings.push_back({0.5, 0.62, 0.22});
      g.segs.push_back({0.35, 0.15, 0.32, 0.5});
      break;
    case 7:
      g.segs.push_back({0.2, 0.2, 0.8, 0.2});
      g.segs.push_back({0.8, 0.2, 0.4, 0.85});
      break;
    case 8:
      g.rings.push_back({0.5, 0.32, 0.17});
      g.rings.push_back({0.5, 0.68, 0.19});
      break;
    default:
      g.rings.push_back({0.5, 0.35, 0.20});
      g.segs.push_back({0.70, 0.38, 0.65, 0.85});
      break;
  }
  return g;
}

double seg_dist(double px, double py, const Seg& s) {
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double wx = px - s.x0, wy = py - s.y0;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? (wx * vx + wy * vy) / len2 : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  const double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Image synth_glyph(int class_label, int h, int w, Rng& rng) {
  if (h < 8 || w < 8) throw argument_error("synth_glyph: image too small");
  Glyph g = glyph_for(class_label);
  // Per-instance jitter: shift, small rotation, stroke thickness.
  const double shift_x = rng.uniform(-0.06, 0.06);
  const double shift_y = rng.uniform(-0.06, 0.06);
  const double rot = rng.uniform(-0.26, 0.26);  // radians
  const double thick = rng.uniform(0.05, 0.085);
  const double cs = std::cos(rot), sn = std::sin(rot);

  Image img(1, h, w);
  double max_v = 0.0;
  std::vector<double> vals(static_cast<std::size_t>(h) * w, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // map pixel to jittered unit coordinates
      const double ux = (x + 0.5) / w - 0.5, uy = (y + 0.5) / h - 0.5;
      const double px = 0.5 + cs * ux - sn * uy - shift_x;
      const double py = 0.5 + sn * ux + cs * uy - shift_y;
      double d = 1e9;
      for (const auto& s : g.segs) d = std::min(d, seg_dist(px, py, s));
      for (const auto& r : g.rings) {
        const double dr = std::fabs(std::hypot(px - r.cx, py - r.cy) - r.r);
        d = std::min(d, dr);
      }
      double v = 1.0 - d / thick;
      if (v < 0.0) v = 0.0;
      vals[static_cast<std::size_t>(y) * w + x] = v;
      max_v = std::max(max_v, v);
    }
  const double scale = max_v > 0 ? 255.0 / max_v : 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    img.px[i] = static_cast<std::uint8_t>(std::lround(vals[i] * scale));
  return img;
}

void write_synthetic_idx(const std::string& images_path,
                         const std::string& labels_path, int n, int h, int w,
                         int num_classes, std::uint64_t seed) {
  if (num_classes < 1 || num_classes > 10)
    throw argument_error("write_synthetic_idx: num_classes must be 1..10");
  IdxCorpus c;
  c.rows = h;
  c.cols = w;
  Rng rng(seed);
  c.images.reserve(n);
  c.labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int cls = i % num_classes;
    c.images.push_back(synth_glyph(cls, h, w, rng));
    c.labels.push_back(cls);
  }
  write_idx(c, images_path, labels_path);
}

}  // namespace hduva::scen
