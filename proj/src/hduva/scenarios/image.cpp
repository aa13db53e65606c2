#include "hduva/scenarios/image.hpp"

#include <cmath>
#include <fstream>

#include "hduva/core/errors.hpp"

namespace hduva::scen {

void write_image(const Image& img, const std::string& path) {
  if (img.c != 1 && img.c != 3)
    throw argument_error("write_image: channels must be 1 or 3");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write image: " + path);
  out << (img.c == 3 ? "P6" : "P5") << "\n"
      << img.w << " " << img.h << "\n255\n";
  // PPM is pixel-interleaved; our storage is channel-major.
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.w) * img.c);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x)
      for (int ch = 0; ch < img.c; ++ch)
        row[static_cast<std::size_t>(x) * img.c + ch] = img.at(ch, y, x);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw io_error("image write failed: " + path);
}

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6" && magic != "P5")
    throw io_error("unsupported image format (want P5/P6 PNM): " + path);
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  in.get();  // single whitespace after header
  if (w <= 0 || h <= 0 || maxval != 255)
    throw io_error("bad PNM header: " + path);
  const int c = magic == "P6" ? 3 : 1;
  Image img(c, h, w);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * c);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        img.at(ch, y, x) = row[static_cast<std::size_t>(x) * c + ch];
  }
  if (!in) throw io_error("truncated image: " + path);
  return img;
}

Tensor image_to_tensor(const Image& img) {
  Tensor t({img.c, img.h, img.w});
  for (std::size_t i = 0; i < img.px.size(); ++i)
    t[i] = static_cast<double>(img.px[i]) / 255.0;
  return t;
}

Image tensor_to_image(const Tensor& t) {
  if (t.ndim() != 3) throw argument_error("tensor_to_image: need [C,H,W]");
  Image img(t.dim(0), t.dim(1), t.dim(2));
  for (std::size_t i = 0; i < img.px.size(); ++i) {
    double v = t[i];
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    img.px[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

std::vector<bool> foreground_mask(const Image& gray) {
  if (gray.c != 1) throw argument_error("foreground_mask: need grayscale");
  std::uint8_t mx = 0;
  for (auto p : gray.px) mx = std::max(mx, p);
  const double thresh = 0.1 * static_cast<double>(mx);
  std::vector<bool> mask(gray.px.size());
  for (std::size_t i = 0; i < gray.px.size(); ++i)
    mask[i] = static_cast<double>(gray.px[i]) > thresh;
  return mask;
}

Image colorize(const Image& gray, const Rgb& fg, const Rgb& bg) {
  if (gray.c != 1) throw argument_error("colorize: need grayscale input");
  std::uint8_t mx = 0;
  for (auto p : gray.px) mx = std::max(mx, p);
  const double inv_max = mx > 0 ? 1.0 / static_cast<double>(mx) : 0.0;
  const std::vector<bool> mask = foreground_mask(gray);
  Image out(3, gray.h, gray.w);
  for (int y = 0; y < gray.h; ++y)
    for (int x = 0; x < gray.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * gray.w + x;
      for (int ch = 0; ch < 3; ++ch) {
        if (!mask[i]) {
          out.at(ch, y, x) = bg[ch];
          continue;
        }
        const double g = static_cast<double>(gray.px[i]) * inv_max;
        const double v = g * fg[ch] + (1.0 - g) * bg[ch];
        out.at(ch, y, x) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  return out;
}

Image rotate_bilinear(const Image& gray, double degrees) {
  if (gray.c != 1) throw argument_error("rotate_bilinear: need grayscale");
  const double rad = degrees * M_PI / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cy = (gray.h - 1) / 2.0, cx = (gray.w - 1) / 2.0;
  Image out(1, gray.h, gray.w);
  for (int y = 0; y < gray.h; ++y)
    for (int x = 0; x < gray.w; ++x) {
      // inverse map: rotate destination coords back into the source
      const double dy = y - cy, dx = x - cx;
      const double sy = cy + (sn * dx + cs * dy);
      const double sx = cx + (cs * dx - sn * dy);
      const int y0 = static_cast<int>(std::floor(sy));
      const int x0 = static_cast<int>(std::floor(sx));
      const double fy = sy - y0, fx = sx - x0;
      auto sample = [&](int yy, int xx) -> double {
        if (yy < 0 || yy >= gray.h || xx < 0 || xx >= gray.w) return 0.0;
        return static_cast<double>(gray.at(0, yy, xx));
      };
      const double v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                       fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
      out.at(0, y, x) = static_cast<std::uint8_t>(std::lround(std::min(255.0, std::max(0.0, v))));
    }
  return out;
}

Rgb hsl_to_rgb(double hue_deg, double saturation, double lightness) {
  double h = std::fmod(hue_deg, 360.0);
  if (h < 0) h += 360.0;
  const double c = (1.0 - std::fabs(2.0 * lightness - 1.0)) * saturation;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = lightness - c / 2.0;
  auto q = [&](double v) {
    return static_cast<std::uint8_t>(std::lround((v + m) * 255.0));
  };
  return {q(r), q(g), q(b)};
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
  const unsigned char* b = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t image_hash(const Image& img) {
  std::uint64_t h = fnv1a64(&img.c, sizeof(img.c));
  h = fnv1a64(&img.h, sizeof(img.h), h);
  h = fnv1a64(&img.w, sizeof(img.w), h);
  return fnv1a64(img.px.data(), img.px.size(), h);
}

}  // namespace hduva::scen
