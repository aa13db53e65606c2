#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hduva/core/tensor.hpp"

namespace hduva::scen {

// 8-bit image, channel-major like the tensors it feeds. c is 1 or 3.
struct Image {
  int c = 0, h = 0, w = 0;
  std::vector<std::uint8_t> px;

  Image() = default;
  Image(int c_, int h_, int w_) : c(c_), h(h_), w(w_), px(static_cast<std::size_t>(c_) * h_ * w_, 0) {}
  std::uint8_t& at(int ch, int y, int x) {
    return px[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }
  std::uint8_t at(int ch, int y, int x) const {
    return px[(static_cast<std::size_t>(ch) * h + y) * w + x];
  }
};

using Rgb = std::array<std::uint8_t, 3>;

// Binary PPM (P6) for 3-channel, PGM (P5) for 1-channel.
void write_image(const Image& img, const std::string& path);
Image read_image(const std::string& path);

Tensor image_to_tensor(const Image& img);  // [C,H,W] scaled to [0,1]
Image tensor_to_image(const Tensor& t);    // [C,H,W] in [0,1], rounded

// Foreground pixels carry intensity above 0.1 of the per-image maximum.
std::vector<bool> foreground_mask(const Image& gray);

// Blend of fg and bg by normalized intensity on foreground pixels;
// background pixels get the exact bg color.
Image colorize(const Image& gray, const Rgb& fg, const Rgb& bg);

// Bilinear rotation about the image center with zero padding.
Image rotate_bilinear(const Image& gray, double degrees);

Rgb hsl_to_rgb(double hue_deg, double saturation, double lightness);

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull);
std::uint64_t image_hash(const Image& img);

}  // namespace hduva::scen
