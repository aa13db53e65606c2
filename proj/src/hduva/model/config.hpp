#pragma once

#include <string>

#include "hduva/core/errors.hpp"

namespace hduva::model {

enum class Variant { hduva, lhduva, deep_all };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Backbone conv_small is the two-block conv trunk used for small images;
// linear is a bias-free affine backbone for tiny analytically checkable
// instantiations.
enum class Backbone { conv_small, linear };

struct ModelConfig {
  int zx_dim = 64;
  int zy_dim = 64;
  int zd_dim = 64;
  int topic_dim = 3;  // K
  int num_classes = 10;
  int channels = 3;
  int height = 28;
  int width = 28;
  Variant variant = Variant::hduva;
  bool with_zx = true;
  bool decoder_uses_s = true;
  int topic_samples = 1;  // S
  Backbone backbone = Backbone::conv_small;
  int trunk_c1 = 32;
  int trunk_c2 = 64;

  // The reconstruction term conditions on s for hduva but not lhduva;
  // call after setting variant unless the flag was chosen explicitly.
  void apply_variant_default_decoder_s() {
    decoder_uses_s = (variant == Variant::hduva);
  }

  int image_size() const { return channels * height * width; }
  int decoder_input_dim() const {
    return (decoder_uses_s ? topic_dim : 0) + zd_dim + (with_zx ? zx_dim : 0) +
           zy_dim;
  }

  void validate() const {
    if (zy_dim < 1 || zd_dim < 1 || (with_zx && zx_dim < 1))
      throw argument_error("ModelConfig: latent dims must be >= 1");
    if (topic_dim < 1) throw argument_error("ModelConfig: topic_dim must be >= 1");
    if (num_classes < 2) throw argument_error("ModelConfig: need >= 2 classes");
    if (channels < 1 || height < 1 || width < 1)
      throw argument_error("ModelConfig: bad image shape");
    if (topic_samples < 1)
      throw argument_error("ModelConfig: topic_samples must be >= 1");
  }
};

}  // namespace hduva::model
