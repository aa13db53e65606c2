#pragma once

#include <cstdint>
#include <string>

#include "hduva/core/rng.hpp"
#include "hduva/scenarios/idx.hpp"
#include "hduva/scenarios/image.hpp"

namespace hduva::scen {

// Procedural glyph renderer: ten stroke-based shapes with per-instance
// jitter, used as an offline stand-in corpus and for the toy scenarios.
// Output intensity is normalized so the per-image maximum is 255.
Image synth_glyph(int class_label, int h, int w, Rng& rng);

// Writes an IDX corpus of n glyphs with labels cycling 0..num_classes-1.
void write_synthetic_idx(const std::string& images_path,
                         const std::string& labels_path, int n, int h, int w,
                         int num_classes, std::uint64_t seed);

}  // namespace hduva::scen
