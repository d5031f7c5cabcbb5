#pragma once

#include <string>

#include "ic/geometry.hpp"
#include "ic/morphology.hpp"

namespace ic {

// Flat binary containers: 16-byte header (magic "ICHM"/"ICGF", u32 width,
// u32 height, f32 ppmm, little-endian) followed by row-major 32-bit float
// payloads (one for heights, gx then gy for gradients). Throws DataError on
// malformed files.

void save_height_map(const HeightMap& hm, const std::string& path);
HeightMap load_height_map(const std::string& path);

void save_gradient_field(const GradientField& g, const std::string& path);
GradientField load_gradient_field(const std::string& path);

/// 16-bit grayscale PNG visualization with a text sidecar (`<path>.scale`)
/// recording ppmm and the affine value range needed to invert the mapping.
void save_height_map_png16(const HeightMap& hm, const std::string& path);
HeightMap load_height_map_png16(const std::string& path);

/// 1-bit grayscale PNG masks.
void save_mask_png(const ContactMask& m, const std::string& path);
ContactMask load_mask_png(const std::string& path);

}  // namespace ic
