#pragma once

#include <cstdint>
#include <vector>

#include "ic/geometry.hpp"

namespace ic {

/// Per-frame binary contact indicator; dims match the originating height map.
struct ContactMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0/1

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
};

ContactMask make_mask(int width, int height, std::uint8_t fill = 0);

/// Filled discrete ellipse inscribed in a k x k box (k odd): per row offset
/// dy, the half-width of the span. Shared by dilation and erosion so the
/// pair stays an adjunction (which is what makes closing idempotent).
std::vector<int> ellipse_halfwidths(int k);

ContactMask dilate_ellipse(const ContactMask& m, int k, int iterations = 1);
ContactMask erode_ellipse(const ContactMask& m, int k, int iterations = 1);

/// Dilate-then-erode with the same element and iteration count.
ContactMask close_ellipse(const ContactMask& m, int k, int iterations = 1);

/// 8-connected component labelling. Labels are 1-based and assigned in
/// raster order of each component's first pixel, so the result is
/// deterministic.
struct ComponentLabels {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // 0 = background
  std::vector<std::size_t> areas;    // areas[i] = pixel count of label i+1
  int count() const { return static_cast<int>(areas.size()); }
};

ComponentLabels connected_components(const ContactMask& m);

/// Mask holding only the largest component (ties broken by smallest label).
/// Returns an empty mask when there are no components.
ContactMask largest_component(const ContactMask& m);

/// Pixels of the largest component with at least one 4-neighbour outside it
/// (image border counts as outside). Integer pixel centers.
std::vector<PixelCoord> boundary_of_largest(const ContactMask& m);

/// Centroid of a component's pixels (area moments).
PixelCoord pixel_centroid(const std::vector<PixelCoord>& pts);

}  // namespace ic
