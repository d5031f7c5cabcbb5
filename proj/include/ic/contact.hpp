#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ic/geometry.hpp"
#include "ic/morphology.hpp"
#include "ic/reference_cloud.hpp"

namespace ic {

struct ContactParams {
  double depth_threshold_m = 0.2e-3;  // depression depth that counts as contact
  int kernel_px = 5;                  // mask cleanup element
  int kernel_iters = 1;
  int close_kernel_px = 7;            // centroid-path closing element
  int close_iters = 2;
  int border_margin_px = 2;
  bool use_area_moment = false;       // contour-mean centroid by default
};

/// ID-indexed contact subset of the reference cloud, lifted to 3-D with the
/// frame's own height map. ids are strictly increasing.
struct ContactSubset {
  std::vector<std::uint64_t> ids;
  std::vector<WorldPoint> world;
  int frame_index = 0;

  std::size_t size() const { return ids.size(); }
};

/// Depression threshold against the no-contact reference, optionally fused
/// with an auxiliary mask (the stand-in for a color-difference channel),
/// then dilate/erode cleanup. Throws std::invalid_argument on dim mismatch.
ContactMask build_contact_mask(const HeightMap& current, const HeightMap& reference,
                               double depth_threshold_m,
                               const ContactMask* aux_mask = nullptr,
                               int kernel_px = 5, int kernel_iters = 1);

/// Reference points whose rounded pixel coordinate is at least
/// `border_margin` from every edge and whose mask bit is set, lifted via the
/// frame height map. An empty result is valid.
ContactSubset extract_contact_subset(const ReferenceCloud& cloud, const ContactMask& mask,
                                     const HeightMap& hm, int border_margin);

/// Contact centroid: morphological closing, largest contour, mean of the
/// contour's points (or area moments when `use_area_moment`), lifted to 3-D.
/// Throws NoContactError when the mask is empty after closing.
WorldPoint contact_centroid(const ContactMask& mask, const HeightMap& hm,
                            int close_kernel_px = 7, int close_iters = 2,
                            bool use_area_moment = false);

/// Per-frame bundle consumed by the trackers.
struct ContactFrame {
  int frame_index = 0;
  HeightMap height;
  ContactMask mask;
  ContactSubset subset;
  std::optional<WorldPoint> centroid;  // empty when no contact survives closing

  bool has_contact() const { return centroid.has_value() && !subset.ids.empty(); }
};

ContactFrame make_contact_frame(const ReferenceCloud& cloud, HeightMap height,
                                const HeightMap& reference, const ContactParams& params,
                                int frame_index, const ContactMask* aux_mask = nullptr);

}  // namespace ic
