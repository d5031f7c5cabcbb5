#include "ic/contact.hpp"

#include <cmath>
#include <stdexcept>

#include "ic/errors.hpp"
#include "ic/kernels/kernels.hpp"

namespace ic {

ContactMask build_contact_mask(const HeightMap& current, const HeightMap& reference,
                               double depth_threshold_m, const ContactMask* aux_mask,
                               int kernel_px, int kernel_iters) {
  if (current.width != reference.width || current.height != reference.height)
    throw std::invalid_argument("current/reference height map dims mismatch");
  if (!(depth_threshold_m > 0.0)) throw std::invalid_argument("depth threshold must be positive");
  if (aux_mask && (aux_mask->width != current.width || aux_mask->height != current.height))
    throw std::invalid_argument("aux mask dims mismatch");

  // Threshold is given in meters of depression; heights are pixel units.
  const double thr_px = depth_threshold_m * 1000.0 * current.ppmm;
  ContactMask m = make_mask(current.width, current.height, 0);
  kernels::active().depression_mask(reference.data.data(), current.data.data(), thr_px,
                                    m.bits.data(), m.bits.size());
  if (aux_mask) kernels::active().and_u8(m.bits.data(), aux_mask->bits.data(), m.bits.data(), m.bits.size());
  if (kernel_px > 1 && kernel_iters > 0) {
    m = erode_ellipse(dilate_ellipse(m, kernel_px, kernel_iters), kernel_px, kernel_iters);
  }
  // Closing fills holes but keeps salt specks; drop components <= 4 px^2.
  const ComponentLabels cc = connected_components(m);
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    if (m.bits[i] && cc.areas[static_cast<std::size_t>(cc.labels[i] - 1)] <= 4) m.bits[i] = 0;
  }
  return m;
}

ContactSubset extract_contact_subset(const ReferenceCloud& cloud, const ContactMask& mask,
                                     const HeightMap& hm, int border_margin) {
  if (mask.width != hm.width || mask.height != hm.height)
    throw std::invalid_argument("mask/height map dims mismatch");
  const ImageGeometry geom = geometry_of(hm);
  ContactSubset s;
  for (const auto& p : cloud.points) {
    const int xi = static_cast<int>(std::llround(p.pixel.x));
    const int yi = static_cast<int>(std::llround(p.pixel.y));
    if (xi < border_margin || xi > mask.width - 1 - border_margin || yi < border_margin ||
        yi > mask.height - 1 - border_margin)
      continue;
    if (!mask.at(xi, yi)) continue;
    s.ids.push_back(p.id);
    const double h = sample_bilinear(hm, p.pixel);
    s.world.push_back({(p.pixel.x - geom.cx) * geom.scale, (geom.cy - p.pixel.y) * geom.scale,
                       h * geom.scale});
  }
  return s;
}

WorldPoint contact_centroid(const ContactMask& mask, const HeightMap& hm, int close_kernel_px,
                            int close_iters, bool use_area_moment) {
  if (mask.width != hm.width || mask.height != hm.height)
    throw std::invalid_argument("mask/height map dims mismatch");
  const ContactMask closed = close_ellipse(mask, close_kernel_px, close_iters);
  std::vector<PixelCoord> pts;
  if (use_area_moment) {
    const ContactMask comp = largest_component(closed);
    for (int y = 0; y < comp.height; ++y) {
      for (int x = 0; x < comp.width; ++x) {
        if (comp.at(x, y)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
      }
    }
  } else {
    pts = boundary_of_largest(closed);
  }
  if (pts.empty()) throw NoContactError();
  const PixelCoord c = pixel_centroid(pts);
  return pixel_to_world(hm, c);
}

ContactFrame make_contact_frame(const ReferenceCloud& cloud, HeightMap height,
                                const HeightMap& reference, const ContactParams& params,
                                int frame_index, const ContactMask* aux_mask) {
  ContactFrame f;
  f.frame_index = frame_index;
  f.mask = build_contact_mask(height, reference, params.depth_threshold_m, aux_mask,
                              params.kernel_px, params.kernel_iters);
  f.subset = extract_contact_subset(cloud, f.mask, height, params.border_margin_px);
  f.subset.frame_index = frame_index;
  try {
    f.centroid = contact_centroid(f.mask, height, params.close_kernel_px, params.close_iters,
                                  params.use_area_moment);
  } catch (const NoContactError&) {
    f.centroid.reset();
  }
  f.height = std::move(height);
  return f;
}

}  // namespace ic
