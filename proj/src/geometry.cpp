#include "ic/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace ic {

HeightMap make_height_map(int width, int height, double ppmm, double fill) {
  if (width < 1 || height < 1) throw std::invalid_argument("height map dims must be positive");
  if (!(ppmm > 0.0)) throw std::invalid_argument("ppmm must be positive");
  HeightMap hm;
  hm.width = width;
  hm.height = height;
  hm.ppmm = ppmm;
  hm.data.assign(static_cast<std::size_t>(width) * height, fill);
  return hm;
}

ImageGeometry image_center_and_scale(int width, int height, double mm_per_px) {
  if (width < 1 || height < 1) throw std::invalid_argument("image dims must be positive");
  if (!(mm_per_px > 0.0) || !std::isfinite(mm_per_px))
    throw std::invalid_argument("scale must be positive and finite");
  ImageGeometry g;
  g.cx = (width - 1) / 2.0;
  g.cy = (height - 1) / 2.0;
  g.scale = mm_per_px / 1000.0;
  return g;
}

ImageGeometry geometry_of(const HeightMap& hm) {
  return image_center_and_scale(hm.width, hm.height, hm.mm_per_px());
}

double sample_bilinear(const HeightMap& hm, const PixelCoord& p) {
  if (hm.width < 2 || hm.height < 2)
    throw std::invalid_argument("bilinear sampling needs a 2x2 neighborhood");
  if (!hm.in_bounds(p)) throw std::out_of_range("pixel coordinate outside height map");
  int x0 = static_cast<int>(std::floor(p.x));
  int y0 = static_cast<int>(std::floor(p.y));
  if (x0 > hm.width - 2) x0 = hm.width - 2;
  if (y0 > hm.height - 2) y0 = hm.height - 2;
  const double a = p.x - x0;
  const double b = p.y - y0;
  return (1.0 - a) * (1.0 - b) * hm.at(x0, y0) + a * (1.0 - b) * hm.at(x0 + 1, y0) +
         (1.0 - a) * b * hm.at(x0, y0 + 1) + a * b * hm.at(x0 + 1, y0 + 1);
}

WorldPoint pixel_to_world(const HeightMap& hm, const PixelCoord& p) {
  const ImageGeometry g = geometry_of(hm);
  const double h = sample_bilinear(hm, p);
  return {(p.x - g.cx) * g.scale, (g.cy - p.y) * g.scale, h * g.scale};
}

PixelCoord world_to_pixel(const WorldPoint& w, const ImageGeometry& g) {
  if (!(g.scale > 0.0)) throw std::invalid_argument("scale must be positive");
  return {w.x / g.scale + g.cx, -w.y / g.scale + g.cy};
}

}  // namespace ic
