#pragma once

#include <vector>

namespace ic {

/// Continuous pixel coordinate; sub-pixel positions allowed. Bounds checks
/// are the consuming operation's job.
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

/// Point in the sensor frame, meters. +X right, +Y up (pixel y points down),
/// +Z out of the gel toward the object; contact indents toward -Z.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Image center and pixel->meter scale shared by both mapping directions.
struct ImageGeometry {
  double cx = 0.0;
  double cy = 0.0;
  double scale = 0.0;  // meters per pixel
};

/// Discrete scalar height field on the pixel lattice. Values are in
/// pixel-height units (one unit spans the same physical distance as one
/// pixel of x/y); `ppmm` is the lattice resolution in pixels per mm.
/// Gel at rest is 0; contact renders as negative (depression).
struct HeightMap {
  int width = 0;
  int height = 0;
  double ppmm = 1.0;
  std::vector<double> data;  // row-major, data[y * width + x]

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(const PixelCoord& p) const {
    return p.x >= 0.0 && p.x <= width - 1 && p.y >= 0.0 && p.y <= height - 1;
  }
  double mm_per_px() const { return 1.0 / ppmm; }
};

HeightMap make_height_map(int width, int height, double ppmm, double fill = 0.0);

/// Surface slope field in pixel-height per pixel. gx[y][x] holds the x-slope
/// on the staggered point (x+1/2, y) and gy[y][x] the y-slope on (x, y+1/2);
/// the last column of gx and last row of gy are padding and ignored by the
/// integrator.
struct GradientField {
  int width = 0;
  int height = 0;
  double ppmm = 1.0;
  std::vector<double> gx;
  std::vector<double> gy;
};

/// Eq.-style image center and scale: cx=(W-1)/2, cy=(H-1)/2, s=rho/1000 with
/// rho in mm per pixel. Throws std::invalid_argument on non-positive inputs.
ImageGeometry image_center_and_scale(int width, int height, double mm_per_px);

/// Geometry of a height map (mm_per_px = 1/ppmm).
ImageGeometry geometry_of(const HeightMap& hm);

/// Bilinear sample at p. Exact at lattice points, bounded by the local 2x2
/// corner extrema. Throws std::out_of_range outside [0,W-1]x[0,H-1].
double sample_bilinear(const HeightMap& hm, const PixelCoord& p);

/// ((x-cx)s, (cy-y)s, h(x,y)s). Note the Y-axis flip: pixel y grows down,
/// world Y grows up.
WorldPoint pixel_to_world(const HeightMap& hm, const PixelCoord& p);

/// XY inverse of pixel_to_world: (X/s + cx, -Y/s + cy).
PixelCoord world_to_pixel(const WorldPoint& w, const ImageGeometry& g);

}  // namespace ic
