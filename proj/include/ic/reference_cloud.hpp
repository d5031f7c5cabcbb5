#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ic/geometry.hpp"
#include "ic/morphology.hpp"

namespace ic {

/// Detected fiducial centroids in grid order (top-left to bottom-right,
/// row-major).
struct MarkerGrid {
  int rows = 0;
  int cols = 0;
  std::vector<PixelCoord> pixels;

  const PixelCoord& at(int r, int c) const {
    return pixels[static_cast<std::size_t>(r) * cols + c];
  }
};

/// The globally invariant reference point set: a densified marker grid fixed
/// at initialization, each point carrying a unique id g = r*(n+1)+c+1.
/// Immutable after construction; re-initialization builds a new cloud.
struct ReferenceCloud {
  struct Point {
    std::uint64_t id = 0;
    PixelCoord pixel;
    WorldPoint world;
  };

  int grid_rows = 0;  // m+1
  int grid_cols = 0;  // n+1
  int frame_width = 0;
  int frame_height = 0;
  double ppmm = 1.0;
  std::vector<Point> points;  // id order (id - 1 == index)
  MarkerGrid built_from;
  std::uint64_t provenance_hash = 0;

  std::size_t size() const { return points.size(); }
};

/// Sub-pixel marker centroids from a binary marker mask via connected
/// components, sorted into grid order (row bands by y, then x within band).
/// The component count must match rows*cols; when small spurious blobs push
/// it over, the minimum-area cutoff is raised until the count matches.
/// Throws DetectionFailure (carrying the base count) or GridLayoutError.
MarkerGrid detect_markers(const HeightMap& no_contact_height, const ContactMask& marker_mask,
                          int expected_rows, int expected_cols);

/// Densify markers onto an (m+1) x (n+1) grid by bilinear combination of the
/// four enclosing marker world points, assign ids, and map back to pixels.
/// m must be divisible by rows-1 and n by cols-1 (uneven cells are rejected
/// rather than silently distorted). Points at marker sites reuse the marker
/// world point bitwise.
ReferenceCloud interpolate_grid(const MarkerGrid& markers, const HeightMap& hm, int m, int n);

/// O(1) id lookup (index = id - 1). Throws std::out_of_range.
const ReferenceCloud::Point& lookup(const ReferenceCloud& cloud, std::uint64_t id);

/// Line-oriented text serialization: header comments with grid dims and
/// provenance hash, then one `id px py wx wy wz` per line.
void save_reference_cloud(const ReferenceCloud& cloud, const std::string& path);
ReferenceCloud load_reference_cloud(const std::string& path);

std::uint64_t marker_grid_hash(const MarkerGrid& g);

}  // namespace ic
