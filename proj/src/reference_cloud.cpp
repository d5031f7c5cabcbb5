#include "ic/reference_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ic/errors.hpp"

namespace ic {
namespace {

struct Blob {
  double cx = 0.0;
  double cy = 0.0;
  std::size_t area = 0;
};

std::vector<Blob> blob_centroids(const ContactMask& mask) {
  const ComponentLabels cc = connected_components(mask);
  std::vector<Blob> blobs(static_cast<std::size_t>(cc.count()));
  for (int i = 0; i < cc.count(); ++i) blobs[static_cast<std::size_t>(i)].area = cc.areas[static_cast<std::size_t>(i)];
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::int32_t l = cc.labels[static_cast<std::size_t>(y) * mask.width + x];
      if (!l) continue;
      blobs[static_cast<std::size_t>(l - 1)].cx += x;
      blobs[static_cast<std::size_t>(l - 1)].cy += y;
    }
  }
  for (auto& b : blobs) {
    b.cx /= static_cast<double>(b.area);
    b.cy /= static_cast<double>(b.area);
  }
  return blobs;
}

}  // namespace

MarkerGrid detect_markers(const HeightMap& no_contact_height, const ContactMask& marker_mask,
                          int expected_rows, int expected_cols) {
  if (no_contact_height.width != marker_mask.width || no_contact_height.height != marker_mask.height)
    throw std::invalid_argument("marker mask dims must match the height map");
  if (expected_rows < 2 || expected_cols < 2)
    throw std::invalid_argument("expected marker grid must be at least 2x2");
  const int expected = expected_rows * expected_cols;

  std::vector<Blob> blobs = blob_centroids(marker_mask);
  const int base_count = static_cast<int>(blobs.size());
  if (base_count < expected) throw DetectionFailure(base_count, expected);

  if (base_count > expected) {
    // Adaptive cutoff sweep: raise the minimum area through the observed
    // area values until the count matches (drops speckle, keeps dots).
    std::vector<std::size_t> areas;
    areas.reserve(blobs.size());
    for (const auto& b : blobs) areas.push_back(b.area);
    std::sort(areas.begin(), areas.end());
    std::size_t cutoff = 0;
    bool matched = false;
    for (std::size_t a : areas) {
      const auto kept = static_cast<int>(std::count_if(
          blobs.begin(), blobs.end(), [&](const Blob& b) { return b.area > a; }));
      if (kept == expected) {
        cutoff = a;
        matched = true;
        break;
      }
      if (kept < expected) break;
    }
    if (!matched) throw DetectionFailure(base_count, expected);
    blobs.erase(std::remove_if(blobs.begin(), blobs.end(),
                               [&](const Blob& b) { return b.area <= cutoff; }),
                blobs.end());
  }

  // Row-band clustering: boundaries at the rows-1 largest gaps in sorted y.
  std::stable_sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    return a.cy < b.cy || (a.cy == b.cy && a.cx < b.cx);
  });
  struct Gap {
    double size;
    std::size_t after;  // boundary between index `after` and `after`+1
  };
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i + 1 < blobs.size(); ++i) gaps.push_back({blobs[i + 1].cy - blobs[i].cy, i});
  std::stable_sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.size > b.size; });
  if (static_cast<int>(gaps.size()) < expected_rows - 1)
    throw GridLayoutError("not enough y spread to form marker rows");
  std::vector<std::size_t> bounds;
  for (int i = 0; i < expected_rows - 1; ++i) bounds.push_back(gaps[static_cast<std::size_t>(i)].after);
  std::sort(bounds.begin(), bounds.end());

  std::vector<std::vector<Blob>> bands;
  std::size_t start = 0;
  for (std::size_t b : bounds) {
    bands.emplace_back(blobs.begin() + static_cast<std::ptrdiff_t>(start),
                       blobs.begin() + static_cast<std::ptrdiff_t>(b + 1));
    start = b + 1;
  }
  bands.emplace_back(blobs.begin() + static_cast<std::ptrdiff_t>(start), blobs.end());

  for (const auto& band : bands) {
    if (static_cast<int>(band.size()) != expected_cols)
      throw GridLayoutError("row bands do not partition markers into equal columns");
  }

  // Band separation check: tolerance of half the median row spacing.
  std::vector<double> centers;
  for (const auto& band : bands) {
    double s = 0.0;
    for (const auto& b : band) s += b.cy;
    centers.push_back(s / static_cast<double>(band.size()));
  }
  std::vector<double> spacings;
  for (std::size_t i = 0; i + 1 < centers.size(); ++i) spacings.push_back(centers[i + 1] - centers[i]);
  std::vector<double> sorted_spacings = spacings;
  std::sort(sorted_spacings.begin(), sorted_spacings.end());
  const double median_spacing = sorted_spacings[sorted_spacings.size() / 2];
  const double tol = median_spacing / 2.0;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    for (const auto& b : bands[i]) {
      if (std::fabs(b.cy - centers[i]) > tol)
        throw GridLayoutError("row bands overlap beyond half the median row spacing");
    }
  }

  MarkerGrid grid;
  grid.rows = expected_rows;
  grid.cols = expected_cols;
  for (auto& band : bands) {
    std::stable_sort(band.begin(), band.end(), [](const Blob& a, const Blob& b) { return a.cx < b.cx; });
    for (std::size_t c = 0; c + 1 < band.size(); ++c) {
      if (!(band[c].cx < band[c + 1].cx))
        throw GridLayoutError("duplicate x positions within a marker row");
    }
    for (const auto& b : band) grid.pixels.push_back({b.cx, b.cy});
  }
  return grid;
}

ReferenceCloud interpolate_grid(const MarkerGrid& markers, const HeightMap& hm, int m, int n) {
  const int rows = markers.rows, cols = markers.cols;
  if (rows < 2 || cols < 2 || static_cast<int>(markers.pixels.size()) != rows * cols)
    throw std::invalid_argument("marker grid must be at least 2x2 and fully populated");
  if (m < rows - 1 || n < cols - 1)
    throw std::invalid_argument("target grid must densify, not decimate");
  if (m % (rows - 1) != 0 || n % (cols - 1) != 0)
    throw std::invalid_argument("target intervals must be divisible by the marker intervals");

  const int a = m / (rows - 1);
  const int b = n / (cols - 1);

  // Lift markers to world points with the no-contact height map.
  std::vector<WorldPoint> lifted(markers.pixels.size());
  for (std::size_t i = 0; i < markers.pixels.size(); ++i) {
    lifted[i] = pixel_to_world(hm, markers.pixels[i]);
  }
  const auto marker_world = [&](int i, int j) -> const WorldPoint& {
    return lifted[static_cast<std::size_t>(i) * cols + j];
  };

  ReferenceCloud cloud;
  cloud.grid_rows = m + 1;
  cloud.grid_cols = n + 1;
  cloud.frame_width = hm.width;
  cloud.frame_height = hm.height;
  cloud.ppmm = hm.ppmm;
  cloud.built_from = markers;
  cloud.provenance_hash = marker_grid_hash(markers);
  cloud.points.reserve(static_cast<std::size_t>(m + 1) * (n + 1));

  const ImageGeometry geom = geometry_of(hm);
  for (int r = 0; r <= m; ++r) {
    for (int c = 0; c <= n; ++c) {
      const int i = r / a;
      const int j = c / b;
      const double v = static_cast<double>(r % a) / a;
      const double u = static_cast<double>(c % b) / b;
      WorldPoint q;
      if (u == 0.0 && v == 0.0) {
        q = marker_world(i, j);  // marker sites are copied, not recomputed
      } else if (v == 0.0) {
        const auto &p0 = marker_world(i, j), &p1 = marker_world(i, j + 1);
        q = {(1 - u) * p0.x + u * p1.x, (1 - u) * p0.y + u * p1.y, (1 - u) * p0.z + u * p1.z};
      } else if (u == 0.0) {
        const auto &p0 = marker_world(i, j), &p1 = marker_world(i + 1, j);
        q = {(1 - v) * p0.x + v * p1.x, (1 - v) * p0.y + v * p1.y, (1 - v) * p0.z + v * p1.z};
      } else {
        const auto &p00 = marker_world(i, j), &p01 = marker_world(i, j + 1);
        const auto &p10 = marker_world(i + 1, j), &p11 = marker_world(i + 1, j + 1);
        const double w00 = (1 - u) * (1 - v), w01 = u * (1 - v), w10 = (1 - u) * v, w11 = u * v;
        q = {w00 * p00.x + w01 * p01.x + w10 * p10.x + w11 * p11.x,
             w00 * p00.y + w01 * p01.y + w10 * p10.y + w11 * p11.y,
             w00 * p00.z + w01 * p01.z + w10 * p10.z + w11 * p11.z};
      }
      ReferenceCloud::Point pt;
      pt.id = static_cast<std::uint64_t>(r) * (n + 1) + c + 1;
      pt.world = q;
      pt.pixel = world_to_pixel(q, geom);
      if (!(pt.pixel.x > 0.0 && pt.pixel.x < hm.width - 1 && pt.pixel.y > 0.0 &&
            pt.pixel.y < hm.height - 1))
        throw GridLayoutError("interpolated point falls on or outside the image border");
      cloud.points.push_back(pt);
    }
  }
  return cloud;
}

const ReferenceCloud::Point& lookup(const ReferenceCloud& cloud, std::uint64_t id) {
  if (id < 1 || id > cloud.points.size())
    throw std::out_of_range("reference cloud id out of range");
  return cloud.points[static_cast<std::size_t>(id - 1)];
}

std::uint64_t marker_grid_hash(const MarkerGrid& g) {
  // FNV-1a over dims and pixel bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(&g.rows, sizeof g.rows);
  mix(&g.cols, sizeof g.cols);
  for (const auto& p : g.pixels) {
    mix(&p.x, sizeof p.x);
    mix(&p.y, sizeof p.y);
  }
  return h;
}

void save_reference_cloud(const ReferenceCloud& cloud, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.precision(17);
  os << "# invariantcloud reference cloud v1\n";
  os << "# grid " << cloud.grid_rows << " " << cloud.grid_cols << " markers "
     << cloud.built_from.rows << " " << cloud.built_from.cols << " frame " << cloud.frame_width
     << " " << cloud.frame_height << " " << cloud.ppmm << " hash " << std::hex
     << cloud.provenance_hash << std::dec << "\n";
  for (const auto& mp : cloud.built_from.pixels) os << "# marker " << mp.x << " " << mp.y << "\n";
  os << "# id px py wx wy wz\n";
  for (const auto& p : cloud.points) {
    os << p.id << " " << p.pixel.x << " " << p.pixel.y << " " << p.world.x << " " << p.world.y
       << " " << p.world.z << "\n";
  }
  if (!os) throw DataError("write failed: " + path);
}

ReferenceCloud load_reference_cloud(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  ReferenceCloud cloud;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tag;
      ss >> tag;
      if (tag == "grid") {
        std::string markers_tag, frame_tag, hash_tag;
        ss >> cloud.grid_rows >> cloud.grid_cols >> markers_tag >> cloud.built_from.rows >>
            cloud.built_from.cols >> frame_tag >> cloud.frame_width >> cloud.frame_height >>
            cloud.ppmm >> hash_tag >> std::hex >> cloud.provenance_hash >> std::dec;
        if (!ss || markers_tag != "markers" || frame_tag != "frame" || hash_tag != "hash")
          throw DataError(path + ": malformed grid header");
        have_header = true;
      } else if (tag == "marker") {
        PixelCoord p;
        ss >> p.x >> p.y;
        if (!ss) throw DataError(path + ": malformed marker line");
        cloud.built_from.pixels.push_back(p);
      }
      continue;
    }
    ReferenceCloud::Point p;
    std::istringstream ss(line);
    ss >> p.id >> p.pixel.x >> p.pixel.y >> p.world.x >> p.world.y >> p.world.z;
    if (!ss) throw DataError(path + ": malformed point line: " + line);
    cloud.points.push_back(p);
  }
  if (!have_header) throw DataError(path + ": missing header");
  const std::size_t expected = static_cast<std::size_t>(cloud.grid_rows) * cloud.grid_cols;
  if (cloud.points.size() != expected)
    throw DataError(path + ": point count does not match grid dims");
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (cloud.points[i].id != i + 1) throw DataError(path + ": ids must be 1..N in order");
  }
  return cloud;
}

}  // namespace ic
