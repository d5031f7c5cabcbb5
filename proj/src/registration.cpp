#include "ic/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "ic/errors.hpp"

namespace ic {
namespace {

constexpr double kDegPerRad = 180.0 / M_PI;

Eigen::Matrix3d rot_z(double rad) {
  Eigen::Matrix3d r;
  r = Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitZ());
  return r;
}

/// Uniform spatial hash over 3-D points, cell size = query gate.
class SpatialHash {
 public:
  SpatialHash(const std::vector<Eigen::Vector3d>& pts, double cell) : pts_(pts), cell_(cell) {
    grid_.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) grid_[key(pts[i])].push_back(i);
  }

  /// Index of the nearest point within `gate` of q, or -1.
  std::ptrdiff_t nearest(const Eigen::Vector3d& q, double gate) const {
    const auto [cx, cy, cz] = cell_of(q);
    double best = gate * gate;
    std::ptrdiff_t best_i = -1;
    for (long dz = -1; dz <= 1; ++dz) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          const auto it = grid_.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == grid_.end()) continue;
          for (const std::size_t i : it->second) {
            const double d2 = (pts_[i] - q).squaredNorm();
            if (d2 < best || (d2 == best && best_i >= 0 && static_cast<std::ptrdiff_t>(i) < best_i)) {
              best = d2;
              best_i = static_cast<std::ptrdiff_t>(i);
            }
          }
        }
      }
    }
    return best_i;
  }

 private:
  std::tuple<long, long, long> cell_of(const Eigen::Vector3d& p) const {
    return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_)),
            static_cast<long>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t pack(long x, long y, long z) {
    const auto u = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1FFFFF; };
    return u(x) | (u(y) << 21) | (u(z) << 42);
  }
  std::uint64_t key(const Eigen::Vector3d& p) const {
    const auto [x, y, z] = cell_of(p);
    return pack(x, y, z);
  }

  const std::vector<Eigen::Vector3d>& pts_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid_;
};

/// Best rigid fit src->dst over matched pairs (Kabsch + centroid shift).
RigidTransform fit_pairs(const std::vector<Eigen::Vector3d>& src,
                         const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (const auto& p : src) cs += p;
  for (const auto& p : dst) cd += p;
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
  corr(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = v * corr * u.transpose();  // maps src onto dst
  return {r, cd - r * cs};
}

}  // namespace

PatchCloud make_patch(const ContactSubset& subset, double anisotropy_threshold) {
  PatchCloud p;
  p.ids = subset.ids;
  p.points.reserve(subset.world.size());
  for (const auto& w : subset.world) p.points.emplace_back(w.x, w.y, w.z);
  if (!p.points.empty()) {
    for (const auto& q : p.points) p.centroid += q;
    p.centroid /= static_cast<double>(p.points.size());
  }
  const YawResult yr = pca_yaw(subset, anisotropy_threshold);
  p.anisotropy_ratio = yr.anisotropy_ratio;
  if (yr.state) p.axis = Eigen::Vector2d(yr.state->ax, yr.state->ay);
  return p;
}

std::optional<RigidTransform> prealign(const PatchCloud& a, const PatchCloud& b) {
  if (!a.axis || !b.axis) return std::nullopt;
  const double ta = std::atan2(a.axis->y(), a.axis->x());
  const double tb = std::atan2(b.axis->y(), b.axis->x());
  double d = ta - tb;
  d -= M_PI * std::round(d / M_PI);  // unoriented axes: branch nearest zero
  const Eigen::Matrix3d r = rot_z(d);
  return RigidTransform{r, a.centroid - r * b.centroid};
}

RegistrationResult icp_refine(const PatchCloud& a, const PatchCloud& b,
                              const RigidTransform& init, const RegistrationConfig& cfg) {
  if (a.points.empty() || b.points.empty())
    throw std::invalid_argument("icp_refine requires non-empty patches");

  const double gate = cfg.nn_gate_mm * 1e-3;
  const double search = std::max(gate, cfg.search_gate_mm * 1e-3);
  const double tol = cfg.tol_mm * 1e-3;
  const SpatialHash hash(a.points, search);

  RegistrationResult res;
  res.transform = init;

  RigidTransform t = init;
  RigidTransform best_t = init;
  double best_resid = std::numeric_limits<double>::infinity();
  double prev_resid = std::numeric_limits<double>::infinity();
  int rises = 0;

  std::vector<Eigen::Vector3d> src, dst;
  std::vector<double> dists;
  for (int it = 0; it <= cfg.max_iters; ++it) {
    // Annealed correspondence radius: coarse at first so a rough init can
    // latch on, then down to the residual gate so out-of-overlap points stop
    // biasing the fit.
    const double radius = std::max(gate, search * std::pow(0.7, it));
    src.clear();
    dst.clear();
    dists.clear();
    for (const auto& p : b.points) {
      const Eigen::Vector3d tp = t.apply(p);
      const std::ptrdiff_t j = hash.nearest(tp, radius);
      if (j < 0) continue;
      src.push_back(p);
      dst.push_back(a.points[static_cast<std::size_t>(j)]);
      dists.push_back((tp - a.points[static_cast<std::size_t>(j)]).norm());
    }
    if (src.size() < 3) break;
    std::size_t kept = src.size();
    double sum = 0.0;
    if (cfg.trim) {
      // Trim pairs far beyond the median: points outside the true overlap
      // otherwise drag the fit toward the patch edges.
      std::vector<double> sorted = dists;
      std::nth_element(sorted.begin(),
                       sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                       sorted.end());
      const double cut = std::max(gate, 2.5 * sorted[sorted.size() / 2]);
      kept = 0;
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (dists[i] > cut) continue;
        src[kept] = src[i];
        dst[kept] = dst[i];
        sum += dists[i];
        ++kept;
      }
      if (kept < 3) break;
      src.resize(kept);
      dst.resize(kept);
    } else {
      for (double d : dists) sum += d;
    }
    const double resid = sum / static_cast<double>(kept);
    if (resid < best_resid) {
      best_resid = resid;
      best_t = t;
    }
    res.iterations = it;
    if (radius <= gate && std::fabs(prev_resid - resid) < tol) {
      res.converged = true;
      break;
    }
    if (resid > prev_resid) {
      if (++rises >= 3) break;  // diverging
    } else {
      rises = 0;
    }
    prev_resid = resid;
    if (it == cfg.max_iters) break;
    t = fit_pairs(src, dst);
  }

  res.transform = best_t;
  // Overlap under the final transform.
  std::size_t matched = 0;
  double sum = 0.0;
  for (const auto& p : b.points) {
    const Eigen::Vector3d tp = best_t.apply(p);
    const std::ptrdiff_t j = hash.nearest(tp, gate);
    if (j < 0) continue;
    ++matched;
    sum += (tp - a.points[static_cast<std::size_t>(j)]).norm();
  }
  res.overlap_ratio = static_cast<double>(matched) / static_cast<double>(b.points.size());
  res.rmse_mm = matched ? (sum / static_cast<double>(matched)) * 1e3
                        : std::numeric_limits<double>::infinity();
  res.accepted = res.converged && res.overlap_ratio >= cfg.overlap_gate &&
                 res.rmse_mm <= cfg.rmse_gate_mm;
  return res;
}

void FusedMap::seed(const PatchCloud& first) {
  entries_.clear();
  index_.clear();
  merge(first, RigidTransform{}, false);
  last_patch_ = first;
}

RegistrationResult FusedMap::accumulate(const PatchCloud& next, const RegistrationConfig& cfg) {
  if (empty()) throw std::logic_error("seed the map before accumulating");

  // Principal axes are unoriented: score both mod-180 branches and keep the
  // lower post-ICP residual. Centroid-only fallback when an axis is missing.
  std::vector<RigidTransform> inits;
  if (const auto pre = prealign(last_patch_, next)) {
    inits.push_back(*pre);
    RigidTransform flipped;
    flipped.rotation = pre->rotation * rot_z(M_PI);
    flipped.translation = last_patch_.centroid - flipped.rotation * next.centroid;
    inits.push_back(flipped);
  } else {
    inits.push_back(RigidTransform{Eigen::Matrix3d::Identity(), last_patch_.centroid - next.centroid});
  }

  RegistrationResult best;
  bool have = false;
  for (const auto& init : inits) {
    const RegistrationResult r = icp_refine(last_patch_, next, init, cfg);
    if (!have || r.rmse_mm < best.rmse_mm) {
      best = r;
      have = true;
    }
  }

  if (best.accepted) {
    merge(next, best.transform, cfg.dedup_average);
    PatchCloud moved = next;
    for (auto& p : moved.points) p = best.transform.apply(p);
    moved.centroid = best.transform.apply(next.centroid);
    if (moved.axis) {
      const Eigen::Vector3d a3 = best.transform.rotation * Eigen::Vector3d(moved.axis->x(), moved.axis->y(), 0.0);
      moved.axis = Eigen::Vector2d(a3.x(), a3.y()).normalized();
    }
    last_patch_ = moved;
  }
  return best;
}

void FusedMap::merge(const PatchCloud& patch, const RigidTransform& to_map, bool dedup_average) {
  for (std::size_t i = 0; i < patch.points.size(); ++i) {
    const Eigen::Vector3d p = to_map.apply(patch.points[i]);
    const std::uint64_t id = patch.ids[i];
    const auto it = index_.find(id);
    if (it == index_.end()) {
      index_.emplace(id, entries_.size());
      entries_.push_back({id, p, 1});
    } else {
      Entry& e = entries_[it->second];
      if (dedup_average) e.position = (e.position * e.n_obs + p) / static_cast<double>(e.n_obs + 1);
      ++e.n_obs;
    }
  }
}

TrackRow BaselineNnIcpTracker::step(const ContactFrame& frame) {
  TrackRow row;
  row.frame = next_frame_++;
  row.t_ms = row.frame * 1000.0 / cfg_.fps;

  if (!frame.has_contact()) {
    prev_.reset();
    row.tracked = false;
  } else {
    PatchCloud cur = make_patch(frame.subset);
    if (cfg_.feature_jitter_mm > 0.0) {
      // Feature re-detection noise: the comparator localizes its own points
      // every frame instead of indexing an anchored grid.
      std::mt19937_64 rng(cfg_.jitter_salt ^ (0x9E3779B97F4A7C15ULL * (row.frame + 1)));
      std::normal_distribution<double> g(0.0, cfg_.feature_jitter_mm * 1e-3);
      for (auto& p : cur.points) {
        p.x() += g(rng);
        p.y() += g(rng);
      }
    }
    row.aniso_ratio = cur.anisotropy_ratio;
    if (!have_c0_) {
      c0_ = cur.centroid;
      have_c0_ = true;
    }
    if (!prev_) {
      row.tracked = true;
      row.n_corr = static_cast<int>(cur.size());
    } else {
      const RegistrationResult r = icp_refine(*prev_, cur, RigidTransform{}, cfg_.icp);
      if (!r.converged) {
        row.tracked = false;  // coast
      } else {
        // r.transform maps current points onto the previous frame; the
        // object's motion is its inverse.
        const RigidTransform motion = r.transform.inverse();
        acc_.rotation = motion.rotation * acc_.rotation;
        acc_.translation = motion.rotation * acc_.translation + motion.translation;
        row.tracked = true;
        row.n_corr =
            static_cast<int>(std::lround(r.overlap_ratio * static_cast<double>(cur.size())));
      }
    }
    prev_ = std::move(cur);
  }

  if (const auto e = euler_zxy_from_matrix(acc_.rotation)) {
    Pose p;
    p.rx = e->rx;
    p.ry = e->ry;
    p.rz = e->rz + 360.0 * std::round((rz_prev_ - e->rz) / 360.0);  // keep continuous
    rz_prev_ = p.rz;
    const Eigen::Vector3d moved = acc_.apply(c0_) - c0_;
    p.tx = moved.x() * 1e3;
    p.ty = moved.y() * 1e3;
    p.tz = moved.z() * 1e3;
    last_pose_ = p;
  }
  row.pose = last_pose_;
  return row;
}

std::vector<TrackRow> baseline_nn_icp_track(const std::vector<ContactFrame>& frames,
                                            const BaselineConfig& cfg) {
  if (frames.size() < 2) throw std::invalid_argument("baseline tracking needs at least 2 frames");
  BaselineNnIcpTracker tracker(cfg);
  std::vector<TrackRow> rows;
  rows.reserve(frames.size());
  for (const auto& f : frames) rows.push_back(tracker.step(f));
  return rows;
}

std::vector<Eigen::Vector2d> map_contour_xy_mm(const FusedMap& map, double cell_mm) {
  std::vector<Eigen::Vector2d> out;
  if (map.empty() || !(cell_mm > 0.0)) return out;
  double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300;
  for (const auto& e : map.entries()) {
    xmin = std::min(xmin, e.position.x() * 1e3);
    xmax = std::max(xmax, e.position.x() * 1e3);
    ymin = std::min(ymin, e.position.y() * 1e3);
    ymax = std::max(ymax, e.position.y() * 1e3);
  }
  // Origin shifted by half a cell so lattice-pitched points sit mid-cell
  // instead of straddling cell edges.
  const double ox = xmin - cell_mm / 2.0, oy = ymin - cell_mm / 2.0;
  const int nx = static_cast<int>(std::floor((xmax - ox) / cell_mm)) + 3;
  const int ny = static_cast<int>(std::floor((ymax - oy) / cell_mm)) + 3;
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(nx) * ny, 0);
  std::vector<std::vector<std::size_t>> cells(occ.size());
  const auto cell_idx = [&](double x_mm, double y_mm) {
    const int cx = static_cast<int>(std::floor((x_mm - ox) / cell_mm)) + 1;
    const int cy = static_cast<int>(std::floor((y_mm - oy) / cell_mm)) + 1;
    return static_cast<std::size_t>(cy) * nx + cx;
  };
  for (std::size_t i = 0; i < map.entries().size(); ++i) {
    const auto& e = map.entries()[i];
    const std::size_t c = cell_idx(e.position.x() * 1e3, e.position.y() * 1e3);
    occ[c] = 1;
    cells[c].push_back(i);
  }
  // Fill single-cell holes so sampling gaps do not masquerade as boundary.
  std::vector<std::uint8_t> filled = occ;
  for (int y = 1; y + 1 < ny; ++y) {
    for (int x = 1; x + 1 < nx; ++x) {
      const std::size_t c = static_cast<std::size_t>(y) * nx + x;
      if (occ[c]) continue;
      const int nbr = occ[c - 1] + occ[c + 1] + occ[c - nx] + occ[c + nx];
      if (nbr >= 3) filled[c] = 1;
    }
  }
  for (int y = 1; y + 1 < ny; ++y) {
    for (int x = 1; x + 1 < nx; ++x) {
      const std::size_t c = static_cast<std::size_t>(y) * nx + x;
      if (!occ[c]) continue;
      const bool boundary = !filled[c - 1] || !filled[c + 1] || !filled[c - nx] || !filled[c + nx];
      if (!boundary) continue;
      for (const std::size_t i : cells[c]) {
        const auto& e = map.entries()[i];
        out.emplace_back(e.position.x() * 1e3, e.position.y() * 1e3);
      }
    }
  }
  return out;
}

namespace {

double point_to_polyline_mm(const Eigen::Vector2d& p,
                            const std::vector<std::array<double, 2>>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Eigen::Vector2d a(poly[j][0], poly[j][1]);
    const Eigen::Vector2d b(poly[i][0], poly[i][1]);
    const Eigen::Vector2d u = b - a;
    const double len2 = u.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(u) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (a + t * u)).squaredNorm());
  }
  return std::sqrt(best);
}

bool inside_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double yi = poly[i][1], yj = poly[j][1];
    if ((yi > y) != (yj > y)) {
      const double xint = poly[j][0] + (y - yj) * (poly[i][0] - poly[j][0]) / (yi - yj);
      if (x < xint) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

double hausdorff_to_template_mm(const FusedMap& map,
                                const std::vector<std::array<double, 2>>& polygon_mm,
                                const Pose& placement, double cell_mm,
                                double coverage_radius_mm) {
  (void)cell_mm;
  if (map.empty() || polygon_mm.size() < 3) return std::numeric_limits<double>::infinity();

  // Template outline in the map frame (XY plus yaw).
  const double rad = placement.rz * M_PI / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  std::vector<std::array<double, 2>> placed(polygon_mm.size());
  for (std::size_t i = 0; i < polygon_mm.size(); ++i) {
    placed[i] = {c * polygon_mm[i][0] - s * polygon_mm[i][1] + placement.tx,
                 s * polygon_mm[i][0] + c * polygon_mm[i][1] + placement.ty};
  }

  std::vector<Eigen::Vector2d> map_xy;
  map_xy.reserve(map.entries().size());
  for (const auto& e : map.entries()) map_xy.emplace_back(e.position.x() * 1e3, e.position.y() * 1e3);

  // Leg 1: no fused point may stray outside the filled template.
  double d1 = 0.0;
  for (const auto& p : map_xy) {
    if (inside_polygon(placed, p.x(), p.y())) continue;
    d1 = std::max(d1, point_to_polyline_mm(p, placed));
  }

  // Leg 2: outline samples the scan covered must be reproduced by the map.
  double d2 = 0.0;
  const double cov2 = coverage_radius_mm * coverage_radius_mm;
  for (std::size_t i = 0, j = placed.size() - 1; i < placed.size(); j = i++) {
    const Eigen::Vector2d a(placed[j][0], placed[j][1]);
    const Eigen::Vector2d b(placed[i][0], placed[i][1]);
    const double len = (b - a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int k = 0; k <= steps; ++k) {
      const Eigen::Vector2d q = a + (b - a) * (static_cast<double>(k) / steps);
      double dq = std::numeric_limits<double>::infinity();
      for (const auto& m : map_xy) dq = std::min(dq, (m - q).squaredNorm());
      if (dq <= cov2) d2 = std::max(d2, std::sqrt(dq));
    }
  }
  return std::max(d1, d2);
}

}  // namespace ic
