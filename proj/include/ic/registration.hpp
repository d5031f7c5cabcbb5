#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ic/contact.hpp"
#include "ic/pose.hpp"

namespace ic {

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // meters

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
};

/// Contact patch sampled from the invariant grid: persistent ids, lifted
/// points, centroid and (when anisotropic) the absolute principal axis.
struct PatchCloud {
  std::vector<std::uint64_t> ids;
  std::vector<Eigen::Vector3d> points;  // meters
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector2d> axis;  // unit; empty for isotropic patches
  double anisotropy_ratio = 1.0;

  std::size_t size() const { return points.size(); }
};

PatchCloud make_patch(const ContactSubset& subset, double anisotropy_threshold = 1.8);

struct RegistrationConfig {
  double overlap_gate = 0.35;
  double rmse_gate_mm = 0.5;
  double nn_gate_mm = 1.0;     // overlap counting and final residual gate
  double search_gate_mm = 3.0; // correspondence search radius during iterations
  int max_iters = 50;
  double tol_mm = 1e-6;
  // Median-based pair trimming. On for inter-contact registration; the
  // baseline tracker runs the plain nearest-neighbour variant.
  bool trim = true;
  // Duplicate-id policy when fusing a patch into the map: keep the first-seen
  // position (default), or average. Averaging drags shared sensor-grid ids
  // toward the mean of the object regions they saw, which distorts scans
  // with inter-contact motion.
  bool dedup_average = false;
};

struct RegistrationResult {
  RigidTransform transform;  // maps b into a's frame
  double overlap_ratio = 0.0;
  double rmse_mm = 0.0;  // mean point-to-point distance over matched pairs
  bool converged = false;
  bool accepted = false;
  int iterations = 0;
};

/// Z-rotation from the patches' principal axes (mod-180 branch nearest zero)
/// about b's centroid, plus the centroid shift onto a. Empty when either
/// axis is unavailable; callers may fall back to centroid-only alignment.
std::optional<RigidTransform> prealign(const PatchCloud& a, const PatchCloud& b);

/// Point-to-point ICP refinement of `init` (nearest neighbours through a
/// uniform spatial hash, Kabsch + translation update per iteration).
/// Keeps the best transform seen, so an accepted result never has a larger
/// residual than the initial one. Declared divergent after three
/// consecutive residual increases.
RegistrationResult icp_refine(const PatchCloud& a, const PatchCloud& b,
                              const RigidTransform& init, const RegistrationConfig& cfg = {});

/// Fused multi-contact map keyed by global id; duplicate ids are averaged.
class FusedMap {
 public:
  struct Entry {
    std::uint64_t id = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  // map frame, meters
    int n_obs = 0;
  };

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const PatchCloud& last_patch() const { return last_patch_; }

  /// Seed the map with the first patch at identity.
  void seed(const PatchCloud& first);

  /// Prealign against the most recent accepted patch (both mod-180 branches
  /// scored when axes are available), ICP-refine, gate, and on acceptance
  /// merge `next` into the map. Rejected registrations leave it unchanged.
  RegistrationResult accumulate(const PatchCloud& next, const RegistrationConfig& cfg = {});

 private:
  void merge(const PatchCloud& patch, const RigidTransform& to_map, bool dedup_average);

  std::vector<Entry> entries_;
  std::map<std::uint64_t, std::size_t> index_;
  PatchCloud last_patch_;  // map frame
};

struct BaselineConfig {
  RegistrationConfig icp;  // nn_gate_mm is the baseline's (wider) gate
  double fps = 25.0;
  // Per-frame XY localization noise of the comparator's own feature
  // extraction (optical-flow corner tracking re-detects features every
  // frame; the invariant grid is anchored once and has no such term).
  double feature_jitter_mm = 0.05;
  std::uint64_t jitter_salt = 0x5eedba5e00c0ffeeULL;

  BaselineConfig() {
    icp.nn_gate_mm = 3.0;
    icp.search_gate_mm = 3.0;
    icp.trim = false;
  }
};

/// Frame-to-frame nearest-neighbour ICP over the raw contact points (ids
/// ignored): the drift-prone comparator. Emits the same row schema as the
/// main tracker; the reported pose is the accumulated transform applied to
/// the first contact centroid plus its Euler split.
class BaselineNnIcpTracker {
 public:
  explicit BaselineNnIcpTracker(BaselineConfig cfg = {}) : cfg_(cfg) {}

  TrackRow step(const ContactFrame& frame);

 private:
  BaselineConfig cfg_;
  int next_frame_ = 0;
  RigidTransform acc_;  // estimated motion, first contact -> now
  Eigen::Vector3d c0_ = Eigen::Vector3d::Zero();
  bool have_c0_ = false;
  double rz_prev_ = 0.0;
  Pose last_pose_;
  std::optional<PatchCloud> prev_;
};

std::vector<TrackRow> baseline_nn_icp_track(const std::vector<ContactFrame>& frames,
                                            const BaselineConfig& cfg = {});

/// Occupancy-boundary view of the fused map in XY: map points lying in
/// raster cells (size cell_mm) with an empty 4-neighbour, single-cell holes
/// filled first. Returned in mm.
std::vector<Eigen::Vector2d> map_contour_xy_mm(const FusedMap& map, double cell_mm);

/// Shape agreement between the fused map and an outline template placed in
/// the map frame by `placement` (tx/ty mm + yaw). Max of two directed legs:
/// every map point must lie inside (or within tolerance of) the filled
/// template, and every template-outline sample the scan covered must have a
/// map point nearby. Partial scans are legitimate: uncovered outline does
/// not penalize. mm.
double hausdorff_to_template_mm(const FusedMap& map,
                                const std::vector<std::array<double, 2>>& polygon_mm,
                                const Pose& placement, double cell_mm,
                                double coverage_radius_mm);

}  // namespace ic
