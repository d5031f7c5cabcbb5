#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "ic/contact.hpp"

namespace ic {

/// SE(3) state: translation in mm, Z-X-Y right-handed Euler angles in
/// degrees (R = Rz * Rx * Ry). rx/ry are normalized to (-180, 180]; rz is
/// continuously unwrapped over a track and may exceed +-180.
struct Pose {
  double tx = 0.0, ty = 0.0, tz = 0.0;  // mm
  double rx = 0.0, ry = 0.0, rz = 0.0;  // deg
};

/// ID-matched point pairs between two frames, stored SoA for the reduction
/// kernels. p is the previous frame, q the current.
struct Correspondences {
  std::vector<std::uint64_t> ids;
  std::vector<double> px, py, pz;
  std::vector<double> qx, qy, qz;

  std::size_t size() const { return ids.size(); }
};

/// Principal-axis yaw state. theta is degrees, unwrapped by yaw_continuity;
/// (ax, ay) is the unit axis.
struct YawState {
  double theta = 0.0;
  double ax = 1.0, ay = 0.0;
  std::size_t k = 0;
};

struct YawResult {
  std::optional<YawState> state;  // empty: yaw unobservable (isotropic contact)
  double anisotropy_ratio = 1.0;  // lambda1 / lambda2
};

/// Intersection of the two id sets, points paired in id order. No search:
/// ids are the correspondence.
Correspondences match_by_id(const ContactSubset& prev, const ContactSubset& curr);

/// Closed-form SVD solve for the rotation minimizing sum ||p~ - R q~||^2
/// over the centered pairs, with the determinant sign correction that
/// excludes reflections. Throws InsufficientPoints (N < 3) or
/// DegenerateGeometry (collinear sets).
Eigen::Matrix3d kabsch_rotation(const Correspondences& c);

/// Principal axis of the contact subset's XY covariance. Returns an empty
/// state (ratio still reported) when the eigenvalue ratio is below
/// `anisotropy_threshold` -- a circular contact makes yaw unobservable.
YawResult pca_yaw(const ContactSubset& subset, double anisotropy_threshold = 1.8);

/// Resolve the 180-degree axis ambiguity against the previous state and pick
/// the theta representative closest to it; |theta - prev.theta| <= 90 after.
YawState yaw_continuity(const YawState& prev, const YawState& raw);

/// R = Rz(rz) * Rx(rx) * Ry(ry), angles in degrees.
Eigen::Matrix3d matrix_from_euler_zxy(double rx_deg, double ry_deg, double rz_deg);

struct EulerZxy {
  double rx = 0.0, ry = 0.0, rz = 0.0;  // deg
};

/// Z-X-Y decomposition; empty near the rx = +-90 gimbal singularity.
std::optional<EulerZxy> euler_zxy_from_matrix(const Eigen::Matrix3d& r);

/// Normalize an angle to (-180, 180].
double normalize_angle_deg(double a);

/// One pose-track CSV row.
struct TrackRow {
  int frame = 0;
  double t_ms = 0.0;
  Pose pose;
  bool tracked = false;
  int n_corr = 0;
  double aniso_ratio = 0.0;
};

struct TrackerConfig {
  double anisotropy_threshold = 1.8;
  double fps = 25.0;
};

/// Sequential frame-to-frame 6-DoF tracker: ID-matched Kabsch for roll and
/// pitch increments, absolute PCA yaw differenced against the track origin,
/// centroid translation anchored likewise. Coasts (holds pose, flags the
/// frame) across contact dropouts and re-anchors on recontact.
class PoseTracker {
 public:
  explicit PoseTracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

  TrackRow step(const ContactFrame& frame);
  const Pose& pose() const { return pose_; }

 private:
  TrackerConfig cfg_;
  Pose pose_;
  int next_frame_ = 0;

  bool have_prev_ = false;
  ContactSubset prev_subset_;

  std::optional<YawState> yaw_;       // last unwrapped yaw state
  double yaw_anchor_theta_ = 0.0;     // theta at the current anchor
  double rz_base_ = 0.0;              // rz when the yaw anchor was set

  std::optional<WorldPoint> centroid_anchor_;
  double tx_base_ = 0.0, ty_base_ = 0.0, tz_base_ = 0.0;
};

}  // namespace ic
