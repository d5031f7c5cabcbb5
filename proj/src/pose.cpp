#include "ic/pose.hpp"

#include <cmath>
#include <limits>

#include "ic/errors.hpp"
#include "ic/kernels/kernels.hpp"

namespace ic {
namespace {

constexpr double kDegPerRad = 180.0 / M_PI;

}  // namespace

Correspondences match_by_id(const ContactSubset& prev, const ContactSubset& curr) {
  Correspondences c;
  std::size_t i = 0, j = 0;
  while (i < prev.ids.size() && j < curr.ids.size()) {
    if (prev.ids[i] < curr.ids[j]) {
      ++i;
    } else if (prev.ids[i] > curr.ids[j]) {
      ++j;
    } else {
      c.ids.push_back(prev.ids[i]);
      c.px.push_back(prev.world[i].x);
      c.py.push_back(prev.world[i].y);
      c.pz.push_back(prev.world[i].z);
      c.qx.push_back(curr.world[j].x);
      c.qy.push_back(curr.world[j].y);
      c.qz.push_back(curr.world[j].z);
      ++i;
      ++j;
    }
  }
  return c;
}

Eigen::Matrix3d kabsch_rotation(const Correspondences& c) {
  const std::size_t n = c.size();
  if (n < 3) throw InsufficientPoints(n);
  const auto& k = kernels::active();

  double pc[3], qc[3];
  k.sum3_f64(c.px.data(), c.py.data(), c.pz.data(), n, pc);
  k.sum3_f64(c.qx.data(), c.qy.data(), c.qz.data(), n, qc);
  for (double* s : {pc, qc}) {
    s[0] /= static_cast<double>(n);
    s[1] /= static_cast<double>(n);
    s[2] /= static_cast<double>(n);
  }

  double hbuf[9];
  k.cross_cov_f64(c.px.data(), c.py.data(), c.pz.data(), c.qx.data(), c.qy.data(), c.qz.data(),
                  pc, qc, n, hbuf);
  Eigen::Matrix3d h;
  h << hbuf[0], hbuf[1], hbuf[2], hbuf[3], hbuf[4], hbuf[5], hbuf[6], hbuf[7], hbuf[8];

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(1) > 1e-12 * std::max(sv(0), 1e-300))) throw DegenerateGeometry();

  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  // Minimizer of sum ||p~ - R q~||^2 for H = sum p~ q~^T.
  const double d = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
  corr(2, 2) = d;
  return u * corr * v.transpose();
}

YawResult pca_yaw(const ContactSubset& subset, double anisotropy_threshold) {
  YawResult out;
  const std::size_t n = subset.size();
  if (n < 2) return out;

  double mx = 0.0, my = 0.0;
  for (const auto& p : subset.world) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double a = 0.0, b = 0.0, d = 0.0;
  for (const auto& p : subset.world) {
    const double x = p.x - mx, y = p.y - my;
    a += x * x;
    b += x * y;
    d += y * y;
  }
  a /= static_cast<double>(n);
  b /= static_cast<double>(n);
  d /= static_cast<double>(n);

  const double tr = a + d;
  const double disc = std::sqrt(std::max(0.0, (a - d) * (a - d) + 4.0 * b * b));
  const double l1 = 0.5 * (tr + disc);
  const double l2 = 0.5 * (tr - disc);
  if (!(l1 > 0.0)) return out;  // all points coincident

  out.anisotropy_ratio = l2 > l1 * 1e-15 ? l1 / l2 : std::numeric_limits<double>::infinity();
  if (out.anisotropy_ratio < anisotropy_threshold) return out;

  // Dominant eigenvector; use the better-conditioned of the two equivalent
  // formulations, then a canonical sign so the raw axis is deterministic.
  double vx, vy;
  const double n1 = std::hypot(l1 - d, b);
  const double n2 = std::hypot(b, l1 - a);
  if (n1 >= n2) {
    vx = (l1 - d) / n1;
    vy = b / n1;
  } else {
    vx = b / n2;
    vy = (l1 - a) / n2;
  }
  if (vx < 0.0 || (vx == 0.0 && vy < 0.0)) {
    vx = -vx;
    vy = -vy;
  }

  YawState s;
  s.ax = vx;
  s.ay = vy;
  s.theta = std::atan2(vy, vx) * kDegPerRad;
  s.k = n;
  out.state = s;
  return out;
}

YawState yaw_continuity(const YawState& prev, const YawState& raw) {
  YawState out = raw;
  if (prev.ax * raw.ax + prev.ay * raw.ay < 0.0) {
    out.ax = -raw.ax;
    out.ay = -raw.ay;
  }
  out.theta = raw.theta + 180.0 * std::round((prev.theta - raw.theta) / 180.0);
  return out;
}

Eigen::Matrix3d matrix_from_euler_zxy(double rx_deg, double ry_deg, double rz_deg) {
  const double ax = rx_deg / kDegPerRad, ay = ry_deg / kDegPerRad, az = rz_deg / kDegPerRad;
  Eigen::Matrix3d rx, ry, rz;
  rx = Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX());
  ry = Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY());
  rz = Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ());
  return rz * rx * ry;
}

std::optional<EulerZxy> euler_zxy_from_matrix(const Eigen::Matrix3d& r) {
  const double s = r(2, 1);
  if (std::fabs(s) > 1.0 - 1e-9) return std::nullopt;  // gimbal: rx near +-90
  EulerZxy e;
  e.rx = std::asin(s) * kDegPerRad;
  e.rz = std::atan2(-r(0, 1), r(1, 1)) * kDegPerRad;
  e.ry = std::atan2(-r(2, 0), r(2, 2)) * kDegPerRad;
  return e;
}

double normalize_angle_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

TrackRow PoseTracker::step(const ContactFrame& frame) {
  TrackRow row;
  row.frame = next_frame_++;
  row.t_ms = row.frame * 1000.0 / cfg_.fps;

  if (!frame.has_contact()) {
    // Dropout: hold the pose, drop anchors; recontact re-anchors.
    have_prev_ = false;
    centroid_anchor_.reset();
    yaw_.reset();
    row.pose = pose_;
    row.tracked = false;
    return row;
  }

  if (!have_prev_) {
    // (Re)anchor translation and yaw at the current accumulated pose.
    prev_subset_ = frame.subset;
    have_prev_ = true;
    centroid_anchor_ = *frame.centroid;
    tx_base_ = pose_.tx;
    ty_base_ = pose_.ty;
    tz_base_ = pose_.tz;
    const YawResult yr = pca_yaw(frame.subset, cfg_.anisotropy_threshold);
    row.aniso_ratio = yr.anisotropy_ratio;
    if (yr.state) {
      yaw_ = yr.state;
      yaw_anchor_theta_ = yr.state->theta;
      rz_base_ = pose_.rz;
    }
    row.pose = pose_;
    row.tracked = true;
    row.n_corr = static_cast<int>(frame.subset.size());
    return row;
  }

  const Correspondences corr = match_by_id(prev_subset_, frame.subset);
  if (corr.size() < 3) {
    // Insufficient overlap: coast this step and re-anchor at the new frame.
    prev_subset_ = frame.subset;
    centroid_anchor_ = *frame.centroid;
    tx_base_ = pose_.tx;
    ty_base_ = pose_.ty;
    tz_base_ = pose_.tz;
    yaw_.reset();
    const YawResult yr = pca_yaw(frame.subset, cfg_.anisotropy_threshold);
    row.aniso_ratio = yr.anisotropy_ratio;
    if (yr.state) {
      yaw_ = yr.state;
      yaw_anchor_theta_ = yr.state->theta;
      rz_base_ = pose_.rz;
    }
    row.pose = pose_;
    row.tracked = false;
    row.n_corr = static_cast<int>(corr.size());
    return row;
  }

  // Roll/pitch: Kabsch gives the inverse of the object motion; decompose the
  // motion in Z-X-Y, keep X and Y, discard its Z (yaw belongs to the PCA).
  try {
    const Eigen::Matrix3d motion = kabsch_rotation(corr).transpose();
    if (const auto e = euler_zxy_from_matrix(motion)) {
      pose_.rx = normalize_angle_deg(pose_.rx + e->rx);
      pose_.ry = normalize_angle_deg(pose_.ry + e->ry);
    }
    // Singular decomposition (rx near +-90) holds the previous split.
  } catch (const DegenerateGeometry&) {
    // Collinear geometry: hold roll/pitch, keep translation/yaw updates.
  }

  const YawResult yr = pca_yaw(frame.subset, cfg_.anisotropy_threshold);
  row.aniso_ratio = yr.anisotropy_ratio;
  if (yr.state) {
    if (yaw_) {
      const YawState ys = yaw_continuity(*yaw_, *yr.state);
      pose_.rz = rz_base_ + (ys.theta - yaw_anchor_theta_);
      yaw_ = ys;
    } else {
      // Yaw just became observable: anchor it at the held value.
      yaw_ = yr.state;
      yaw_anchor_theta_ = yr.state->theta;
      rz_base_ = pose_.rz;
    }
  }
  // Unobservable yaw holds rz.

  const WorldPoint c = *frame.centroid;
  pose_.tx = tx_base_ + (c.x - centroid_anchor_->x) * 1000.0;
  pose_.ty = ty_base_ + (c.y - centroid_anchor_->y) * 1000.0;
  pose_.tz = tz_base_ + (c.z - centroid_anchor_->z) * 1000.0;

  prev_subset_ = frame.subset;
  row.pose = pose_;
  row.tracked = true;
  row.n_corr = static_cast<int>(corr.size());
  return row;
}

}  // namespace ic
