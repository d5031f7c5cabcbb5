#include "ic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ic/errors.hpp"

namespace ic {
namespace {

const char* kDofNames[6] = {"tx_mm", "ty_mm", "tz_mm", "rx_deg", "ry_deg", "rz_deg"};

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.precision(10);
  return os;
}

}  // namespace

DofArray pose_to_array(const Pose& p) { return {p.tx, p.ty, p.tz, p.rx, p.ry, p.rz}; }

double geodesic_rotation_deg(const Pose& a, const Pose& b) {
  const Eigen::Matrix3d ra = matrix_from_euler_zxy(a.rx, a.ry, a.rz);
  const Eigen::Matrix3d rb = matrix_from_euler_zxy(b.rx, b.ry, b.rz);
  const double c = std::clamp(((ra.transpose() * rb).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

DriftReport static_drift(const std::vector<TrackRow>& track, const Pose& gt) {
  if (track.empty()) throw std::invalid_argument("empty track");
  DriftReport r;
  const DofArray g = pose_to_array(gt);
  for (const auto& row : track) {
    if (!row.tracked) continue;
    const DofArray p = pose_to_array(row.pose);
    for (int i = 0; i < 6; ++i) r.mae[i] += std::fabs(p[i] - g[i]);
    r.mean_geodesic_deg += geodesic_rotation_deg(row.pose, gt);
    ++r.frames_used;
  }
  if (r.frames_used == 0) throw std::invalid_argument("no tracked frames");
  for (int i = 0; i < 6; ++i) r.mae[i] /= r.frames_used;
  r.mean_geodesic_deg /= r.frames_used;
  for (auto it = track.rbegin(); it != track.rend(); ++it) {
    if (!it->tracked) continue;
    const DofArray p = pose_to_array(it->pose);
    for (int i = 0; i < 6; ++i) r.final_drift[i] = std::fabs(p[i] - g[i]);
    break;
  }
  return r;
}

DriftReport average_drift(const std::vector<DriftReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to average");
  DriftReport out;
  out.sequences = static_cast<int>(reports.size());
  for (const auto& r : reports) {
    for (int i = 0; i < 6; ++i) {
      out.mae[i] += r.mae[i];
      out.final_drift[i] += r.final_drift[i];
    }
    out.mean_geodesic_deg += r.mean_geodesic_deg;
    out.frames_used += r.frames_used;
  }
  for (int i = 0; i < 6; ++i) {
    out.mae[i] /= reports.size();
    out.final_drift[i] /= reports.size();
  }
  out.mean_geodesic_deg /= reports.size();
  return out;
}

RepeatabilityReport repeatability_error(const std::vector<TrackRow>& track) {
  RepeatabilityReport r;
  for (auto it = track.rbegin(); it != track.rend(); ++it) {
    if (!it->tracked) continue;
    const DofArray p = pose_to_array(it->pose);
    for (int i = 0; i < 6; ++i) r.abs_error[i] = std::fabs(p[i]);
    return r;
  }
  throw std::invalid_argument("track has no tracked frames");
}

RepeatabilityReport average_repeatability(const std::vector<RepeatabilityReport>& trials) {
  if (trials.empty()) throw std::invalid_argument("no trials to average");
  RepeatabilityReport out;
  out.trials = static_cast<int>(trials.size());
  for (const auto& t : trials) {
    for (int i = 0; i < 6; ++i) out.abs_error[i] += t.abs_error[i];
  }
  for (int i = 0; i < 6; ++i) out.abs_error[i] /= trials.size();
  return out;
}

double contour_similarity(const ContactMask& a, const ContactMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("mask dims mismatch");
  const ContactMask la = largest_component(a);
  const ContactMask lb = largest_component(b);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < la.bits.size(); ++i) {
    inter += la.bits[i] & lb.bits[i];
    uni += la.bits[i] | lb.bits[i];
  }
  if (uni == 0) return 0.0;
  if (la.count() == 0 || lb.count() == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

AccuracyReport tracking_accuracy(const std::vector<TrackRow>& track,
                                 const std::vector<TrackRow>& gt_schedule) {
  if (track.size() != gt_schedule.size())
    throw std::invalid_argument("track and ground truth must have the same frame count");
  AccuracyReport r;
  for (std::size_t k = 0; k < track.size(); ++k) {
    if (track[k].frame != gt_schedule[k].frame)
      throw std::invalid_argument("track/ground-truth frame indices mismatch");
    if (!track[k].tracked) continue;
    const DofArray p = pose_to_array(track[k].pose);
    const DofArray g = pose_to_array(gt_schedule[k].pose);
    DofArray e;
    for (int i = 0; i < 6; ++i) e[i] = p[i] - g[i];
    r.frames.push_back(track[k].frame);
    r.errors.push_back(e);
  }
  if (!r.errors.empty()) {
    for (const auto& e : r.errors) {
      for (int i = 0; i < 6; ++i) {
        r.rms[i] += e[i] * e[i];
        r.max_abs[i] = std::max(r.max_abs[i], std::fabs(e[i]));
      }
    }
    for (int i = 0; i < 6; ++i) r.rms[i] = std::sqrt(r.rms[i] / r.errors.size());
  }
  return r;
}

void write_drift_markdown(const std::string& path,
                          const std::vector<std::pair<std::string, DriftReport>>& rows) {
  auto os = open_out(path);
  os << "# Static cumulative drift (MAE over tracked frames)\n\n";
  os << "| Method | dx (mm) | dy (mm) | dz (mm) | dtheta_x (deg) | dtheta_y (deg) | dtheta_z (deg) | geodesic (deg) | frames |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, r] : rows) {
    os << "| " << name;
    for (int i = 0; i < 6; ++i) os << " | " << r.mae[i];
    os << " | " << r.mean_geodesic_deg << " | " << r.frames_used << " |\n";
  }
}

void write_drift_csv(const std::string& path,
                     const std::vector<std::pair<std::string, DriftReport>>& rows) {
  auto os = open_out(path);
  os << "method";
  for (const char* d : kDofNames) os << ",mae_" << d;
  for (const char* d : kDofNames) os << ",final_" << d;
  os << ",mean_geodesic_deg,frames,sequences\n";
  for (const auto& [name, r] : rows) {
    os << name;
    for (int i = 0; i < 6; ++i) os << "," << r.mae[i];
    for (int i = 0; i < 6; ++i) os << "," << r.final_drift[i];
    os << "," << r.mean_geodesic_deg << "," << r.frames_used << "," << r.sequences << "\n";
  }
}

void write_repeat_markdown(const std::string& path,
                           const std::vector<std::pair<std::string, RepeatabilityReport>>& rows) {
  auto os = open_out(path);
  os << "# Repeatability (return) error vs expected zero pose\n\n";
  os << "| Method | tx (mm) | ty (mm) | tz (mm) | rx (deg) | ry (deg) | rz (deg) | trials |\n";
  os << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, r] : rows) {
    os << "| " << name;
    for (int i = 0; i < 6; ++i) os << " | " << r.abs_error[i];
    os << " | " << r.trials << " |\n";
  }
}

void write_repeat_csv(const std::string& path,
                      const std::vector<std::pair<std::string, RepeatabilityReport>>& rows) {
  auto os = open_out(path);
  os << "method";
  for (const char* d : kDofNames) os << ",abs_" << d;
  os << ",trials\n";
  for (const auto& [name, r] : rows) {
    os << name;
    for (int i = 0; i < 6; ++i) os << "," << r.abs_error[i];
    os << "," << r.trials << "\n";
  }
}

void write_accuracy_csv(const std::string& path, const AccuracyReport& report) {
  auto os = open_out(path);
  os << "frame";
  for (const char* d : kDofNames) os << ",err_" << d;
  os << "\n";
  for (std::size_t k = 0; k < report.frames.size(); ++k) {
    os << report.frames[k];
    for (int i = 0; i < 6; ++i) os << "," << report.errors[k][i];
    os << "\n";
  }
}

void write_accuracy_markdown(const std::string& path,
                             const std::vector<std::pair<std::string, AccuracyReport>>& rows) {
  auto os = open_out(path);
  os << "# Tracking accuracy vs ground truth\n\n";
  os << "| Method | metric | tx (mm) | ty (mm) | tz (mm) | rx (deg) | ry (deg) | rz (deg) |\n";
  os << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& [name, r] : rows) {
    os << "| " << name << " | rms";
    for (int i = 0; i < 6; ++i) os << " | " << r.rms[i];
    os << " |\n| " << name << " | max";
    for (int i = 0; i < 6; ++i) os << " | " << r.max_abs[i];
    os << " |\n";
  }
}

}  // namespace ic
