#pragma once

#include <array>
#include <string>
#include <vector>

#include "ic/morphology.hpp"
#include "ic/pose.hpp"

namespace ic {

/// Per-DoF values ordered tx, ty, tz (mm), rx, ry, rz (deg).
using DofArray = std::array<double, 6>;

DofArray pose_to_array(const Pose& p);

/// Static cumulative drift: per-DoF MAE of the tracked frames against a
/// constant ground-truth pose, plus the final-frame drift and a geodesic
/// rotation diagnostic. Untracked frames are excluded by contract.
struct DriftReport {
  DofArray mae{};
  DofArray final_drift{};
  double mean_geodesic_deg = 0.0;
  int frames_used = 0;
  int sequences = 1;
};

DriftReport static_drift(const std::vector<TrackRow>& track, const Pose& gt);
DriftReport average_drift(const std::vector<DriftReport>& reports);

/// Repeatability: per-DoF absolute error of the final tracked pose vs the
/// expected zero pose. The contour gate is the caller's responsibility
/// (gate-failed trials are discarded before averaging).
struct RepeatabilityReport {
  DofArray abs_error{};
  int trials = 1;
};

RepeatabilityReport repeatability_error(const std::vector<TrackRow>& track);
RepeatabilityReport average_repeatability(const std::vector<RepeatabilityReport>& trials);

/// IoU of the masks' largest connected components; 0 when either is empty,
/// 1 only for identical components.
double contour_similarity(const ContactMask& a, const ContactMask& b);

/// Per-frame signed error series against a ground-truth schedule, plus RMS
/// and max magnitude per DoF. Frame indices must match row-for-row.
struct AccuracyReport {
  std::vector<int> frames;
  std::vector<DofArray> errors;  // signed, per tracked frame
  DofArray rms{};
  DofArray max_abs{};
};

AccuracyReport tracking_accuracy(const std::vector<TrackRow>& track,
                                 const std::vector<TrackRow>& gt_schedule);

/// Geodesic angle (deg) between the Z-X-Y rotations of two poses.
double geodesic_rotation_deg(const Pose& a, const Pose& b);

// Report writers shared by the CLI.
void write_drift_markdown(const std::string& path,
                          const std::vector<std::pair<std::string, DriftReport>>& rows);
void write_drift_csv(const std::string& path,
                     const std::vector<std::pair<std::string, DriftReport>>& rows);
void write_repeat_markdown(const std::string& path,
                           const std::vector<std::pair<std::string, RepeatabilityReport>>& rows);
void write_repeat_csv(const std::string& path,
                      const std::vector<std::pair<std::string, RepeatabilityReport>>& rows);
void write_accuracy_csv(const std::string& path, const AccuracyReport& report);
void write_accuracy_markdown(const std::string& path,
                             const std::vector<std::pair<std::string, AccuracyReport>>& rows);

}  // namespace ic
