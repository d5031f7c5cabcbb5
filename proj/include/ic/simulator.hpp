#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ic/contact.hpp"
#include "ic/pose.hpp"

namespace ic {

// Scene objects, all dimensions in mm. At zero pose the unrotated shape's
// lowest point touches the gel plane; tz < 0 presses it in by |tz|.

struct Sphere {
  double radius_mm = 10.0;
};

struct Ellipsoid {
  double a_mm = 8.0, b_mm = 4.0, c_mm = 6.0;  // semi-axes
};

/// Flat-bottomed box pressed face-on; vertical edges rounded. Yaw only.
struct BoxCorner {
  double w_mm = 14.0, h_mm = 10.0, edge_round_mm = 2.0;
};

/// Prism over a simple 2-D polygon with a 45-degree chamfered rim of width
/// `rim_mm`. When `press_radius_mm` is positive the press is localized: the
/// indentation follows a parabolic pressure dome about the sensor axis, so
/// each contact exposes a patch of the outline rather than the whole
/// window-clipped cross-section (and carries height structure everywhere).
/// Yaw only.
struct ExtrudedOutline {
  std::vector<std::array<double, 2>> polygon_mm;
  double rim_mm = 1.0;
  double press_radius_mm = 0.0;  // 0: uniform flat press
};

using SceneObject = std::variant<Sphere, Ellipsoid, BoxCorner, ExtrudedOutline>;

/// The template driving the SLAM scenario: a toy-scissors outline, about
/// 44 x 16 mm.
ExtrudedOutline scissors_template();

struct SensorParams {
  int width = 320;
  int height = 240;
  double ppmm = 10.0;  // pixels per mm
  double fps = 25.0;
};

struct NoiseParams {
  double height_sigma_mm = 0.02;  // additive i.i.d. Gaussian on heights
  double mask_flip_prob = 0.002;  // per-pixel flips within the mask rim band
};

enum class Dof { Tx = 0, Ty, Tz, Rx, Ry, Rz };

enum class TrajKind { Static, SingleAxis, ReturnLoop, MultiContact };

struct Trajectory {
  TrajKind kind = TrajKind::Static;
  std::vector<Pose> schedule;  // one pose per frame (MultiContact: per patch)
};

Trajectory make_static(const Pose& pose, int frames);
/// Ramp of `steps` motion increments (steps+1 poses); the final pose has
/// moved by rate_per_frame * steps.
Trajectory make_single_axis(const Pose& base, Dof dof, double rate_per_frame, int steps);
/// Out-and-back palindrome: forward half_frames steps, then the mirror.
/// First and last poses are bitwise equal.
Trajectory make_return_loop(const Pose& base, Dof dof, double rate_per_frame, int half_frames);
Trajectory make_multi_contact(std::vector<Pose> placements);

/// One synthetic observation plus its exact ground truth.
struct FrameBundle {
  HeightMap height;
  ContactMask mask_gt;  // penetration > 0, with boundary jitter when noisy
  Pose pose_gt;
  std::uint64_t noise_seed = 0;
};

/// Render one contact frame: heights are -max(0, penetration) in pixel
/// units (depression convention), the ground-truth mask is penetration > 0.
/// A pose with no penetration yields a valid empty-contact frame.
FrameBundle render_frame(const SceneObject& obj, const Pose& pose, const SensorParams& sensor,
                         const NoiseParams& noise, std::uint64_t seed);

/// Deterministic per-frame seeds derived from `seed`. Throws
/// std::invalid_argument for discontinuous non-multi-contact schedules.
std::vector<FrameBundle> render_sequence(const SceneObject& obj, const Trajectory& traj,
                                         const SensorParams& sensor, const NoiseParams& noise,
                                         std::uint64_t seed);

/// Torsional-slip rendering for a pure Z-rotation trajectory: the contact
/// silhouette rotates with the object while heights inside the stuck region
/// keep the first frame's texture. The adversarial input where point
/// trackers fail and silhouette yaw succeeds.
std::vector<FrameBundle> render_slip_sequence(const SceneObject& obj, const Trajectory& traj,
                                              const SensorParams& sensor, const NoiseParams& noise,
                                              std::uint64_t seed);

/// Streaming renderer: frames are rendered on demand (frame k depends only
/// on the seed and k) so long sequences never need to be materialized.
class SequenceRenderer {
 public:
  SequenceRenderer(SceneObject obj, Trajectory traj, SensorParams sensor, NoiseParams noise,
                   std::uint64_t seed, bool slip = false);

  std::size_t frame_count() const { return traj_.schedule.size(); }
  const SensorParams& sensor() const { return sensor_; }
  const Trajectory& trajectory() const { return traj_; }
  FrameBundle frame(std::size_t k) const;

 private:
  SceneObject obj_;
  Trajectory traj_;
  SensorParams sensor_;
  NoiseParams noise_;
  std::uint64_t seed_;
  bool slip_ = false;
  std::vector<double> base_pen_mm_;  // slip mode: first frame's penetration
};

/// No-contact initialization data: a flat reference height map and the
/// fiducial dot mask (rows x cols dots of the given radius).
HeightMap render_reference(const SensorParams& sensor);
ContactMask render_marker_mask(const SensorParams& sensor, int rows = 7, int cols = 9,
                               int dot_radius_px = 3, int margin_px = 24);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ic
