#include "ic/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ic {
namespace {

constexpr double kRadPerDeg = M_PI / 180.0;

double pose_dof(const Pose& p, Dof d) {
  switch (d) {
    case Dof::Tx: return p.tx;
    case Dof::Ty: return p.ty;
    case Dof::Tz: return p.tz;
    case Dof::Rx: return p.rx;
    case Dof::Ry: return p.ry;
    case Dof::Rz: return p.rz;
  }
  return 0.0;
}

void set_pose_dof(Pose& p, Dof d, double v) {
  switch (d) {
    case Dof::Tx: p.tx = v; break;
    case Dof::Ty: p.ty = v; break;
    case Dof::Tz: p.tz = v; break;
    case Dof::Rx: p.rx = v; break;
    case Dof::Ry: p.ry = v; break;
    case Dof::Rz: p.rz = v; break;
  }
}

void require_upright(const Pose& pose, const char* shape) {
  if (std::fabs(pose.rx) > 1e-9 || std::fabs(pose.ry) > 1e-9)
    throw std::invalid_argument(std::string(shape) + " supports yaw only (rx/ry must be zero)");
}

bool point_in_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
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

double distance_to_outline(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double ax = poly[j][0], ay = poly[j][1];
    const double bx = poly[i][0], by = poly[i][1];
    const double ux = bx - ax, uy = by - ay;
    const double len2 = ux * ux + uy * uy;
    double t = len2 > 0.0 ? ((x - ax) * ux + (y - ay) * uy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = x - (ax + t * ux), dy = y - (ay + t * uy);
    best = std::min(best, dx * dx + dy * dy);
  }
  return std::sqrt(best);
}

struct PenetrationField {
  std::vector<double> pen_mm;  // row-major, max(0, penetration)
  int width = 0, height = 0;
};

/// Signed penetration of the object below the gel plane per pixel column.
PenetrationField penetration_field(const SceneObject& obj, const Pose& pose,
                                   const SensorParams& sensor) {
  PenetrationField f;
  f.width = sensor.width;
  f.height = sensor.height;
  f.pen_mm.assign(static_cast<std::size_t>(sensor.width) * sensor.height, 0.0);

  const double mm_per_px = 1.0 / sensor.ppmm;
  const double cx = (sensor.width - 1) / 2.0;
  const double cy = (sensor.height - 1) / 2.0;

  const auto world_of = [&](int px, int py) {
    return std::array<double, 2>{(px - cx) * mm_per_px, (cy - py) * mm_per_px};
  };

  if (const auto* e = std::get_if<Ellipsoid>(&obj); e || std::holds_alternative<Sphere>(obj)) {
    double sa, sb, sc;
    if (e) {
      sa = e->a_mm;
      sb = e->b_mm;
      sc = e->c_mm;
    } else {
      const double r = std::get<Sphere>(obj).radius_mm;
      sa = sb = sc = r;
    }
    if (!(sa > 0.0 && sb > 0.0 && sc > 0.0)) throw std::invalid_argument("semi-axes must be positive");
    const Eigen::Matrix3d r = matrix_from_euler_zxy(pose.rx, pose.ry, pose.rz);
    const Eigen::Vector3d rest_center(0.0, 0.0, sc);
    const Eigen::Vector3d center =
        r * rest_center + Eigen::Vector3d(pose.tx, pose.ty, pose.tz);
    Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
    d(0, 0) = 1.0 / (sa * sa);
    d(1, 1) = 1.0 / (sb * sb);
    d(2, 2) = 1.0 / (sc * sc);
    const Eigen::Matrix3d m = r * d * r.transpose();
    for (int py = 0; py < sensor.height; ++py) {
      for (int px = 0; px < sensor.width; ++px) {
        const auto w = world_of(px, py);
        const double dx = w[0] - center.x(), dy = w[1] - center.y();
        const double qa = m(2, 2);
        const double qb = 2.0 * (m(0, 2) * dx + m(1, 2) * dy);
        const double qc =
            m(0, 0) * dx * dx + 2.0 * m(0, 1) * dx * dy + m(1, 1) * dy * dy - 1.0;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc <= 0.0) continue;
        const double zlow = center.z() + (-qb - std::sqrt(disc)) / (2.0 * qa);
        if (zlow < 0.0)
          f.pen_mm[static_cast<std::size_t>(py) * sensor.width + px] = -zlow;
      }
    }
    return f;
  }

  if (const auto* b = std::get_if<BoxCorner>(&obj)) {
    if (!(b->w_mm > 0.0 && b->h_mm > 0.0) || b->edge_round_mm < 0.0 ||
        b->edge_round_mm > std::min(b->w_mm, b->h_mm) / 2.0)
      throw std::invalid_argument("invalid box dimensions");
    require_upright(pose, "box_corner");
    const double c = std::cos(-pose.rz * kRadPerDeg), s = std::sin(-pose.rz * kRadPerDeg);
    const double hx = b->w_mm / 2.0 - b->edge_round_mm;
    const double hy = b->h_mm / 2.0 - b->edge_round_mm;
    const double re = b->edge_round_mm;
    for (int py = 0; py < sensor.height; ++py) {
      for (int px = 0; px < sensor.width; ++px) {
        const auto w = world_of(px, py);
        const double ox = c * (w[0] - pose.tx) - s * (w[1] - pose.ty);
        const double oy = s * (w[0] - pose.tx) + c * (w[1] - pose.ty);
        const double qx = std::fabs(ox) - hx, qy = std::fabs(oy) - hy;
        const double sd = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0)) +
                          std::min(std::max(qx, qy), 0.0) - re;
        if (sd > 0.0) continue;  // outside the rounded footprint
        double lift = 0.0;
        if (sd > -re) {
          const double t = sd + re;
          lift = re - std::sqrt(re * re - t * t);
        }
        const double zlow = pose.tz + lift;
        if (zlow < 0.0)
          f.pen_mm[static_cast<std::size_t>(py) * sensor.width + px] = -zlow;
      }
    }
    return f;
  }

  const auto& o = std::get<ExtrudedOutline>(obj);
  if (o.polygon_mm.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  if (!(o.rim_mm > 0.0)) throw std::invalid_argument("rim width must be positive");
  require_upright(pose, "extruded_outline");
  const double c = std::cos(-pose.rz * kRadPerDeg), s = std::sin(-pose.rz * kRadPerDeg);
  for (int py = 0; py < sensor.height; ++py) {
    for (int px = 0; px < sensor.width; ++px) {
      const auto w = world_of(px, py);
      const double ox = c * (w[0] - pose.tx) - s * (w[1] - pose.ty);
      const double oy = s * (w[0] - pose.tx) + c * (w[1] - pose.ty);
      if (!point_in_polygon(o.polygon_mm, ox, oy)) continue;
      const double din = distance_to_outline(o.polygon_mm, ox, oy);
      double depth = -pose.tz;
      if (o.press_radius_mm > 0.0) {
        const double rho2 = (w[0] * w[0] + w[1] * w[1]) / (o.press_radius_mm * o.press_radius_mm);
        depth *= std::max(0.0, 1.0 - rho2);  // parabolic pressure dome
      }
      const double zlow = -depth + std::max(0.0, o.rim_mm - din);  // 45-degree rim chamfer
      if (zlow < 0.0)
        f.pen_mm[static_cast<std::size_t>(py) * sensor.width + px] = -zlow;
    }
  }
  return f;
}

/// Rim band of a mask: pixels whose 3x3 neighborhood mixes values.
std::vector<std::size_t> rim_pixels(const ContactMask& m) {
  std::vector<std::size_t> rim;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const std::uint8_t v = m.at(x, y);
      bool mixed = false;
      for (int dy = -1; dy <= 1 && !mixed; ++dy) {
        for (int dx = -1; dx <= 1 && !mixed; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (m.in_bounds(nx, ny) && m.at(nx, ny) != v) mixed = true;
        }
      }
      if (mixed) rim.push_back(static_cast<std::size_t>(y) * m.width + x);
    }
  }
  return rim;
}

FrameBundle assemble_frame(const PenetrationField& pen, const Pose& pose,
                           const SensorParams& sensor, const NoiseParams& noise,
                           std::uint64_t frame_seed) {
  FrameBundle fb;
  fb.pose_gt = pose;
  fb.noise_seed = frame_seed;
  fb.height = make_height_map(sensor.width, sensor.height, sensor.ppmm);
  fb.mask_gt = make_mask(sensor.width, sensor.height, 0);
  for (std::size_t i = 0; i < pen.pen_mm.size(); ++i) {
    fb.height.data[i] = -pen.pen_mm[i] * sensor.ppmm;  // depression, pixel units
    fb.mask_gt.bits[i] = pen.pen_mm[i] > 0.0 ? 1 : 0;
  }

  std::mt19937_64 rng(frame_seed);
  if (noise.height_sigma_mm > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise.height_sigma_mm * sensor.ppmm);
    for (double& h : fb.height.data) h += gauss(rng);
  }
  if (noise.mask_flip_prob > 0.0) {
    std::bernoulli_distribution flip(noise.mask_flip_prob);
    for (const std::size_t i : rim_pixels(fb.mask_gt)) {
      if (flip(rng)) fb.mask_gt.bits[i] ^= 1;
    }
  }
  return fb;
}

void check_continuity(const Trajectory& traj) {
  if (traj.kind == TrajKind::MultiContact) return;
  for (std::size_t k = 1; k < traj.schedule.size(); ++k) {
    const Pose &a = traj.schedule[k - 1], &b = traj.schedule[k];
    if (std::fabs(b.tx - a.tx) > 5.0 || std::fabs(b.ty - a.ty) > 5.0 ||
        std::fabs(b.tz - a.tz) > 5.0 || std::fabs(b.rx - a.rx) > 5.0 ||
        std::fabs(b.ry - a.ry) > 5.0 || std::fabs(b.rz - a.rz) > 5.0)
      throw std::invalid_argument("discontinuous trajectory (per-frame step exceeds 5mm/5deg)");
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

ExtrudedOutline scissors_template() {
  ExtrudedOutline o;
  o.polygon_mm = {{0.0, 0.0},    {23.0, 3.2},  {26.0, 4.5},  {29.0, 7.0},  {34.0, 8.2},
                  {39.0, 7.5},   {43.0, 5.0},  {44.5, 2.0},  {44.0, -2.0}, {40.5, -5.0},
                  {35.0, -6.5},  {30.0, -5.5}, {26.5, -3.2}, {23.0, -1.8}};
  o.rim_mm = 1.0;
  return o;
}

Trajectory make_static(const Pose& pose, int frames) {
  if (frames < 1) throw std::invalid_argument("frames must be positive");
  Trajectory t;
  t.kind = TrajKind::Static;
  t.schedule.assign(static_cast<std::size_t>(frames), pose);
  return t;
}

Trajectory make_single_axis(const Pose& base, Dof dof, double rate_per_frame, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be positive");
  Trajectory t;
  t.kind = TrajKind::SingleAxis;
  t.schedule.reserve(static_cast<std::size_t>(steps) + 1);
  // steps motion increments, steps+1 poses: the ramp completes rate*steps.
  for (int k = 0; k <= steps; ++k) {
    Pose p = base;
    set_pose_dof(p, dof, pose_dof(base, dof) + rate_per_frame * k);
    t.schedule.push_back(p);
  }
  return t;
}

Trajectory make_return_loop(const Pose& base, Dof dof, double rate_per_frame, int half_frames) {
  if (half_frames < 1) throw std::invalid_argument("half_frames must be positive");
  Trajectory t;
  t.kind = TrajKind::ReturnLoop;
  for (int k = 0; k <= half_frames; ++k) {
    Pose p = base;
    set_pose_dof(p, dof, pose_dof(base, dof) + rate_per_frame * k);
    t.schedule.push_back(p);
  }
  for (int k = half_frames - 1; k >= 0; --k) t.schedule.push_back(t.schedule[static_cast<std::size_t>(k)]);
  return t;
}

Trajectory make_multi_contact(std::vector<Pose> placements) {
  if (placements.empty()) throw std::invalid_argument("placements must be non-empty");
  Trajectory t;
  t.kind = TrajKind::MultiContact;
  t.schedule = std::move(placements);
  return t;
}

FrameBundle render_frame(const SceneObject& obj, const Pose& pose, const SensorParams& sensor,
                         const NoiseParams& noise, std::uint64_t seed) {
  return assemble_frame(penetration_field(obj, pose, sensor), pose, sensor, noise, seed);
}

SequenceRenderer::SequenceRenderer(SceneObject obj, Trajectory traj, SensorParams sensor,
                                   NoiseParams noise, std::uint64_t seed, bool slip)
    : obj_(std::move(obj)),
      traj_(std::move(traj)),
      sensor_(sensor),
      noise_(noise),
      seed_(seed),
      slip_(slip) {
  check_continuity(traj_);
  if (traj_.schedule.empty()) throw std::invalid_argument("empty trajectory");
  if (slip_) {
    const Pose& p0 = traj_.schedule.front();
    for (const Pose& p : traj_.schedule) {
      if (p.tx != p0.tx || p.ty != p0.ty || p.tz != p0.tz || p.rx != p0.rx || p.ry != p0.ry)
        throw std::invalid_argument("slip rendering requires a pure Z-rotation trajectory");
    }
    base_pen_mm_ = penetration_field(obj_, p0, sensor_).pen_mm;
  }
}

FrameBundle SequenceRenderer::frame(std::size_t k) const {
  const Pose& pose = traj_.schedule.at(k);
  PenetrationField cur = penetration_field(obj_, pose, sensor_);
  if (slip_) {
    // Stuck region keeps the first frame's texture; newly covered pixels get
    // the rotated object's own penetration; released pixels revert to rest.
    for (std::size_t i = 0; i < cur.pen_mm.size(); ++i) {
      if (cur.pen_mm[i] > 0.0 && base_pen_mm_[i] > 0.0) cur.pen_mm[i] = base_pen_mm_[i];
    }
  }
  return assemble_frame(cur, pose, sensor_, noise_, splitmix64(seed_ + k));
}

std::vector<FrameBundle> render_sequence(const SceneObject& obj, const Trajectory& traj,
                                         const SensorParams& sensor, const NoiseParams& noise,
                                         std::uint64_t seed) {
  const SequenceRenderer r(obj, traj, sensor, noise, seed, false);
  std::vector<FrameBundle> out;
  out.reserve(r.frame_count());
  for (std::size_t k = 0; k < r.frame_count(); ++k) out.push_back(r.frame(k));
  return out;
}

std::vector<FrameBundle> render_slip_sequence(const SceneObject& obj, const Trajectory& traj,
                                              const SensorParams& sensor, const NoiseParams& noise,
                                              std::uint64_t seed) {
  const SequenceRenderer r(obj, traj, sensor, noise, seed, true);
  std::vector<FrameBundle> out;
  out.reserve(r.frame_count());
  for (std::size_t k = 0; k < r.frame_count(); ++k) out.push_back(r.frame(k));
  return out;
}

HeightMap render_reference(const SensorParams& sensor) {
  return make_height_map(sensor.width, sensor.height, sensor.ppmm, 0.0);
}

ContactMask render_marker_mask(const SensorParams& sensor, int rows, int cols, int dot_radius_px,
                               int margin_px) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("marker grid must be at least 2x2");
  ContactMask m = make_mask(sensor.width, sensor.height, 0);
  const double x0 = margin_px, y0 = margin_px;
  const double sx = (sensor.width - 1.0 - 2.0 * margin_px) / (cols - 1);
  const double sy = (sensor.height - 1.0 - 2.0 * margin_px) / (rows - 1);
  const double r2 = static_cast<double>(dot_radius_px) * dot_radius_px;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double dot_cx = x0 + c * sx;
      const double dot_cy = y0 + r * sy;
      const int xlo = static_cast<int>(std::floor(dot_cx - dot_radius_px));
      const int xhi = static_cast<int>(std::ceil(dot_cx + dot_radius_px));
      const int ylo = static_cast<int>(std::floor(dot_cy - dot_radius_px));
      const int yhi = static_cast<int>(std::ceil(dot_cy + dot_radius_px));
      for (int y = std::max(0, ylo); y <= std::min(sensor.height - 1, yhi); ++y) {
        for (int x = std::max(0, xlo); x <= std::min(sensor.width - 1, xhi); ++x) {
          const double dx = x - dot_cx, dy = y - dot_cy;
          if (dx * dx + dy * dy <= r2) m.at(x, y) = 1;
        }
      }
    }
  }
  return m;
}

}  // namespace ic
