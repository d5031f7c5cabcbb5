#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <set>

#include "ic/registration.hpp"

using namespace ic;

namespace {

constexpr double kMm = 1e-3;

ContactSubset grid_subset(double x0_mm, double x1_mm, double y0_mm, double y1_mm,
                          double pitch_mm, std::uint64_t id_base = 0,
                          double z_of_xy_scale = 0.0) {
  ContactSubset s;
  std::uint64_t id = id_base;
  for (double y = y0_mm; y <= y1_mm + 1e-9; y += pitch_mm) {
    for (double x = x0_mm; x <= x1_mm + 1e-9; x += pitch_mm) {
      ++id;
      s.ids.push_back(id);
      // gentle saddle so the patch has Z structure
      s.world.push_back({x * kMm, y * kMm, z_of_xy_scale * (x * x - 0.5 * y * y) * kMm});
    }
  }
  return s;
}

PatchCloud transformed(const PatchCloud& p, double yaw_deg, const Eigen::Vector3d& t_mm) {
  PatchCloud out = p;
  const double rad = yaw_deg * M_PI / 180.0;
  Eigen::Matrix3d r;
  r = Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitZ());
  for (auto& q : out.points) q = r * q + t_mm * kMm;
  out.centroid = r * p.centroid + t_mm * kMm;
  if (out.axis) {
    const Eigen::Vector3d a = r * Eigen::Vector3d(out.axis->x(), out.axis->y(), 0.0);
    out.axis = Eigen::Vector2d(a.x(), a.y()).normalized();
  }
  return out;
}

double yaw_of(const Eigen::Matrix3d& r) {
  const auto e = euler_zxy_from_matrix(r);
  REQUIRE(e.has_value());
  return e->rz;
}

}  // namespace

TEST_CASE("prealign of a patch with itself is the identity") {
  const PatchCloud a = make_patch(grid_subset(-6, 6, -3, 3, 1.0, 0, 0.02));
  const auto t = prealign(a, a);
  REQUIRE(t.has_value());
  CHECK((t->rotation - Eigen::Matrix3d::Identity()).norm() <= 1e-9);
  CHECK(t->translation.norm() <= 1e-12);
}

TEST_CASE("prealign recovers a yaw plus centroid shift") {
  const PatchCloud a = make_patch(grid_subset(-6, 6, -3, 3, 0.5, 0, 0.02));
  const PatchCloud b = transformed(a, 30.0, {3.0, -2.0, 0.0});
  const auto t = prealign(a, b);
  REQUIRE(t.has_value());
  CHECK(yaw_of(t->rotation) == doctest::Approx(-30.0).epsilon(0.02));
  const Eigen::Vector3d shift = (t->apply(b.centroid) - b.centroid) / kMm;
  CHECK(shift.x() == doctest::Approx(-3.0).epsilon(0.05));
  CHECK(shift.y() == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::fabs(shift.z()) <= 0.1);
}

TEST_CASE("prealign uses the mod-180 branch nearest zero") {
  PatchCloud a = make_patch(grid_subset(-6, 6, -3, 3, 1.0));
  PatchCloud b = a;
  a.axis = Eigen::Vector2d(std::cos(170.0 * M_PI / 180.0), std::sin(170.0 * M_PI / 180.0));
  b.axis = Eigen::Vector2d(1.0, 0.0);
  const auto t = prealign(a, b);
  REQUIRE(t.has_value());
  CHECK(yaw_of(t->rotation) == doctest::Approx(-10.0).epsilon(1e-9));
}

TEST_CASE("prealign is unavailable for isotropic patches") {
  const PatchCloud iso = make_patch(grid_subset(-3, 3, -3, 3, 1.0));
  const PatchCloud aniso = make_patch(grid_subset(-6, 6, -3, 3, 1.0));
  CHECK(!prealign(iso, aniso).has_value());
  CHECK(!prealign(aniso, iso).has_value());
}

TEST_CASE("icp on identical patches accepts at identity") {
  const PatchCloud a = make_patch(grid_subset(-6, 6, -3, 3, 1.0, 0, 0.02));
  const RegistrationResult r = icp_refine(a, a, RigidTransform{});
  CHECK(r.converged);
  CHECK(r.accepted);
  CHECK(r.overlap_ratio == doctest::Approx(1.0));
  CHECK(r.rmse_mm <= 1e-9);
  CHECK((r.transform.rotation - Eigen::Matrix3d::Identity()).norm() <= 1e-9);
}

TEST_CASE("icp recovers the transform between partially overlapping patches") {
  // Two windows over the same saddle surface sharing ~2/3 of their ids. The
  // lattice pitch exceeds the overlap gate, so only true partners count.
  const ContactSubset full = grid_subset(-8, 8, -4.8, 6.4, 1.6, 0, 0.05);
  ContactSubset sa, sb;
  for (std::size_t i = 0; i < full.ids.size(); ++i) {
    if (full.world[i].y <= 3.21 * kMm) {
      sa.ids.push_back(full.ids[i]);
      sa.world.push_back(full.world[i]);
    }
    if (full.world[i].y >= -1.61 * kMm) {
      sb.ids.push_back(full.ids[i]);
      sb.world.push_back(full.world[i]);
    }
  }
  const PatchCloud a = make_patch(sa);
  const PatchCloud b = make_patch(sb);
  const double true_yaw = 2.0;
  const Eigen::Vector3d true_t(0.4, -0.3, 0.05);
  // b is observed in a frame rotated/translated relative to a's
  const PatchCloud b_obs = transformed(b, true_yaw, true_t);

  const RegistrationResult r = icp_refine(a, b_obs, RigidTransform{});
  CHECK(r.converged);
  CHECK(yaw_of(r.transform.rotation) == doctest::Approx(-true_yaw).epsilon(0.25));
  CHECK(r.overlap_ratio >= 0.5);
  CHECK(r.overlap_ratio <= 0.7);
  CHECK(r.rmse_mm <= 0.2);

  // the recovered transform maps shared ids back onto their a positions
  double worst = 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < b_obs.ids.size(); ++i) {
    for (std::size_t j = 0; j < a.ids.size(); ++j) {
      if (a.ids[j] == b_obs.ids[i]) {
        worst = std::max(worst, (r.transform.apply(b_obs.points[i]) - a.points[j]).norm());
        ++shared;
      }
    }
  }
  CHECK(shared > 0);
  CHECK(worst / kMm <= 0.2);
}

TEST_CASE("incompatible patches are rejected") {
  // Same footprint, strongly opposed surface curvature: no rigid transform
  // brings the shapes together, so the gates reject.
  ContactSubset sa = grid_subset(-6, 6, -4, 4, 0.8, 0, 0.0);
  ContactSubset sb = grid_subset(-6, 6, -4, 4, 0.8, 1000, 0.0);
  for (auto& p : sa.world) p.z = 0.15 * (p.x * p.x - 0.5 * p.y * p.y) / kMm;
  for (auto& p : sb.world) p.z = -0.15 * (p.x * p.x + p.y * p.y) / kMm;
  const PatchCloud a = make_patch(sa);
  const PatchCloud b = make_patch(sb);
  const RegistrationResult r = icp_refine(a, b, RigidTransform{});
  CHECK(!r.accepted);
}

TEST_CASE("spatially disjoint patches at identity stay below the overlap gate") {
  const PatchCloud a = make_patch(grid_subset(-10, -4, -3, 3, 1.0, 0, 0.02));
  const PatchCloud b = make_patch(grid_subset(4, 10, -3, 3, 1.0, 1000, 0.02));
  const RegistrationResult r = icp_refine(a, b, RigidTransform{});
  CHECK(!r.accepted);
  CHECK(r.overlap_ratio < 0.35);
}

TEST_CASE("accepted registrations never exceed the initial residual") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const PatchCloud a = make_patch(grid_subset(-6, 6, -4, 4, 0.8, 0, 0.05));
  for (int t = 0; t < 10; ++t) {
    PatchCloud b = transformed(a, u(rng) * 6.0, {u(rng), u(rng), 0.1 * u(rng)});
    const auto init = prealign(a, b);
    REQUIRE(init.has_value());
    // residual at the init transform, same gate as icp_refine's final pass
    RegistrationConfig cfg;
    const RegistrationResult at_init = icp_refine(a, b, *init, [] {
      RegistrationConfig c;
      c.max_iters = 0;
      return c;
    }());
    const RegistrationResult refined = icp_refine(a, b, *init, cfg);
    if (refined.accepted) {
      CHECK(refined.rmse_mm <= at_init.rmse_mm + 1e-12);
      CHECK(refined.overlap_ratio >= cfg.overlap_gate);
      CHECK(refined.rmse_mm <= cfg.rmse_gate_mm);
    }
  }
}

TEST_CASE("fused map deduplicates ids and stays unique") {
  const ContactSubset s = grid_subset(-6, 6, -3, 3, 1.0, 0, 0.02);
  const PatchCloud a = make_patch(s);
  FusedMap map;
  map.seed(a);
  const std::size_t n0 = map.size();
  CHECK(n0 == a.size());

  // identical second patch: fully deduplicated
  const RegistrationResult r = map.accumulate(a);
  CHECK(r.accepted);
  CHECK(map.size() == n0);

  std::set<std::uint64_t> ids;
  for (const auto& e : map.entries()) {
    CHECK(ids.insert(e.id).second);
    CHECK(e.n_obs == 2);
  }
}

TEST_CASE("rejected patches leave the map unchanged") {
  ContactSubset sa = grid_subset(-6, 6, -3, 3, 1.0, 0, 0.0);
  ContactSubset sb = grid_subset(40, 52, -3, 3, 1.0, 5000, 0.0);
  for (auto& p : sa.world) p.z = 0.15 * (p.x * p.x - 0.5 * p.y * p.y) / kMm;
  for (auto& p : sb.world) {
    const double dx = (p.x - 46.0 * kMm) / kMm;
    p.z = -0.2 * (dx * dx + (p.y / kMm) * (p.y / kMm)) * kMm;
  }
  const PatchCloud a = make_patch(sa);
  const PatchCloud far = make_patch(sb);
  FusedMap map;
  map.seed(a);
  const std::size_t n0 = map.size();
  const RegistrationResult r = map.accumulate(far);
  CHECK(!r.accepted);
  CHECK(map.size() == n0);
}

TEST_CASE("duplicate-id positions are averaged") {
  ContactSubset s;
  s.ids = {1, 2, 3, 4};
  s.world = {{0, 0, 0}, {1 * kMm, 0, 0}, {0, 1 * kMm, 0}, {1 * kMm, 1 * kMm, 0}};
  PatchCloud a = make_patch(s);
  FusedMap map;
  map.seed(a);
  // shift the same ids by a sub-gate amount; accumulate averages positions
  PatchCloud b = a;
  for (auto& p : b.points) p.x() += 0.2 * kMm;
  b.centroid.x() += 0.2 * kMm;
  RegistrationConfig cfg;
  cfg.overlap_gate = 0.2;
  cfg.rmse_gate_mm = 1.0;
  const RegistrationResult r = map.accumulate(b, cfg);
  CHECK(r.accepted);
  CHECK(map.size() == 4);
  // ICP aligns b back onto a (same ids, same shape), so averaged positions
  // stay within the alignment tolerance of the originals.
  for (std::size_t i = 0; i < map.entries().size(); ++i) {
    CHECK(std::fabs(map.entries()[i].position.x() - a.points[i].x()) <= 0.11 * kMm);
  }
}

TEST_CASE("baseline tracker stays near zero on a static noiseless sequence") {
  std::vector<ContactFrame> frames;
  for (int k = 0; k < 10; ++k) {
    ContactFrame f;
    f.frame_index = k;
    f.subset = grid_subset(-6, 6, -3, 3, 1.0, 0, 0.05);
    f.subset.frame_index = k;
    f.centroid = WorldPoint{0, 0, 0};
    frames.push_back(f);
  }
  BaselineConfig cfg;
  cfg.feature_jitter_mm = 0.0;  // probe the ICP chain itself
  const auto rows = baseline_nn_icp_track(frames, cfg);
  REQUIRE(rows.size() == frames.size());
  const Pose& final = rows.back().pose;
  CHECK(std::fabs(final.tx) <= 1e-6);
  CHECK(std::fabs(final.ty) <= 1e-6);
  CHECK(std::fabs(final.rz) <= 1e-6);
}

TEST_CASE("map contour of a rectangular patch hugs its outline") {
  const PatchCloud a = make_patch(grid_subset(-8, 8, -4, 4, 0.8, 0, 0.0));
  FusedMap map;
  map.seed(a);
  const auto contour = map_contour_xy_mm(map, 0.8);
  CHECK(!contour.empty());
  for (const auto& p : contour) {
    const bool near_x = std::fabs(std::fabs(p.x()) - 8.0) <= 0.85;
    const bool near_y = std::fabs(std::fabs(p.y()) - 4.0) <= 0.85;
    CHECK((near_x || near_y));
  }
}
