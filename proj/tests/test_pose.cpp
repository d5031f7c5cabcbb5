#include <doctest.h>

#include <stdexcept>

#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "ic/errors.hpp"
#include "ic/pose.hpp"

using namespace ic;

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Correspondences make_corr(const std::vector<Eigen::Vector3d>& p,
                          const std::vector<Eigen::Vector3d>& q) {
  Correspondences c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.ids.push_back(i + 1);
    c.px.push_back(p[i].x());
    c.py.push_back(p[i].y());
    c.pz.push_back(p[i].z());
    c.qx.push_back(q[i].x());
    c.qy.push_back(q[i].y());
    c.qz.push_back(q[i].z());
  }
  return c;
}

std::vector<Eigen::Vector3d> random_cloud(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(g(rng), g(rng), g(rng));
  return pts;
}

double residual(const Eigen::Matrix3d& r, const std::vector<Eigen::Vector3d>& p,
                const std::vector<Eigen::Vector3d>& q) {
  Eigen::Vector3d pc = Eigen::Vector3d::Zero(), qc = Eigen::Vector3d::Zero();
  for (const auto& v : p) pc += v;
  for (const auto& v : q) qc += v;
  pc /= static_cast<double>(p.size());
  qc /= static_cast<double>(q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += ((p[i] - pc) - r * (q[i] - qc)).squaredNorm();
  return acc;
}

ContactSubset subset_from(const std::vector<std::uint64_t>& ids,
                          const std::vector<WorldPoint>& pts, int frame = 0) {
  ContactSubset s;
  s.ids = ids;
  s.world = pts;
  s.frame_index = frame;
  return s;
}

ContactSubset ellipse_subset(double a, double b, double phi_deg, int n = 360,
                             double ox = 0.0, double oy = 0.0) {
  const double phi = phi_deg * M_PI / 180.0;
  std::vector<std::uint64_t> ids;
  std::vector<WorldPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    const double x = a * std::cos(t), y = b * std::sin(t);
    const double rx = std::cos(phi) * x - std::sin(phi) * y;
    const double ry = std::sin(phi) * x + std::cos(phi) * y;
    ids.push_back(static_cast<std::uint64_t>(i + 1));
    pts.push_back({rx + ox, ry + oy, 0.0});
  }
  return subset_from(ids, pts);
}

ContactFrame frame_from(const ContactSubset& s, const WorldPoint& centroid, int idx) {
  ContactFrame f;
  f.frame_index = idx;
  f.subset = s;
  f.subset.frame_index = idx;
  f.centroid = centroid;
  return f;
}

}  // namespace

TEST_CASE("match_by_id intersects sorted id sets") {
  const auto mk = [](std::initializer_list<std::uint64_t> ids) {
    std::vector<std::uint64_t> v(ids);
    std::vector<WorldPoint> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = {static_cast<double>(v[i]), 0.0, 0.0};
    return subset_from(v, w);
  };
  const auto same = match_by_id(mk({1, 2, 3, 4}), mk({1, 2, 3, 4}));
  CHECK(same.size() == 4);
  CHECK(same.px == same.qx);

  CHECK(match_by_id(mk({1, 2, 3}), mk({4, 5, 6})).size() == 0);

  const auto overlap = match_by_id(mk({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}),
                                   mk({6, 7, 8, 9, 10, 11, 12, 13, 14, 15}));
  CHECK(overlap.size() == 5);
  CHECK(overlap.ids == std::vector<std::uint64_t>{6, 7, 8, 9, 10});
}

TEST_CASE("kabsch returns identity for identical sets") {
  std::mt19937_64 rng(51);
  const auto p = random_cloud(rng, 30);
  const Eigen::Matrix3d r = kabsch_rotation(make_corr(p, p));
  CHECK((r - Eigen::Matrix3d::Identity()).norm() <= 1e-10);
}

TEST_CASE("kabsch recovers known rotations to 1e-9") {
  std::mt19937_64 rng(52);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Matrix3d r = random_rotation(rng);
    const auto p = random_cloud(rng, 25);
    std::vector<Eigen::Vector3d> q;
    for (const auto& v : p) q.push_back(r.transpose() * v);
    worst = std::max(worst, (kabsch_rotation(make_corr(p, q)) - r).norm());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("kabsch results live in SO(3)") {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_cloud(rng, 10);
    const auto q = random_cloud(rng, 10);
    const Eigen::Matrix3d r = kabsch_rotation(make_corr(p, q));
    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() <= 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kabsch noise sensitivity shrinks with the noise") {
  std::mt19937_64 rng(54);
  std::normal_distribution<double> g;
  const auto angle_err = [&](double sigma) {
    double acc = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
      const Eigen::Matrix3d r = random_rotation(rng);
      const auto p = random_cloud(rng, 50);
      std::vector<Eigen::Vector3d> q;
      for (const auto& v : p)
        q.push_back(r.transpose() * v + sigma * Eigen::Vector3d(g(rng), g(rng), g(rng)));
      const Eigen::Matrix3d est = kabsch_rotation(make_corr(p, q));
      const double c = std::clamp(((est.transpose() * r).trace() - 1.0) / 2.0, -1.0, 1.0);
      acc += std::acos(c);
    }
    return acc / trials;
  };
  const double e4 = angle_err(1e-4);
  const double e3 = angle_err(1e-3);
  const double e2 = angle_err(1e-2);
  CHECK(e4 < e3);
  CHECK(e3 < e2);
  CHECK(e4 <= 1e-3);                // converges toward zero
  CHECK(e2 / e4 > 10.0);            // roughly linear growth over two decades
  CHECK(e2 / e4 < 1000.0);
}

TEST_CASE("reflection trap still yields a proper rotation") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    std::vector<Eigen::Vector3d> p, q;
    for (int i = 0; i < 12; ++i) {
      const Eigen::Vector3d v(g(rng), g(rng), 0.2 * g(rng));
      p.push_back(v);
      q.emplace_back(v.x(), -v.y(), v.z());  // mirrored
    }
    const Eigen::Matrix3d r = kabsch_rotation(make_corr(p, q));
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("kabsch degenerate and underdetermined inputs raise") {
  std::mt19937_64 rng(56);
  std::normal_distribution<double> g;
  std::vector<Eigen::Vector3d> line, q;
  for (int i = 0; i < 10; ++i) {
    const double t = g(rng);
    line.emplace_back(t, 2.0 * t, -t);
    q.emplace_back(t + 0.1, 2.0 * t, -t);
  }
  CHECK_THROWS_AS(kabsch_rotation(make_corr(line, q)), DegenerateGeometry);

  const auto p = random_cloud(rng, 2);
  CHECK_THROWS_AS(kabsch_rotation(make_corr(p, p)), InsufficientPoints);
}

TEST_CASE("kabsch matches a brute-force rotation search") {
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> step(-1.0, 1.0);
  for (int n = 3; n <= 6; ++n) {
    const auto p = random_cloud(rng, n);
    const auto q = random_cloud(rng, n);
    const Eigen::Matrix3d solved = kabsch_rotation(make_corr(p, q));
    const double solved_res = residual(solved, p, q);

    // Oracle: 10k random rotations, then 1-degree coordinate descent from the
    // best sample.
    double best_res = std::numeric_limits<double>::infinity();
    Eigen::Matrix3d best = Eigen::Matrix3d::Identity();
    for (int t = 0; t < 10000; ++t) {
      const Eigen::Matrix3d r = random_rotation(rng);
      const double res = residual(r, p, q);
      if (res < best_res) {
        best_res = res;
        best = r;
      }
    }
    const double rad = M_PI / 180.0;
    bool improved = true;
    while (improved) {
      improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
          const Eigen::Matrix3d cand =
              Eigen::AngleAxisd(sign * rad, Eigen::Vector3d::Unit(axis)).toRotationMatrix() * best;
          const double res = residual(cand, p, q);
          if (res < best_res) {
            best_res = res;
            best = cand;
            improved = true;
          }
        }
      }
    }
    CHECK(solved_res <= best_res + 1e-9);
  }
}

TEST_CASE("pca yaw of an axis-aligned ellipse is zero") {
  const YawResult r = pca_yaw(ellipse_subset(4.0, 1.0, 0.0));
  REQUIRE(r.state.has_value());
  CHECK(std::fabs(r.state->theta) <= 0.5);
  CHECK(r.anisotropy_ratio > 2.0);
}

TEST_CASE("pca yaw is rotation-equivariant mod 180") {
  for (double phi : {10.0, 45.0, 89.0, 120.0, 179.0}) {
    const YawResult r = pca_yaw(ellipse_subset(4.0, 2.0, phi));
    REQUIRE(r.state.has_value());
    double diff = std::fmod(r.state->theta - phi, 180.0);
    if (diff > 90.0) diff -= 180.0;
    if (diff < -90.0) diff += 180.0;
    CHECK(std::fabs(diff) <= 0.5);
  }
}

TEST_CASE("pca yaw is translation-invariant") {
  const YawResult a = pca_yaw(ellipse_subset(4.0, 2.0, 33.0));
  const YawResult b = pca_yaw(ellipse_subset(4.0, 2.0, 33.0, 360, 5.5, -3.25));
  REQUIRE(a.state.has_value());
  REQUIRE(b.state.has_value());
  CHECK(std::fabs(a.state->theta - b.state->theta) <= 1e-9);
}

TEST_CASE("circular contacts are yaw-unobservable") {
  const YawResult r = pca_yaw(ellipse_subset(3.0, 3.0, 0.0));
  CHECK(!r.state.has_value());
  CHECK(r.anisotropy_ratio < 1.8);
}

TEST_CASE("yaw continuity picks the nearest mod-180 representative") {
  YawState prev;
  prev.theta = -85.0;
  prev.ax = std::cos(-85.0 * M_PI / 180.0);
  prev.ay = std::sin(-85.0 * M_PI / 180.0);
  YawState raw;
  raw.theta = 93.0;
  raw.ax = std::cos(93.0 * M_PI / 180.0);
  raw.ay = std::sin(93.0 * M_PI / 180.0);
  const YawState out = yaw_continuity(prev, raw);
  CHECK(out.theta == doctest::Approx(-87.0));
  CHECK(prev.ax * out.ax + prev.ay * out.ay >= 0.0);  // axis flipped along
}

TEST_CASE("yaw continuity flips an opposed axis without changing theta") {
  YawState prev{10.0, std::cos(0.2), std::sin(0.2), 10};
  YawState raw{12.0, -std::cos(0.21), -std::sin(0.21), 10};
  const YawState out = yaw_continuity(prev, raw);
  CHECK(out.theta == doctest::Approx(12.0));
  CHECK(out.ax == doctest::Approx(std::cos(0.21)));
}

TEST_CASE("a stepping raw sequence unwraps into a monotone track") {
  YawState state{0.0, 1.0, 0.0, 10};
  double prev_theta = 0.0;
  for (int k = 1; k <= 120; ++k) {
    const double true_theta = -1.0 * k;
    double wrapped = true_theta;
    while (wrapped <= -90.0) wrapped += 180.0;  // principal-axis ambiguity
    YawState raw;
    raw.theta = wrapped;
    raw.ax = std::cos(wrapped * M_PI / 180.0);
    raw.ay = std::sin(wrapped * M_PI / 180.0);
    state = yaw_continuity(state, raw);
    CHECK(state.theta == doctest::Approx(true_theta).epsilon(1e-12));
    CHECK(state.theta < prev_theta);
    prev_theta = state.theta;
  }
}

TEST_CASE("euler z-x-y round trips and flags the gimbal case") {
  std::mt19937_64 rng(58);
  std::uniform_real_distribution<double> ang(-179.0, 179.0), tilt(-89.0, 89.0);
  for (int t = 0; t < 200; ++t) {
    const double rx = tilt(rng), ry = ang(rng), rz = ang(rng);
    const Eigen::Matrix3d m = matrix_from_euler_zxy(rx, ry, rz);
    const auto e = euler_zxy_from_matrix(m);
    REQUIRE(e.has_value());
    const Eigen::Matrix3d back = matrix_from_euler_zxy(e->rx, e->ry, e->rz);
    CHECK((back - m).norm() <= 1e-11);
  }
  CHECK(!euler_zxy_from_matrix(matrix_from_euler_zxy(90.0, 0.0, 0.0)).has_value());
}

TEST_CASE("normalize_angle_deg maps into (-180, 180]") {
  CHECK(normalize_angle_deg(190.0) == doctest::Approx(-170.0));
  CHECK(normalize_angle_deg(-190.0) == doctest::Approx(170.0));
  CHECK(normalize_angle_deg(180.0) == doctest::Approx(180.0));
  CHECK(normalize_angle_deg(540.0) == doctest::Approx(180.0));
}

TEST_CASE("tracker reports zero increments on identical frames") {
  PoseTracker tracker;
  const ContactSubset s = ellipse_subset(4.0e-3, 2.0e-3, 20.0);
  const WorldPoint c{1.0e-3, -2.0e-3, 0.5e-3};
  for (int k = 0; k < 5; ++k) {
    const TrackRow row = tracker.step(frame_from(s, c, k));
    CHECK(row.tracked);
    CHECK(row.pose.tx == 0.0);
    CHECK(row.pose.ty == 0.0);
    CHECK(row.pose.tz == 0.0);
    CHECK(row.pose.rz == 0.0);
    CHECK(std::fabs(row.pose.rx) <= 1e-12);
    CHECK(std::fabs(row.pose.ry) <= 1e-12);
  }
}

TEST_CASE("tracker yaw and translation return bitwise to zero on palindromes") {
  // Build an out-and-back sequence of frames; first and last are identical
  // objects, so anchored yaw/translation must return to exactly zero.
  std::vector<ContactFrame> seq;
  const int half = 30;
  for (int k = 0; k <= half; ++k) {
    const double phi = -1.5 * k;
    const double off = 0.1e-3 * k;
    seq.push_back(frame_from(ellipse_subset(4.0e-3, 2.0e-3, phi, 180, off, 0.0),
                             {off, 0.0, 0.0}, k));
  }
  for (int k = half - 1; k >= 0; --k) {
    ContactFrame f = seq[static_cast<std::size_t>(k)];
    seq.push_back(f);
  }
  PoseTracker tracker;
  TrackRow last;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    ContactFrame f = seq[k];
    f.frame_index = static_cast<int>(k);
    last = tracker.step(f);
    CHECK(last.tracked);
  }
  CHECK(last.pose.rz == 0.0);  // bitwise
  CHECK(last.pose.tx == 0.0);
  CHECK(last.pose.ty == 0.0);
  CHECK(last.pose.tz == 0.0);
  CHECK(std::fabs(last.pose.rx) <= 0.1);
  CHECK(std::fabs(last.pose.ry) <= 0.1);
}

TEST_CASE("tracker coasts over dropouts and resumes") {
  PoseTracker tracker;
  const ContactSubset s = ellipse_subset(4.0e-3, 2.0e-3, 0.0);
  const WorldPoint c{0.0, 0.0, 0.0};
  tracker.step(frame_from(s, c, 0));
  const TrackRow moving =
      tracker.step(frame_from(ellipse_subset(4.0e-3, 2.0e-3, 0.0, 360, 1e-3, 0.0),
                              {1e-3, 0.0, 0.0}, 1));
  CHECK(moving.pose.tx == doctest::Approx(1.0));

  ContactFrame empty;
  empty.frame_index = 2;
  const TrackRow coast = tracker.step(empty);
  CHECK(!coast.tracked);
  CHECK(coast.pose.tx == doctest::Approx(1.0));  // held

  const TrackRow resume =
      tracker.step(frame_from(ellipse_subset(4.0e-3, 2.0e-3, 0.0, 360, 2e-3, 0.0),
                              {2e-3, 0.0, 0.0}, 3));
  CHECK(resume.tracked);
  CHECK(resume.pose.tx == doctest::Approx(1.0));  // re-anchored, not jumped

  const TrackRow after =
      tracker.step(frame_from(ellipse_subset(4.0e-3, 2.0e-3, 0.0, 360, 2.5e-3, 0.0),
                              {2.5e-3, 0.0, 0.0}, 4));
  CHECK(after.pose.tx == doctest::Approx(1.5));
}

TEST_CASE("tracker holds yaw while it is unobservable") {
  PoseTracker tracker;
  tracker.step(frame_from(ellipse_subset(4.0e-3, 2.0e-3, -10.0), {0, 0, 0}, 0));
  tracker.step(frame_from(ellipse_subset(4.0e-3, 2.0e-3, -20.0), {0, 0, 0}, 1));
  const double held = tracker.pose().rz;
  CHECK(held == doctest::Approx(-10.0).epsilon(0.05));

  const TrackRow circ = tracker.step(frame_from(ellipse_subset(3.0e-3, 3.0e-3, 0.0), {0, 0, 0}, 2));
  CHECK(circ.tracked);
  CHECK(circ.pose.rz == held);
  CHECK(circ.aniso_ratio < 1.8);
}

TEST_CASE("insufficient id overlap coasts the frame") {
  PoseTracker tracker;
  std::vector<std::uint64_t> ids_a{1, 2, 3, 4, 5, 6};
  std::vector<WorldPoint> pts{{0, 0, 0},       {1e-3, 0, 0},    {0, 1e-3, 0},
                              {1e-3, 1e-3, 0}, {2e-3, 1e-3, 0}, {2e-3, 0, 0}};
  tracker.step(frame_from(subset_from(ids_a, pts), {0, 0, 0}, 0));
  std::vector<std::uint64_t> ids_b{101, 102, 103, 104, 105, 106};
  const TrackRow row = tracker.step(frame_from(subset_from(ids_b, pts), {1e-3, 0, 0}, 1));
  CHECK(!row.tracked);
  CHECK(row.pose.tx == 0.0);
}
