#include <doctest.h>

#include <cmath>

#include "ic/metrics.hpp"

using namespace ic;

namespace {

std::vector<TrackRow> constant_track(const Pose& p, int n, bool tracked = true) {
  std::vector<TrackRow> rows;
  for (int k = 0; k < n; ++k) {
    TrackRow r;
    r.frame = k;
    r.t_ms = 40.0 * k;
    r.pose = p;
    r.tracked = tracked;
    rows.push_back(r);
  }
  return rows;
}

ContactMask disk_mask(int w, int h, double cx, double cy, double r) {
  ContactMask m = make_mask(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r * r) m.at(x, y) = 1;
    }
  return m;
}

}  // namespace

TEST_CASE("perfect tracks drift by zero") {
  const Pose gt{1.0, -2.0, 0.5, 3.0, -1.0, 10.0};
  const DriftReport r = static_drift(constant_track(gt, 100), gt);
  for (double v : r.mae) CHECK(v == 0.0);
  for (double v : r.final_drift) CHECK(v == 0.0);
  CHECK(r.frames_used == 100);
}

TEST_CASE("a constant offset appears in exactly one drift entry") {
  const Pose gt{};
  Pose off = gt;
  off.tx = 0.1;
  const DriftReport r = static_drift(constant_track(off, 50), gt);
  CHECK(r.mae[0] == doctest::Approx(0.1));
  for (int i = 1; i < 6; ++i) CHECK(r.mae[i] == 0.0);
}

TEST_CASE("untracked frames are excluded from drift") {
  auto rows = constant_track(Pose{}, 20);
  for (int k = 10; k < 20; ++k) {
    rows[static_cast<std::size_t>(k)].tracked = false;
    rows[static_cast<std::size_t>(k)].pose.tx = 99.0;  // must be ignored
  }
  const DriftReport r = static_drift(rows, Pose{});
  CHECK(r.frames_used == 10);
  CHECK(r.mae[0] == 0.0);
}

TEST_CASE("drift averaging weights sequences equally") {
  DriftReport a;
  a.mae = {1, 0, 0, 0, 0, 0};
  a.frames_used = 10;
  DriftReport b;
  b.mae = {3, 0, 0, 0, 0, 0};
  b.frames_used = 10;
  const DriftReport avg = average_drift({a, b});
  CHECK(avg.mae[0] == doctest::Approx(2.0));
  CHECK(avg.sequences == 2);
}

TEST_CASE("repeatability is the magnitude of the final pose") {
  auto rows = constant_track(Pose{}, 10);
  rows.back().pose = {0.2, -0.3, 0.1, 1.0, -2.0, 5.0};
  const RepeatabilityReport r = repeatability_error(rows);
  CHECK(r.abs_error[0] == doctest::Approx(0.2));
  CHECK(r.abs_error[1] == doctest::Approx(0.3));
  CHECK(r.abs_error[5] == doctest::Approx(5.0));

  const RepeatabilityReport avg = average_repeatability({r, RepeatabilityReport{}});
  CHECK(avg.trials == 2);
  CHECK(avg.abs_error[0] == doctest::Approx(0.1));
}

TEST_CASE("contour similarity is IoU of the largest components") {
  const ContactMask a = disk_mask(128, 96, 48, 48, 20);
  CHECK(contour_similarity(a, a) == doctest::Approx(1.0));

  const ContactMask b = disk_mask(128, 96, 100, 48, 10);
  CHECK(contour_similarity(a, b) == doctest::Approx(0.0));

  CHECK(contour_similarity(a, make_mask(128, 96, 0)) == 0.0);

  // Disks of equal radius separated by exactly one radius. Oracle: the
  // lens-overlap area 2 r^2 cos^-1(1/2) - (r/2) sqrt(3) r over the union.
  const double r = 40.0;
  const ContactMask c = disk_mask(256, 160, 80, 80, r);
  const ContactMask d = disk_mask(256, 160, 80 + r, 80, r);
  const double lens = 2.0 * std::acos(0.5) - 0.5 * std::sqrt(4.0 - 1.0);  // units of r^2
  const double iou_expected = lens / (2.0 * M_PI - lens);
  CHECK(iou_expected == doctest::Approx(0.243).epsilon(0.01));
  CHECK(contour_similarity(c, d) == doctest::Approx(iou_expected).epsilon(0.12));
  CHECK(std::fabs(contour_similarity(c, d) - iou_expected) <= 0.03);
  CHECK(contour_similarity(c, d) == contour_similarity(d, c));
}

TEST_CASE("tracking accuracy reports per-frame errors and summaries") {
  std::vector<TrackRow> gt, est;
  for (int k = 0; k < 50; ++k) {
    TrackRow g;
    g.frame = k;
    g.pose.rz = -1.0 * k;
    g.tracked = true;
    gt.push_back(g);
    TrackRow e = g;
    e.pose.rz = -1.0 * k + 1.0;  // constant one-degree lag
    est.push_back(e);
  }
  const AccuracyReport r = tracking_accuracy(est, gt);
  CHECK(r.errors.size() == 50);
  CHECK(r.rms[5] == doctest::Approx(1.0));
  CHECK(r.max_abs[5] == doctest::Approx(1.0));
  for (int i = 0; i < 5; ++i) CHECK(r.rms[i] == 0.0);

  auto bad = gt;
  bad.pop_back();
  CHECK_THROWS_AS(tracking_accuracy(est, bad), std::invalid_argument);
}

TEST_CASE("perfect tracks have zero accuracy error") {
  std::vector<TrackRow> gt;
  for (int k = 0; k < 10; ++k) {
    TrackRow g;
    g.frame = k;
    g.pose.tx = 0.5 * k;
    g.tracked = true;
    gt.push_back(g);
  }
  const AccuracyReport r = tracking_accuracy(gt, gt);
  for (int i = 0; i < 6; ++i) {
    CHECK(r.rms[i] == 0.0);
    CHECK(r.max_abs[i] == 0.0);
  }
}

TEST_CASE("geodesic rotation distance is zero on equal poses and positive otherwise") {
  const Pose a{0, 0, 0, 10, 20, 30};
  CHECK(geodesic_rotation_deg(a, a) == doctest::Approx(0.0).epsilon(1e-9));
  Pose b = a;
  b.rz += 5.0;
  CHECK(geodesic_rotation_deg(a, b) > 1.0);
}
