// invariantcloud: simulate synthetic tactile scenes, initialize the invariant
// reference cloud, run the pose trackers, evaluate metrics, and fuse
// multi-contact maps.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 algorithmic failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>

#include "ic/config.hpp"
#include "ic/contact.hpp"
#include "ic/errors.hpp"
#include "ic/image_io.hpp"
#include "ic/kernels/kernels.hpp"
#include "ic/metrics.hpp"
#include "ic/morphology.hpp"
#include "ic/poisson.hpp"
#include "ic/pose.hpp"
#include "ic/reference_cloud.hpp"
#include "ic/registration.hpp"
#include "ic/simulator.hpp"
#include "ic/svg.hpp"
#include "ic/track_io.hpp"

namespace fs = std::filesystem;
using namespace ic;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitAlgo = 4;

std::string frame_name(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", k);
  return buf;
}

std::uint64_t seed_override(std::uint64_t seed) {
  if (const char* env = std::getenv("IC_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw DataError(std::string("IC_SEED is not an unsigned integer: ") + env);
    }
  }
  return seed;
}

std::vector<fs::path> sorted_frame_files(const fs::path& frames_dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(frames_dir)) throw DataError("not a directory: " + frames_dir.string());
  for (const auto& e : fs::directory_iterator(frames_dir)) {
    if (e.path().extension() == ".ichm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::from_file(path);
  cfg.seed = seed_override(cfg.seed);
  return cfg;
}

void echo_config(const RunConfig& cfg, const fs::path& out_dir) {
  std::ofstream os(out_dir / "config.txt");
  os << cfg.echo();
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
  Scenario sc = Scenario::from_file(scenario_path);
  sc.seed = seed_override(sc.seed);

  fs::create_directories(fs::path(out_dir) / "frames");
  {
    std::ifstream in(scenario_path);
    std::ofstream echo(fs::path(out_dir) / "scenario.txt");
    echo << in.rdbuf();
    echo << "\n# effective seed = " << sc.seed << "\n";
  }

  save_height_map(render_reference(sc.sensor), (fs::path(out_dir) / "reference.ichm").string());
  save_mask_png(render_marker_mask(sc.sensor), (fs::path(out_dir) / "markers.png").string());

  const SequenceRenderer renderer(sc.object, sc.trajectory, sc.sensor, sc.noise, sc.seed, sc.slip);
  std::vector<TrackRow> gt;
  const Pose origin = sc.trajectory.schedule.front();
  for (std::size_t k = 0; k < renderer.frame_count(); ++k) {
    const FrameBundle fb = renderer.frame(k);
    const fs::path base = fs::path(out_dir) / "frames" / frame_name(k);
    save_height_map(fb.height, base.string() + ".ichm");
    save_mask_png(fb.mask_gt, base.string() + ".mask.png");

    TrackRow row;
    row.frame = static_cast<int>(k);
    row.t_ms = static_cast<double>(k) * 1000.0 / sc.sensor.fps;
    row.pose = {fb.pose_gt.tx - origin.tx, fb.pose_gt.ty - origin.ty, fb.pose_gt.tz - origin.tz,
                fb.pose_gt.rx - origin.rx, fb.pose_gt.ry - origin.ry, fb.pose_gt.rz - origin.rz};
    row.tracked = true;
    gt.push_back(row);
  }
  write_track_csv((fs::path(out_dir) / "gt_track.csv").string(), gt);
  std::cout << "simulated " << renderer.frame_count() << " frames -> " << out_dir << "\n";
  return kExitOk;
}

int cmd_init_cloud(const std::string& frames_dir, const std::string& out_file,
                   const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const HeightMap reference = load_height_map((fs::path(frames_dir) / "reference.ichm").string());
  const ContactMask markers = load_mask_png((fs::path(frames_dir) / "markers.png").string());
  try {
    const MarkerGrid grid = detect_markers(reference, markers, cfg.marker_rows, cfg.marker_cols);
    const ReferenceCloud cloud =
        interpolate_grid(grid, reference, cfg.grid_rows - 1, cfg.grid_cols - 1);
    save_reference_cloud(cloud, out_file);
    std::cout << "reference cloud: " << cloud.size() << " points (" << cloud.grid_rows << "x"
              << cloud.grid_cols << " grid) -> " << out_file << "\n";
    return kExitOk;
  } catch (const DetectionFailure& e) {
    std::cerr << "marker detection failed: found " << e.found() << " of " << e.expected()
              << " expected blobs\n";
    return kExitAlgo;
  } catch (const GridLayoutError& e) {
    std::cerr << "marker layout error: " << e.what() << "\n";
    return kExitAlgo;
  }
}

int cmd_track(const std::string& frames_dir, const std::string& cloud_file,
              const std::string& out_csv, const std::string& method,
              const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const ReferenceCloud cloud = load_reference_cloud(cloud_file);
  const HeightMap reference = load_height_map((fs::path(frames_dir) / "reference.ichm").string());
  const auto files = sorted_frame_files(fs::path(frames_dir) / "frames");
  if (files.empty()) {
    std::cerr << "no frames in " << frames_dir << "/frames\n";
    return kExitData;
  }

  PoseTracker invariant(cfg.tracker);
  BaselineConfig bcfg = cfg.baseline;
  bcfg.fps = cfg.tracker.fps;
  BaselineNnIcpTracker baseline(bcfg);
  const bool use_baseline = method == "baseline";

  std::vector<TrackRow> rows;
  rows.reserve(files.size());
  std::size_t tracked = 0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    HeightMap hm = load_height_map(files[k].string());
    ContactMask aux;
    const ContactMask* aux_ptr = nullptr;
    if (cfg.use_aux_mask) {
      fs::path mask_path = files[k];
      mask_path.replace_extension("");  // strip .ichm
      mask_path += ".mask.png";
      if (fs::exists(mask_path)) {
        aux = load_mask_png(mask_path.string());
        aux_ptr = &aux;
      }
    }
    const ContactFrame frame = make_contact_frame(cloud, std::move(hm), reference, cfg.contact,
                                                  static_cast<int>(k), aux_ptr);
    const TrackRow row = use_baseline ? baseline.step(frame) : invariant.step(frame);
    tracked += row.tracked ? 1 : 0;
    rows.push_back(row);
  }
  write_track_csv(out_csv, rows);
  if (!out_csv.empty()) {
    const fs::path parent = fs::path(out_csv).parent_path();
    if (!parent.empty()) echo_config(cfg, parent);
  }
  const double frac = static_cast<double>(tracked) / static_cast<double>(rows.size());
  std::cout << method << " tracked " << tracked << "/" << rows.size() << " frames -> " << out_csv
            << "\n";
  return frac >= 0.95 ? kExitOk : kExitAlgo;
}

struct NamedTrack {
  std::string name;
  std::string track_path;
  std::string frames_dir;  // repeat experiment: for the contour gate
};

std::vector<NamedTrack> parse_named_tracks(const std::vector<std::string>& specs) {
  std::vector<NamedTrack> out;
  for (const auto& s : specs) {
    NamedTrack t;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      t.name = fs::path(s).stem().string();
      t.track_path = s;
    } else {
      t.name = s.substr(0, eq);
      t.track_path = s.substr(eq + 1);
    }
    const auto colon = t.track_path.find(':');
    if (colon != std::string::npos) {
      t.frames_dir = t.track_path.substr(colon + 1);
      t.track_path = t.track_path.substr(0, colon);
    }
    out.push_back(t);
  }
  return out;
}

double return_gate_iou(const std::string& frames_dir) {
  const auto files = sorted_frame_files(fs::path(frames_dir) / "frames");
  if (files.size() < 2) throw DataError("repeat gate needs at least 2 frames: " + frames_dir);
  const auto mask_of = [](fs::path p) {
    p.replace_extension("");
    p += ".mask.png";
    return load_mask_png(p.string());
  };
  return contour_similarity(mask_of(files.front()), mask_of(files.back()));
}

int cmd_evaluate(const std::string& experiment, const std::vector<std::string>& track_specs,
                 const std::string& gt_path, const std::string& out_dir, bool emit_plots,
                 const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  fs::create_directories(out_dir);
  const auto tracks = parse_named_tracks(track_specs);
  if (tracks.empty()) {
    std::cerr << "no tracks given\n";
    return kExitUsage;
  }

  if (experiment == "drift") {
    const auto gt = read_track_csv(gt_path);
    if (gt.empty()) throw DataError("empty ground truth");
    std::vector<std::pair<std::string, DriftReport>> rows;
    for (const auto& t : tracks) {
      rows.emplace_back(t.name, static_drift(read_track_csv(t.track_path), gt.front().pose));
    }
    write_drift_csv((fs::path(out_dir) / "drift.csv").string(), rows);
    write_drift_markdown((fs::path(out_dir) / "drift.md").string(), rows);
    if (emit_plots) {
      std::vector<std::string> groups = {"tx", "ty", "tz", "rx", "ry", "rz"};
      std::vector<PlotSeries> series;
      for (const auto& [name, r] : rows) {
        series.push_back({name, {r.mae.begin(), r.mae.end()}});
      }
      write_bar_chart_svg((fs::path(out_dir) / "drift.svg").string(),
                          "Static cumulative drift (MAE)", groups, series);
    }
    return kExitOk;
  }

  if (experiment == "repeat") {
    // Group trials by method name; gate each trial on return-contour IoU.
    std::map<std::string, std::vector<RepeatabilityReport>> grouped;
    std::vector<std::string> order;
    for (const auto& t : tracks) {
      if (t.frames_dir.empty())
        throw DataError("repeat experiment needs name=track.csv:frames_dir specs");
      const double iou = return_gate_iou(t.frames_dir);
      if (iou < cfg.return_gate_iou) {
        std::cout << "trial " << t.track_path << " discarded: return contour IoU " << iou << " < "
                  << cfg.return_gate_iou << "\n";
        continue;
      }
      if (!grouped.count(t.name)) order.push_back(t.name);
      grouped[t.name].push_back(repeatability_error(read_track_csv(t.track_path)));
    }
    if (grouped.empty()) {
      std::cerr << "all trials failed the return gate\n";
      return kExitAlgo;
    }
    std::vector<std::pair<std::string, RepeatabilityReport>> rows;
    for (const auto& name : order) rows.emplace_back(name, average_repeatability(grouped[name]));
    write_repeat_csv((fs::path(out_dir) / "repeat.csv").string(), rows);
    write_repeat_markdown((fs::path(out_dir) / "repeat.md").string(), rows);
    if (emit_plots) {
      std::vector<std::string> groups = {"tx", "ty", "tz", "rx", "ry", "rz"};
      std::vector<PlotSeries> series;
      for (const auto& [name, r] : rows)
        series.push_back({name, {r.abs_error.begin(), r.abs_error.end()}});
      write_bar_chart_svg((fs::path(out_dir) / "repeat.svg").string(),
                          "Repeatability (return) error", groups, series);
    }
    return kExitOk;
  }

  if (experiment == "accuracy") {
    const auto gt = read_track_csv(gt_path);
    std::vector<std::pair<std::string, AccuracyReport>> rows;
    for (const auto& t : tracks) {
      rows.emplace_back(t.name, tracking_accuracy(read_track_csv(t.track_path), gt));
      write_accuracy_csv((fs::path(out_dir) / (t.name + "_accuracy.csv")).string(),
                         rows.back().second);
    }
    write_accuracy_markdown((fs::path(out_dir) / "accuracy.md").string(), rows);
    if (emit_plots) {
      std::vector<PlotSeries> series;
      for (const auto& [name, r] : rows) {
        PlotSeries s{name + " rz err", {}};
        for (const auto& e : r.errors) s.y.push_back(e[5]);
        series.push_back(std::move(s));
      }
      write_line_chart_svg((fs::path(out_dir) / "accuracy_rz.svg").string(),
                           "Z-rotation tracking error vs frame", "deg", series);
    }
    return kExitOk;
  }

  std::cerr << "unknown experiment: " << experiment << "\n";
  return kExitUsage;
}

int cmd_slam(const std::string& frames_dir, const std::string& cloud_file,
             const std::string& out_dir, const std::string& template_name,
             const std::string& template_pose, const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const ReferenceCloud cloud = load_reference_cloud(cloud_file);
  const HeightMap reference = load_height_map((fs::path(frames_dir) / "reference.ichm").string());
  const auto files = sorted_frame_files(fs::path(frames_dir) / "frames");
  if (files.size() < 2) {
    std::cerr << "slam needs at least 2 contact frames\n";
    return kExitData;
  }
  fs::create_directories(out_dir);
  echo_config(cfg, out_dir);

  FusedMap map;
  std::ofstream journal(fs::path(out_dir) / "journal.csv");
  journal.precision(10);
  journal << "patch_idx,accepted,yaw_deg,tx,ty,tz,overlap,rmse\n";
  int accepted = 0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    HeightMap hm = load_height_map(files[k].string());
    const ContactFrame frame =
        make_contact_frame(cloud, std::move(hm), reference, cfg.contact, static_cast<int>(k));
    if (!frame.has_contact() || frame.subset.size() < 3) {
      journal << k << ",0,0,0,0,0,0,inf\n";
      continue;
    }
    const PatchCloud patch = make_patch(frame.subset, cfg.tracker.anisotropy_threshold);
    if (map.empty()) {
      map.seed(patch);
      ++accepted;
      journal << k << ",1,0,0,0,0,1,0\n";
      continue;
    }
    const Eigen::Vector3d before = patch.centroid;
    const RegistrationResult r = map.accumulate(patch, cfg.registration);
    const Eigen::Vector3d shift = (r.transform.apply(before) - before) * 1e3;
    double yaw = 0.0;
    if (const auto e = euler_zxy_from_matrix(r.transform.rotation)) yaw = e->rz;
    journal << k << "," << (r.accepted ? 1 : 0) << "," << yaw << "," << shift.x() << ","
            << shift.y() << "," << shift.z() << "," << r.overlap_ratio << "," << r.rmse_mm << "\n";
    if (r.accepted) ++accepted;
  }

  std::ofstream mapfile(fs::path(out_dir) / "map.txt");
  mapfile.precision(17);
  mapfile << "# id x y z n_obs (meters, map frame)\n";
  for (const auto& e : map.entries()) {
    mapfile << e.id << " " << e.position.x() << " " << e.position.y() << " " << e.position.z()
            << " " << e.n_obs << "\n";
  }

  if (!template_name.empty()) {
    if (template_name != "scissors") {
      std::cerr << "unknown template: " << template_name << "\n";
      return kExitUsage;
    }
    Pose placement;
    if (!template_pose.empty()) {
      std::istringstream ss(template_pose);
      if (!(ss >> placement.tx >> placement.ty >> placement.tz >> placement.rx >>
            placement.ry >> placement.rz))
        throw DataError("--template-pose expects six numbers");
    }
    const double pitch_mm =
        (cloud.frame_width / cloud.ppmm) / static_cast<double>(cloud.grid_cols - 1);
    const double h = hausdorff_to_template_mm(map, scissors_template().polygon_mm, placement,
                                              pitch_mm, 2.0 * pitch_mm);
    std::ofstream rep(fs::path(out_dir) / "hausdorff.txt");
    rep.precision(10);
    rep << "hausdorff_mm = " << h << "\n";
    std::cout << "hausdorff vs template: " << h << " mm\n";
  }

  std::cout << "accepted " << accepted << "/" << files.size() << " patches, map " << map.size()
            << " points -> " << out_dir << "\n";
  return accepted >= 2 ? kExitOk : kExitAlgo;
}

int cmd_selftest() {
  int failures = 0;
  const auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.0, 319.0), uy(0.0, 239.0);
    const HeightMap hm = make_height_map(320, 240, 10.0);
    const ImageGeometry g = geometry_of(hm);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const PixelCoord p{ux(rng), uy(rng)};
      const PixelCoord q = world_to_pixel(pixel_to_world(hm, p), g);
      worst = std::max({worst, std::fabs(q.x - p.x), std::fabs(q.y - p.y)});
    }
    check("pixel/world round trip <= 1e-12", worst <= 1e-12);
  }
  {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
      q.normalize();
      const Eigen::Matrix3d r = q.toRotationMatrix();
      Correspondences c;
      for (int i = 0; i < 20; ++i) {
        const Eigen::Vector3d p(gauss(rng), gauss(rng), gauss(rng));
        const Eigen::Vector3d qq = r.transpose() * p;
        c.ids.push_back(static_cast<std::uint64_t>(i + 1));
        c.px.push_back(p.x());
        c.py.push_back(p.y());
        c.pz.push_back(p.z());
        c.qx.push_back(qq.x());
        c.qy.push_back(qq.y());
        c.qz.push_back(qq.z());
      }
      worst = std::max(worst, (kabsch_rotation(c) - r).norm());
    }
    check("kabsch recovers random rotations <= 1e-9", worst <= 1e-9);
  }
  {
    const int w = 64, h = 64;
    HeightMap surf = make_height_map(w, h, 10.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        surf.at(x, y) = std::cos(M_PI * 3 * (x + 0.5) / w) * std::cos(M_PI * 2 * (y + 0.5) / h);
    const HeightMap rec = integrate_gradients_dct(gradient_of(surf));
    double mean = 0.0;
    for (double v : surf.data) mean += v;
    mean /= surf.data.size();
    double rms = 0.0;
    for (std::size_t i = 0; i < rec.data.size(); ++i) {
      const double d = rec.data[i] - (surf.data[i] - mean);
      rms += d * d;
    }
    rms = std::sqrt(rms / rec.data.size());
    check("dct-poisson reconstructs cosine surface <= 1e-6 rms", rms <= 1e-6);
  }
  {
    ContactMask m = make_mask(64, 64, 0);
    for (int y = 10; y < 40; ++y)
      for (int x = 20; x < 50; ++x)
        if ((x + y) % 7) m.at(x, y) = 1;
    const ContactMask once = close_ellipse(m, 7, 2);
    const ContactMask twice = close_ellipse(once, 7, 2);
    check("morphological closing idempotent", once.bits == twice.bits);
  }
  if (kernels::avx2_supported()) {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;
    std::vector<double> a(1000), b(1000);
    for (auto& v : a) v = gauss(rng);
    for (auto& v : b) v = gauss(rng);
    std::vector<std::uint8_t> m1(1000), m2(1000);
    kernels::scalar().depression_mask(a.data(), b.data(), 0.1, m1.data(), a.size());
    kernels::avx2().depression_mask(a.data(), b.data(), 0.1, m2.data(), a.size());
    check("scalar/avx2 kernel equivalence", m1 == m2);
  } else {
    std::cout << "[SKIP] scalar/avx2 kernel equivalence (avx2 unavailable)\n";
  }
  std::cout << "kernels: " << kernels::active().name << "\n";
  return failures == 0 ? kExitOk : kExitAlgo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"InvariantCloud tactile 6-DoF pose tracking pipeline"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, frames_dir, cloud_file, config_path, method = "invariant";
  std::string experiment, gt_path, template_name, template_pose;
  std::vector<std::string> track_specs;
  bool emit_plots = false;

  auto* sim = app.add_subcommand("simulate", "materialize a scenario into a frame directory");
  sim->add_option("--scenario", scenario_path, "scenario file")->required();
  sim->add_option("--out", out_path, "output directory")->required();

  auto* init = app.add_subcommand("init-cloud", "build the reference cloud from a no-contact frame");
  init->add_option("--frames", frames_dir, "simulated frame directory")->required();
  init->add_option("--out", out_path, "output cloud file")->required();
  init->add_option("--config", config_path, "run config file");

  auto* track = app.add_subcommand("track", "run a tracker over a frame directory");
  track->add_option("--frames", frames_dir, "frame directory")->required();
  track->add_option("--cloud", cloud_file, "reference cloud file")->required();
  track->add_option("--out", out_path, "output track CSV")->required();
  track->add_option("--method", method, "invariant|baseline")
      ->check(CLI::IsMember({"invariant", "baseline"}));
  track->add_option("--config", config_path, "run config file");

  auto* eval = app.add_subcommand("evaluate", "compute drift/repeat/accuracy reports");
  eval->add_option("--experiment", experiment, "drift|repeat|accuracy")->required();
  eval->add_option("--track", track_specs,
                   "name=track.csv (repeat experiment: name=track.csv:frames_dir), repeatable")
      ->required();
  eval->add_option("--gt", gt_path, "ground-truth track CSV");
  eval->add_option("--out", out_path, "output directory")->required();
  eval->add_flag("--emit-plots", emit_plots, "write SVG charts");
  eval->add_option("--config", config_path, "run config file");

  auto* slam = app.add_subcommand("slam", "fuse multi-contact patches into a map");
  slam->add_option("--frames", frames_dir, "frame directory (one patch per frame)")->required();
  slam->add_option("--cloud", cloud_file, "reference cloud file")->required();
  slam->add_option("--out", out_path, "output directory")->required();
  slam->add_option("--template", template_name, "outline template for the Hausdorff report");
  slam->add_option("--template-pose", template_pose, "template placement: tx ty tz rx ry rz");
  slam->add_option("--config", config_path, "run config file");

  app.add_subcommand("selftest", "run built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(scenario_path, out_path);
    if (init->parsed()) return cmd_init_cloud(frames_dir, out_path, config_path);
    if (track->parsed()) return cmd_track(frames_dir, cloud_file, out_path, method, config_path);
    if (eval->parsed())
      return cmd_evaluate(experiment, track_specs, gt_path, out_path, emit_plots, config_path);
    if (slam->parsed())
      return cmd_slam(frames_dir, cloud_file, out_path, template_name, template_pose, config_path);
    return cmd_selftest();
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAlgo;
  }
}
