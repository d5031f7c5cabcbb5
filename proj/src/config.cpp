#include "ic/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ic/errors.hpp"

namespace ic {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvFile KvFile::parse_string(const std::string& text, const std::string& origin) {
  KvFile kv;
  kv.origin_ = origin;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw DataError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!kv.entries_.emplace(full, value).second)
      throw DataError(origin + ":" + std::to_string(lineno) + ": duplicate key " + full);
  }
  return kv;
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

bool KvFile::has(const std::string& section, const std::string& key) const {
  return entries_.count(section + "." + key) > 0;
}

std::string KvFile::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  const auto it = entries_.find(section + "." + key);
  return it == entries_.end() ? fallback : it->second;
}

double KvFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto it = entries_.find(section + "." + key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw DataError(origin_ + ": " + section + "." + key + " is not a number: " + it->second);
  }
}

int KvFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  const auto it = entries_.find(section + "." + key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw DataError(origin_ + ": " + section + "." + key + " is not an integer: " + it->second);
  }
}

bool KvFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto it = entries_.find(section + "." + key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw DataError(origin_ + ": " + section + "." + key + " is not a boolean: " + it->second);
}

std::uint64_t KvFile::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
  const auto it = entries_.find(section + "." + key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw DataError(origin_ + ": " + section + "." + key + " is not an unsigned integer: " + it->second);
  }
}

void KvFile::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : entries_) {
    bool ok = std::find(allowed.begin(), allowed.end(), key) != allowed.end();
    if (!ok) {
      // Numbered keys (multi-contact placements) are allowed via prefix match.
      for (const auto& a : allowed) {
        if (a.back() == '*' && key.rfind(a.substr(0, a.size() - 1), 0) == 0) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) throw DataError(origin_ + ": unknown key " + key);
  }
}

RunConfig RunConfig::from_file(const std::string& path) { return from_kv(KvFile::parse_file(path)); }

RunConfig RunConfig::from_kv(const KvFile& kv) {
  kv.require_known({
      "contact.depth_threshold_mm", "contact.kernel_px", "contact.kernel_iters",
      "contact.close_kernel_px", "contact.close_iters", "contact.border_margin_px",
      "contact.use_area_moment", "contact.use_aux_mask",
      "pose.anisotropy_threshold", "pose.fps",
      "cloud.grid_rows", "cloud.grid_cols", "cloud.marker_rows", "cloud.marker_cols",
      "registration.overlap_gate", "registration.rmse_gate_mm", "registration.nn_gate_mm",
      "registration.search_gate_mm", "registration.max_iters", "registration.tol_mm",
      "registration.trim", "registration.dedup_average",
      "baseline.nn_gate_mm", "baseline.search_gate_mm", "baseline.trim",
      "baseline.feature_jitter_mm",
      "metrics.return_gate_iou",
      "seed.value",
  });
  RunConfig c;
  c.contact.depth_threshold_m = kv.get_double("contact", "depth_threshold_mm", 0.2) * 1e-3;
  c.contact.kernel_px = kv.get_int("contact", "kernel_px", 5);
  c.contact.kernel_iters = kv.get_int("contact", "kernel_iters", 1);
  c.contact.close_kernel_px = kv.get_int("contact", "close_kernel_px", 7);
  c.contact.close_iters = kv.get_int("contact", "close_iters", 2);
  c.contact.border_margin_px = kv.get_int("contact", "border_margin_px", 2);
  c.contact.use_area_moment = kv.get_bool("contact", "use_area_moment", false);
  c.use_aux_mask = kv.get_bool("contact", "use_aux_mask", false);
  c.tracker.anisotropy_threshold = kv.get_double("pose", "anisotropy_threshold", 1.8);
  c.tracker.fps = kv.get_double("pose", "fps", 25.0);
  c.grid_rows = kv.get_int("cloud", "grid_rows", 19);
  c.grid_cols = kv.get_int("cloud", "grid_cols", 25);
  c.marker_rows = kv.get_int("cloud", "marker_rows", 7);
  c.marker_cols = kv.get_int("cloud", "marker_cols", 9);
  c.registration.overlap_gate = kv.get_double("registration", "overlap_gate", 0.35);
  c.registration.rmse_gate_mm = kv.get_double("registration", "rmse_gate_mm", 0.5);
  c.registration.nn_gate_mm = kv.get_double("registration", "nn_gate_mm", 1.0);
  c.registration.search_gate_mm = kv.get_double("registration", "search_gate_mm", 3.0);
  c.registration.max_iters = kv.get_int("registration", "max_iters", 50);
  c.registration.tol_mm = kv.get_double("registration", "tol_mm", 1e-6);
  c.registration.trim = kv.get_bool("registration", "trim", true);
  c.registration.dedup_average = kv.get_bool("registration", "dedup_average", false);
  c.baseline.icp = c.registration;
  c.baseline.icp.nn_gate_mm = kv.get_double("baseline", "nn_gate_mm", 3.0);
  c.baseline.icp.search_gate_mm = kv.get_double("baseline", "search_gate_mm", 3.0);
  c.baseline.icp.trim = kv.get_bool("baseline", "trim", false);
  c.baseline.feature_jitter_mm = kv.get_double("baseline", "feature_jitter_mm", 0.05);
  c.baseline.fps = c.tracker.fps;
  c.return_gate_iou = kv.get_double("metrics", "return_gate_iou", 0.95);
  c.seed = kv.get_u64("seed", "value", 20250810);
  return c;
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  os.precision(17);
  os << "[contact]\n";
  os << "depth_threshold_mm = " << contact.depth_threshold_m * 1e3 << "\n";
  os << "kernel_px = " << contact.kernel_px << "\n";
  os << "kernel_iters = " << contact.kernel_iters << "\n";
  os << "close_kernel_px = " << contact.close_kernel_px << "\n";
  os << "close_iters = " << contact.close_iters << "\n";
  os << "border_margin_px = " << contact.border_margin_px << "\n";
  os << "use_area_moment = " << (contact.use_area_moment ? "true" : "false") << "\n";
  os << "use_aux_mask = " << (use_aux_mask ? "true" : "false") << "\n";
  os << "[pose]\n";
  os << "anisotropy_threshold = " << tracker.anisotropy_threshold << "\n";
  os << "fps = " << tracker.fps << "\n";
  os << "[cloud]\n";
  os << "grid_rows = " << grid_rows << "\n";
  os << "grid_cols = " << grid_cols << "\n";
  os << "marker_rows = " << marker_rows << "\n";
  os << "marker_cols = " << marker_cols << "\n";
  os << "[registration]\n";
  os << "overlap_gate = " << registration.overlap_gate << "\n";
  os << "rmse_gate_mm = " << registration.rmse_gate_mm << "\n";
  os << "nn_gate_mm = " << registration.nn_gate_mm << "\n";
  os << "search_gate_mm = " << registration.search_gate_mm << "\n";
  os << "max_iters = " << registration.max_iters << "\n";
  os << "tol_mm = " << registration.tol_mm << "\n";
  os << "trim = " << (registration.trim ? "true" : "false") << "\n";
  os << "dedup_average = " << (registration.dedup_average ? "true" : "false") << "\n";
  os << "[baseline]\n";
  os << "nn_gate_mm = " << baseline.icp.nn_gate_mm << "\n";
  os << "search_gate_mm = " << baseline.icp.search_gate_mm << "\n";
  os << "trim = " << (baseline.icp.trim ? "true" : "false") << "\n";
  os << "feature_jitter_mm = " << baseline.feature_jitter_mm << "\n";
  os << "[metrics]\n";
  os << "return_gate_iou = " << return_gate_iou << "\n";
  os << "[seed]\n";
  os << "value = " << seed << "\n";
  return os.str();
}

namespace {

Pose parse_pose_values(const std::string& text, const std::string& what) {
  std::istringstream ss(text);
  Pose p;
  if (!(ss >> p.tx >> p.ty >> p.tz >> p.rx >> p.ry >> p.rz))
    throw DataError(what + ": expected six numbers (tx ty tz rx ry rz), got: " + text);
  std::string rest;
  if (ss >> rest) throw DataError(what + ": trailing content: " + rest);
  return p;
}

Dof parse_dof(const std::string& s) {
  if (s == "tx") return Dof::Tx;
  if (s == "ty") return Dof::Ty;
  if (s == "tz") return Dof::Tz;
  if (s == "rx") return Dof::Rx;
  if (s == "ry") return Dof::Ry;
  if (s == "rz") return Dof::Rz;
  throw DataError("unknown dof: " + s);
}

}  // namespace

Scenario Scenario::from_file(const std::string& path) { return from_kv(KvFile::parse_file(path)); }

Scenario Scenario::from_kv(const KvFile& kv) {
  kv.require_known({
      "object.shape", "object.radius_mm", "object.a_mm", "object.b_mm", "object.c_mm",
      "object.w_mm", "object.h_mm", "object.edge_round_mm", "object.rim_mm",
      "object.press_radius_mm", "object.polygon",
      "trajectory.kind", "trajectory.base", "trajectory.dof", "trajectory.rate",
      "trajectory.frames", "trajectory.half_frames", "trajectory.slip", "trajectory.placement*",
      "sensor.width", "sensor.height", "sensor.ppmm", "sensor.fps",
      "noise.height_sigma_mm", "noise.mask_flip_prob",
      "seed.value",
  });

  Scenario sc;
  const std::string shape = kv.get("object", "shape", "sphere");
  if (shape == "sphere") {
    sc.object = Sphere{kv.get_double("object", "radius_mm", 10.0)};
  } else if (shape == "ellipsoid") {
    sc.object = Ellipsoid{kv.get_double("object", "a_mm", 8.0), kv.get_double("object", "b_mm", 4.0),
                          kv.get_double("object", "c_mm", 6.0)};
  } else if (shape == "box_corner") {
    sc.object = BoxCorner{kv.get_double("object", "w_mm", 14.0), kv.get_double("object", "h_mm", 10.0),
                          kv.get_double("object", "edge_round_mm", 2.0)};
  } else if (shape == "scissors") {
    ExtrudedOutline o = scissors_template();
    o.rim_mm = kv.get_double("object", "rim_mm", o.rim_mm);
    o.press_radius_mm = kv.get_double("object", "press_radius_mm", 0.0);
    sc.object = o;
  } else if (shape == "polygon") {
    ExtrudedOutline o;
    o.rim_mm = kv.get_double("object", "rim_mm", 1.0);
    o.press_radius_mm = kv.get_double("object", "press_radius_mm", 0.0);
    std::istringstream ss(kv.get("object", "polygon", ""));
    std::string pair;
    while (ss >> pair) {
      const auto comma = pair.find(',');
      if (comma == std::string::npos) throw DataError("polygon vertices must be x,y pairs");
      o.polygon_mm.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
    }
    if (o.polygon_mm.size() < 3) throw DataError("polygon needs at least 3 vertices");
    sc.object = o;
  } else {
    throw DataError("unknown object shape: " + shape);
  }

  const Pose base = parse_pose_values(kv.get("trajectory", "base", "0 0 -1 0 0 0"), "trajectory.base");
  const std::string kind = kv.get("trajectory", "kind", "static");
  if (kind == "static") {
    sc.trajectory = make_static(base, kv.get_int("trajectory", "frames", 100));
  } else if (kind == "single_axis") {
    sc.trajectory = make_single_axis(base, parse_dof(kv.get("trajectory", "dof", "rz")),
                                     kv.get_double("trajectory", "rate", -1.0),
                                     kv.get_int("trajectory", "frames", 90));
  } else if (kind == "return_loop") {
    sc.trajectory = make_return_loop(base, parse_dof(kv.get("trajectory", "dof", "tx")),
                                     kv.get_double("trajectory", "rate", 0.1),
                                     kv.get_int("trajectory", "half_frames", 50));
  } else if (kind == "multi_contact") {
    std::vector<Pose> placements;
    for (int i = 0;; ++i) {
      const std::string key = "placement" + std::to_string(i);
      if (!kv.has("trajectory", key)) break;
      placements.push_back(parse_pose_values(kv.get("trajectory", key, ""), "trajectory." + key));
    }
    if (placements.empty()) throw DataError("multi_contact needs placement0, placement1, ...");
    sc.trajectory = make_multi_contact(std::move(placements));
  } else {
    throw DataError("unknown trajectory kind: " + kind);
  }
  sc.slip = kv.get_bool("trajectory", "slip", false);

  sc.sensor.width = kv.get_int("sensor", "width", 320);
  sc.sensor.height = kv.get_int("sensor", "height", 240);
  sc.sensor.ppmm = kv.get_double("sensor", "ppmm", 10.0);
  sc.sensor.fps = kv.get_double("sensor", "fps", 25.0);
  sc.noise.height_sigma_mm = kv.get_double("noise", "height_sigma_mm", 0.02);
  sc.noise.mask_flip_prob = kv.get_double("noise", "mask_flip_prob", 0.002);
  sc.seed = kv.get_u64("seed", "value", 20250810);
  return sc;
}

}  // namespace ic
