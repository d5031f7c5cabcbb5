#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ic/contact.hpp"
#include "ic/registration.hpp"
#include "ic/simulator.hpp"

namespace ic {

/// Declarative key-value text: `[section]` headers, `key = value` lines,
/// `#` comments. Duplicate keys are an error; consumers reject unknown keys.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;

  /// Throws DataError naming the first key not in `allowed`
  /// (section-qualified "section.key" entries).
  void require_known(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;  // "section.key" -> value
  std::string origin_;
};

/// Pipeline configuration shared by the CLI commands.
struct RunConfig {
  ContactParams contact;
  bool use_aux_mask = false;
  TrackerConfig tracker;
  int grid_rows = 19;  // reference grid points per column
  int grid_cols = 25;
  int marker_rows = 7;
  int marker_cols = 9;
  RegistrationConfig registration;
  BaselineConfig baseline;
  double return_gate_iou = 0.95;
  std::uint64_t seed = 20250810;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_kv(const KvFile& kv);
  /// Effective-config echo, parseable by from_file.
  std::string echo() const;
};

/// A simulator scenario: object, trajectory, sensor, noise, seed.
struct Scenario {
  SceneObject object = Sphere{};
  Trajectory trajectory;
  bool slip = false;  // render with the torsional-slip model
  SensorParams sensor;
  NoiseParams noise;
  std::uint64_t seed = 20250810;

  static Scenario from_file(const std::string& path);
  static Scenario from_kv(const KvFile& kv);
};

}  // namespace ic
