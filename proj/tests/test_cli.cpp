#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ic/track_io.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = IC_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  const fs::path p = fs::temp_directory_path() / "ic_cli_tests";
  fs::create_directories(p);
  return p;
}

void write_scenario(const fs::path& path) {
  std::ofstream os(path);
  os << "[object]\n"
        "shape = ellipsoid\n"
        "a_mm = 8\nb_mm = 4\nc_mm = 6\n"
        "[trajectory]\n"
        "kind = static\nframes = 8\nbase = 0 0 -1 0 0 0\n"
        "[noise]\n"
        "height_sigma_mm = 0\nmask_flip_prob = 0\n"
        "[seed]\nvalue = 5\n";
}

}  // namespace

TEST_CASE("cli pipeline: simulate, init-cloud, track, evaluate") {
  const fs::path wd = work_dir();
  fs::remove_all(wd / "run");
  fs::create_directories(wd / "run");
  const fs::path scenario = wd / "run" / "scenario.cfg";
  write_scenario(scenario);

  const std::string frames = (wd / "run" / "sim").string();
  REQUIRE(run("simulate --scenario " + scenario.string() + " --out " + frames) == 0);
  CHECK(fs::exists(fs::path(frames) / "reference.ichm"));
  CHECK(fs::exists(fs::path(frames) / "markers.png"));
  CHECK(fs::exists(fs::path(frames) / "frames" / "000000.ichm"));
  CHECK(fs::exists(fs::path(frames) / "gt_track.csv"));

  const std::string cloud = (wd / "run" / "cloud.txt").string();
  REQUIRE(run("init-cloud --frames " + frames + " --out " + cloud) == 0);
  CHECK(fs::exists(cloud));

  const std::string track = (wd / "run" / "track.csv").string();
  REQUIRE(run("track --frames " + frames + " --cloud " + cloud + " --out " + track) == 0);
  const auto rows = ic::read_track_csv(track);
  CHECK(rows.size() == 8);
  CHECK(rows.back().tracked);
  CHECK(std::fabs(rows.back().pose.tx) <= 0.05);

  const std::string btrack = (wd / "run" / "baseline.csv").string();
  REQUIRE(run("track --frames " + frames + " --cloud " + cloud + " --out " + btrack +
              " --method baseline") == 0);
  CHECK(ic::read_track_csv(btrack).size() == 8);

  const std::string report = (wd / "run" / "report").string();
  REQUIRE(run("evaluate --experiment drift --track invariant=" + track + " --track baseline=" +
              btrack + " --gt " + frames + "/gt_track.csv --out " + report + " --emit-plots") == 0);
  CHECK(fs::exists(fs::path(report) / "drift.csv"));
  CHECK(fs::exists(fs::path(report) / "drift.md"));
  CHECK(fs::exists(fs::path(report) / "drift.svg"));
}

TEST_CASE("cli exit codes distinguish usage, data, and algorithmic failures") {
  const fs::path wd = work_dir();
  CHECK(run("no-such-command") == 2);
  CHECK(run("track --frames /nonexistent --cloud /nonexistent --out /tmp/x.csv") == 3);
  CHECK(run("simulate --scenario /nonexistent.cfg --out /tmp/y") == 3);

  // a frames dir whose marker mask cannot yield the expected grid
  fs::remove_all(wd / "bad");
  fs::create_directories(wd / "bad");
  const fs::path scenario = wd / "bad" / "scenario.cfg";
  write_scenario(scenario);
  const std::string frames = (wd / "bad" / "sim").string();
  REQUIRE(run("simulate --scenario " + scenario.string() + " --out " + frames) == 0);
  std::ofstream cfg(wd / "bad" / "config.cfg");
  cfg << "[cloud]\nmarker_rows = 8\nmarker_cols = 9\n";  // expects 72 dots, mask has 63
  cfg.close();
  CHECK(run("init-cloud --frames " + frames + " --out " + (wd / "bad" / "c.txt").string() +
            " --config " + (wd / "bad" / "config.cfg").string()) == 4);
}

TEST_CASE("cli selftest passes") { CHECK(run("selftest") == 0); }
