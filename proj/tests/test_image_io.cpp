#include <doctest.h>

#include <filesystem>
#include <random>

#include "ic/errors.hpp"
#include "ic/image_io.hpp"

using namespace ic;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path p = fs::temp_directory_path() / "ic_io_tests";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("height map binary container round trip") {
  HeightMap hm = make_height_map(17, 11, 12.5);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (auto& v : hm.data) v = static_cast<float>(u(rng));  // f32-representable

  const auto path = (tmp_dir() / "hm.ichm").string();
  save_height_map(hm, path);
  const HeightMap back = load_height_map(path);
  CHECK(back.width == hm.width);
  CHECK(back.height == hm.height);
  CHECK(back.ppmm == doctest::Approx(hm.ppmm));
  CHECK(back.data == hm.data);
}

TEST_CASE("gradient field binary container round trip") {
  GradientField g;
  g.width = 9;
  g.height = 5;
  g.ppmm = 10.0;
  g.gx.assign(45, 0.0);
  g.gy.assign(45, 0.0);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : g.gx) v = static_cast<float>(u(rng));
  for (auto& v : g.gy) v = static_cast<float>(u(rng));

  const auto path = (tmp_dir() / "gf.icgf").string();
  save_gradient_field(g, path);
  const GradientField back = load_gradient_field(path);
  CHECK(back.gx == g.gx);
  CHECK(back.gy == g.gy);
}

TEST_CASE("mismatched magic is rejected") {
  const auto hm_path = (tmp_dir() / "magic.ichm").string();
  save_height_map(make_height_map(4, 4, 10.0), hm_path);
  CHECK_THROWS_AS(load_gradient_field(hm_path), DataError);
  CHECK_THROWS_AS(load_height_map((tmp_dir() / "missing.ichm").string()), DataError);
}

TEST_CASE("16-bit png with sidecar preserves heights to quantization") {
  HeightMap hm = make_height_map(33, 21, 10.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-12.0, 3.0);
  for (auto& v : hm.data) v = u(rng);

  const auto path = (tmp_dir() / "vis.png").string();
  save_height_map_png16(hm, path);
  const HeightMap back = load_height_map_png16(path);
  CHECK(back.ppmm == doctest::Approx(hm.ppmm));
  const double step = 15.0 / 65535.0;
  for (std::size_t i = 0; i < hm.data.size(); ++i) {
    CHECK(std::fabs(back.data[i] - hm.data[i]) <= step);
  }
}

TEST_CASE("1-bit png mask round trip is exact") {
  ContactMask m = make_mask(37, 19, 0);  // width not a byte multiple
  std::mt19937_64 rng(24);
  std::bernoulli_distribution b(0.4);
  for (auto& v : m.bits) v = b(rng) ? 1 : 0;

  const auto path = (tmp_dir() / "mask.png").string();
  save_mask_png(m, path);
  const ContactMask back = load_mask_png(path);
  CHECK(back.width == m.width);
  CHECK(back.height == m.height);
  CHECK(back.bits == m.bits);
}
