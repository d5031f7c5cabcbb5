#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "ic/kernels/kernels.hpp"

using namespace ic;

namespace {

std::vector<double> random_doubles(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n, double p = 0.4) {
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = b(rng) ? 1 : 0;
  return v;
}

// Naive window references the row kernels must reproduce.
std::vector<std::uint8_t> window_or_ref(const std::vector<std::uint8_t>& row, int hw) {
  std::vector<std::uint8_t> out(row.size(), 0);
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(row.size()); ++i) {
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - hw);
         j <= std::min<std::ptrdiff_t>(row.size() - 1, i + hw); ++j)
      out[i] |= row[j];
  }
  return out;
}

}  // namespace

TEST_CASE("scalar row dilate matches the naive window") {
  std::mt19937_64 rng(1);
  for (int hw : {0, 1, 3, 7}) {
    const auto row = random_bits(rng, 129, 0.2);
    std::vector<std::uint8_t> out(row.size());
    kernels::scalar().row_dilate_u8(row.data(), out.data(), row.size(), hw);
    CHECK(out == window_or_ref(row, hw));
  }
}

TEST_CASE("scalar row erode is the complement of dilate on inverted input") {
  std::mt19937_64 rng(2);
  const auto row = random_bits(rng, 200, 0.7);
  std::vector<std::uint8_t> inv(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) inv[i] = row[i] ? 0 : 1;
  std::vector<std::uint8_t> er(row.size()), di(row.size());
  kernels::scalar().row_erode_u8(row.data(), er.data(), row.size(), 3);
  kernels::scalar().row_dilate_u8(inv.data(), di.data(), inv.size(), 3);
  for (std::size_t i = 0; i < row.size(); ++i) CHECK(er[i] == (di[i] ? 0 : 1));
}

TEST_CASE("scalar matmul multiplies correctly") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6};        // 2x3
  const std::vector<double> b{7, 8, 9, 10, 11, 12};     // 3x2
  std::vector<double> c(4);
  kernels::scalar().matmul_f64(a.data(), b.data(), c.data(), 2, 3, 2);
  CHECK(c[0] == doctest::Approx(58));
  CHECK(c[1] == doctest::Approx(64));
  CHECK(c[2] == doctest::Approx(139));
  CHECK(c[3] == doctest::Approx(154));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!kernels::avx2_supported()) return;
  const auto& s = kernels::scalar();
  const auto& v = kernels::avx2();
  std::mt19937_64 rng(3);

  for (std::size_t n : {1u, 5u, 31u, 32u, 33u, 257u, 1024u}) {
    const auto ref = random_doubles(rng, n);
    const auto cur = random_doubles(rng, n);
    std::vector<std::uint8_t> m1(n), m2(n);
    s.depression_mask(ref.data(), cur.data(), 0.05, m1.data(), n);
    v.depression_mask(ref.data(), cur.data(), 0.05, m2.data(), n);
    CHECK(m1 == m2);

    const auto bits_a = random_bits(rng, n);
    const auto bits_b = random_bits(rng, n);
    std::vector<std::uint8_t> o1(n), o2(n);
    s.or_u8(bits_a.data(), bits_b.data(), o1.data(), n);
    v.or_u8(bits_a.data(), bits_b.data(), o2.data(), n);
    CHECK(o1 == o2);
    s.and_u8(bits_a.data(), bits_b.data(), o1.data(), n);
    v.and_u8(bits_a.data(), bits_b.data(), o2.data(), n);
    CHECK(o1 == o2);

    for (int hw : {0, 1, 3, 5}) {
      s.row_dilate_u8(bits_a.data(), o1.data(), n, hw);
      v.row_dilate_u8(bits_a.data(), o2.data(), n, hw);
      CHECK(o1 == o2);
      s.row_erode_u8(bits_a.data(), o1.data(), n, hw);
      v.row_erode_u8(bits_a.data(), o2.data(), n, hw);
      CHECK(o1 == o2);
    }

    const double s1 = s.sum_f64(ref.data(), n);
    const double s2 = v.sum_f64(ref.data(), n);
    CHECK(s2 == doctest::Approx(s1).epsilon(1e-12));
    CHECK(v.max_abs_f64(ref.data(), n) == doctest::Approx(s.max_abs_f64(ref.data(), n)));
  }

  // matmul on DCT-sized shapes
  for (auto [m, k, n] : std::vector<std::array<std::size_t, 3>>{{5, 7, 9}, {64, 64, 64}, {33, 17, 40}}) {
    const auto a = random_doubles(rng, m * k);
    const auto b = random_doubles(rng, k * n);
    std::vector<double> c1(m * n), c2(m * n);
    s.matmul_f64(a.data(), b.data(), c1.data(), m, k, n);
    v.matmul_f64(a.data(), b.data(), c2.data(), m, k, n);
    double worst = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i) worst = std::max(worst, std::fabs(c1[i] - c2[i]));
    CHECK(worst <= 1e-10);
  }

  // point reductions
  for (std::size_t n : {3u, 100u, 475u}) {
    const auto x = random_doubles(rng, n), y = random_doubles(rng, n), z = random_doubles(rng, n);
    double r1[3], r2[3];
    s.sum3_f64(x.data(), y.data(), z.data(), n, r1);
    v.sum3_f64(x.data(), y.data(), z.data(), n, r2);
    for (int i = 0; i < 3; ++i) CHECK(r2[i] == doctest::Approx(r1[i]).epsilon(1e-12));

    const auto qx = random_doubles(rng, n), qy = random_doubles(rng, n), qz = random_doubles(rng, n);
    const double pc[3] = {0.1, -0.2, 0.3}, qc[3] = {-0.4, 0.5, 0.6};
    double h1[9], h2[9];
    s.cross_cov_f64(x.data(), y.data(), z.data(), qx.data(), qy.data(), qz.data(), pc, qc, n, h1);
    v.cross_cov_f64(x.data(), y.data(), z.data(), qx.data(), qy.data(), qz.data(), pc, qc, n, h2);
    for (int i = 0; i < 9; ++i) CHECK(h2[i] == doctest::Approx(h1[i]).epsilon(1e-10));
  }
}

TEST_CASE("kernel dispatch honors force()") {
  kernels::force("scalar");
  CHECK(std::string(kernels::active().name) == "scalar");
  if (kernels::avx2_supported()) {
    kernels::force("avx2");
    CHECK(std::string(kernels::active().name) == "avx2");
  }
  CHECK_THROWS(kernels::force("no-such-isa"));
  // restore the default resolution for the remaining tests
  kernels::force(kernels::avx2_supported() ? "avx2" : "scalar");
}
