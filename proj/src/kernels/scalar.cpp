#include "ic/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace ic::kernels {
namespace {

void depression_mask_scalar(const double* ref, const double* cur, double threshold,
                            std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (ref[i] - cur[i]) > threshold ? 1 : 0;
}

void row_dilate_scalar(const std::uint8_t* row, std::uint8_t* out, std::size_t n, int hw) {
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - hw);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn - 1, i + hw);
    std::uint8_t v = 0;
    for (std::ptrdiff_t j = lo; j <= hi && !v; ++j) v = row[j];
    out[i] = v;
  }
}

void row_erode_scalar(const std::uint8_t* row, std::uint8_t* out, std::size_t n, int hw) {
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - hw);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn - 1, i + hw);
    std::uint8_t v = 1;
    for (std::ptrdiff_t j = lo; j <= hi && v; ++j) v = row[j];
    out[i] = v;
  }
}

void or_u8_scalar(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] | b[i];
}

void and_u8_scalar(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] & b[i];
}

void matmul_f64_scalar(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n) {
  // i-k-j loop order keeps B accesses sequential.
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void sum3_f64_scalar(const double* x, const double* y, const double* z,
                     std::size_t n, double out[3]) {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sz += z[i];
  }
  out[0] = sx;
  out[1] = sy;
  out[2] = sz;
}

void cross_cov_f64_scalar(const double* px, const double* py, const double* pz,
                          const double* qx, const double* qy, const double* qz,
                          const double pc[3], const double qc[3],
                          std::size_t n, double h[9]) {
  double h00 = 0, h01 = 0, h02 = 0, h10 = 0, h11 = 0, h12 = 0, h20 = 0, h21 = 0, h22 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a0 = px[i] - pc[0], a1 = py[i] - pc[1], a2 = pz[i] - pc[2];
    const double b0 = qx[i] - qc[0], b1 = qy[i] - qc[1], b2 = qz[i] - qc[2];
    h00 += a0 * b0; h01 += a0 * b1; h02 += a0 * b2;
    h10 += a1 * b0; h11 += a1 * b1; h12 += a1 * b2;
    h20 += a2 * b0; h21 += a2 * b1; h22 += a2 * b2;
  }
  h[0] = h00; h[1] = h01; h[2] = h02;
  h[3] = h10; h[4] = h11; h[5] = h12;
  h[6] = h20; h[7] = h21; h[8] = h22;
}

double sum_f64_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double max_abs_f64_scalar(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k{
      "scalar",
      depression_mask_scalar,
      row_dilate_scalar,
      row_erode_scalar,
      or_u8_scalar,
      and_u8_scalar,
      matmul_f64_scalar,
      sum3_f64_scalar,
      cross_cov_f64_scalar,
      sum_f64_scalar,
      max_abs_f64_scalar,
  };
  return k;
}

}  // namespace ic::kernels
