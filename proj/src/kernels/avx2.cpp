// AVX2+FMA variants. Compiled only when the toolchain supports -mavx2 -mfma;
// selected at runtime when the CPU reports both.

#include "ic/kernels/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace ic::kernels {
namespace {

void depression_mask_avx2(const double* ref, const double* cur, double threshold,
                          std::uint8_t* out, std::size_t n) {
  const __m256d thr = _mm256_set1_pd(threshold);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(ref + i), _mm256_loadu_pd(cur + i));
    const __m256d gt = _mm256_cmp_pd(d, thr, _CMP_GT_OQ);
    const int m = _mm256_movemask_pd(gt);
    out[i + 0] = (m >> 0) & 1;
    out[i + 1] = (m >> 1) & 1;
    out[i + 2] = (m >> 2) & 1;
    out[i + 3] = (m >> 3) & 1;
  }
  for (; i < n; ++i) out[i] = (ref[i] - cur[i]) > threshold ? 1 : 0;
}

inline std::uint8_t window_or(const std::uint8_t* row, std::ptrdiff_t n,
                              std::ptrdiff_t i, int hw) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - hw);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + hw);
  std::uint8_t v = 0;
  for (std::ptrdiff_t j = lo; j <= hi && !v; ++j) v = row[j];
  return v;
}

inline std::uint8_t window_and(const std::uint8_t* row, std::ptrdiff_t n,
                               std::ptrdiff_t i, int hw) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - hw);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + hw);
  std::uint8_t v = 1;
  for (std::ptrdiff_t j = lo; j <= hi && v; ++j) v = row[j];
  return v;
}

void row_dilate_avx2(const std::uint8_t* row, std::uint8_t* out, std::size_t n, int hw) {
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t edge = std::min<std::ptrdiff_t>(hw, sn);
  std::ptrdiff_t i = 0;
  for (; i < edge; ++i) out[i] = window_or(row, sn, i, hw);
  // Interior: all window loads in-bounds, 32 lanes at a time.
  for (; i + 32 + hw <= sn; i += 32) {
    __m256i acc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + i - hw));
    for (int d = 1; d <= 2 * hw; ++d) {
      acc = _mm256_or_si256(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + i - hw + d)));
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), acc);
  }
  for (; i < sn; ++i) out[i] = window_or(row, sn, i, hw);
}

void row_erode_avx2(const std::uint8_t* row, std::uint8_t* out, std::size_t n, int hw) {
  const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t edge = std::min<std::ptrdiff_t>(hw, sn);
  std::ptrdiff_t i = 0;
  for (; i < edge; ++i) out[i] = window_and(row, sn, i, hw);
  for (; i + 32 + hw <= sn; i += 32) {
    __m256i acc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + i - hw));
    for (int d = 1; d <= 2 * hw; ++d) {
      acc = _mm256_and_si256(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + i - hw + d)));
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), acc);
  }
  for (; i < sn; ++i) out[i] = window_and(row, sn, i, hw);
}

void or_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_or_si256(va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] | b[i];
}

void and_u8_avx2(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_and_si256(va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] & b[i];
}

void matmul_f64_avx2(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d aip = _mm256_set1_pd(ai[p]);
      const double* bp = b + p * n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256d c0 = _mm256_loadu_pd(ci + j);
        __m256d c1 = _mm256_loadu_pd(ci + j + 4);
        c0 = _mm256_fmadd_pd(aip, _mm256_loadu_pd(bp + j), c0);
        c1 = _mm256_fmadd_pd(aip, _mm256_loadu_pd(bp + j + 4), c1);
        _mm256_storeu_pd(ci + j, c0);
        _mm256_storeu_pd(ci + j + 4, c1);
      }
      for (; j + 4 <= n; j += 4) {
        __m256d c0 = _mm256_loadu_pd(ci + j);
        c0 = _mm256_fmadd_pd(aip, _mm256_loadu_pd(bp + j), c0);
        _mm256_storeu_pd(ci + j, c0);
      }
      const double s = ai[p];
      for (; j < n; ++j) ci[j] += s * bp[j];
    }
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void sum3_f64_avx2(const double* x, const double* y, const double* z,
                   std::size_t n, double out[3]) {
  __m256d sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd(), sz = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    sx = _mm256_add_pd(sx, _mm256_loadu_pd(x + i));
    sy = _mm256_add_pd(sy, _mm256_loadu_pd(y + i));
    sz = _mm256_add_pd(sz, _mm256_loadu_pd(z + i));
  }
  double tx = hsum(sx), ty = hsum(sy), tz = hsum(sz);
  for (; i < n; ++i) {
    tx += x[i];
    ty += y[i];
    tz += z[i];
  }
  out[0] = tx;
  out[1] = ty;
  out[2] = tz;
}

void cross_cov_f64_avx2(const double* px, const double* py, const double* pz,
                        const double* qx, const double* qy, const double* qz,
                        const double pc[3], const double qc[3],
                        std::size_t n, double h[9]) {
  const __m256d pc0 = _mm256_set1_pd(pc[0]), pc1 = _mm256_set1_pd(pc[1]), pc2 = _mm256_set1_pd(pc[2]);
  const __m256d qc0 = _mm256_set1_pd(qc[0]), qc1 = _mm256_set1_pd(qc[1]), qc2 = _mm256_set1_pd(qc[2]);
  __m256d acc[9];
  for (auto& v : acc) v = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = _mm256_sub_pd(_mm256_loadu_pd(px + i), pc0);
    const __m256d a1 = _mm256_sub_pd(_mm256_loadu_pd(py + i), pc1);
    const __m256d a2 = _mm256_sub_pd(_mm256_loadu_pd(pz + i), pc2);
    const __m256d b0 = _mm256_sub_pd(_mm256_loadu_pd(qx + i), qc0);
    const __m256d b1 = _mm256_sub_pd(_mm256_loadu_pd(qy + i), qc1);
    const __m256d b2 = _mm256_sub_pd(_mm256_loadu_pd(qz + i), qc2);
    acc[0] = _mm256_fmadd_pd(a0, b0, acc[0]);
    acc[1] = _mm256_fmadd_pd(a0, b1, acc[1]);
    acc[2] = _mm256_fmadd_pd(a0, b2, acc[2]);
    acc[3] = _mm256_fmadd_pd(a1, b0, acc[3]);
    acc[4] = _mm256_fmadd_pd(a1, b1, acc[4]);
    acc[5] = _mm256_fmadd_pd(a1, b2, acc[5]);
    acc[6] = _mm256_fmadd_pd(a2, b0, acc[6]);
    acc[7] = _mm256_fmadd_pd(a2, b1, acc[7]);
    acc[8] = _mm256_fmadd_pd(a2, b2, acc[8]);
  }
  for (int j = 0; j < 9; ++j) h[j] = hsum(acc[j]);
  for (; i < n; ++i) {
    const double a0 = px[i] - pc[0], a1 = py[i] - pc[1], a2 = pz[i] - pc[2];
    const double b0 = qx[i] - qc[0], b1 = qy[i] - qc[1], b2 = qz[i] - qc[2];
    h[0] += a0 * b0; h[1] += a0 * b1; h[2] += a0 * b2;
    h[3] += a1 * b0; h[4] += a1 * b1; h[5] += a1 * b2;
    h[6] += a2 * b0; h[7] += a2 * b1; h[8] += a2 * b2;
  }
}

double sum_f64_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double max_abs_f64_avx2(const double* a, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(a + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

}  // namespace

const Kernels& avx2() {
  static const Kernels k{
      "avx2",
      depression_mask_avx2,
      row_dilate_avx2,
      row_erode_avx2,
      or_u8_avx2,
      and_u8_avx2,
      matmul_f64_avx2,
      sum3_f64_avx2,
      cross_cov_f64_avx2,
      sum_f64_avx2,
      max_abs_f64_avx2,
  };
  return k;
}

}  // namespace ic::kernels
