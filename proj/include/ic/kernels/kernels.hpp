#pragma once

#include <cstddef>
#include <cstdint>

namespace ic::kernels {

/// Vectorizable inner loops of the pipeline. Every entry has a scalar
/// reference implementation; on x86 with AVX2+FMA a vector variant is
/// selected at startup (override with IC_KERNELS=scalar|avx2).
///
/// The scalar set is the semantic reference: vector variants must agree
/// bitwise for the integer/byte kernels and to tight tolerance for the
/// float kernels (FMA contraction changes rounding).
struct Kernels {
  const char* name;

  // out[i] = (ref[i] - cur[i]) > threshold
  void (*depression_mask)(const double* ref, const double* cur, double threshold,
                          std::uint8_t* out, std::size_t n);

  // Binary row max/min over the window [i-hw, i+hw] clipped to [0, n).
  void (*row_dilate_u8)(const std::uint8_t* row, std::uint8_t* out, std::size_t n, int hw);
  void (*row_erode_u8)(const std::uint8_t* row, std::uint8_t* out, std::size_t n, int hw);

  void (*or_u8)(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out, std::size_t n);
  void (*and_u8)(const std::uint8_t* a, const std::uint8_t* b, std::uint8_t* out, std::size_t n);

  // Row-major C(m x n) = A(m x k) * B(k x n). Used by the DCT transforms.
  void (*matmul_f64)(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);

  // Structure-of-arrays point reductions (Kabsch/PCA accumulation).
  void (*sum3_f64)(const double* x, const double* y, const double* z,
                   std::size_t n, double out[3]);
  // h[3x3] += sum_i (p_i - pc)(q_i - qc)^T over SoA inputs; h is overwritten.
  void (*cross_cov_f64)(const double* px, const double* py, const double* pz,
                        const double* qx, const double* qy, const double* qz,
                        const double pc[3], const double qc[3],
                        std::size_t n, double h[9]);

  double (*sum_f64)(const double* a, std::size_t n);
  double (*max_abs_f64)(const double* a, std::size_t n);
};

const Kernels& scalar();
bool avx2_compiled();
bool avx2_supported();   // compiled in AND the CPU reports AVX2+FMA
const Kernels& avx2();   // valid only when avx2_compiled()

/// Runtime-selected set. Resolution order: IC_KERNELS env var, then the
/// widest supported variant. Stable for the lifetime of the process.
const Kernels& active();

/// Test hook: force a named set ("scalar"/"avx2"). Throws on unknown or
/// unsupported names.
void force(const char* name);

}  // namespace ic::kernels
