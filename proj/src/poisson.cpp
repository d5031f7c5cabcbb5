#include "ic/poisson.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "ic/kernels/kernels.hpp"

namespace ic {
namespace {

struct DctBasis {
  std::vector<double> c;   // c[k*n + i] = s_k cos(pi k (2i+1) / (2n))
  std::vector<double> ct;  // transpose
};

const DctBasis& basis(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<DctBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto b = std::make_unique<DctBasis>();
  b->c.resize(static_cast<std::size_t>(n) * n);
  b->ct.resize(static_cast<std::size_t>(n) * n);
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? s0 : sk;
    for (int i = 0; i < n; ++i) {
      const double v = scale * std::cos(M_PI * k * (2 * i + 1) / (2.0 * n));
      b->c[static_cast<std::size_t>(k) * n + i] = v;
      b->ct[static_cast<std::size_t>(i) * n + k] = v;
    }
  }
  const DctBasis& ref = *b;
  cache.emplace(n, std::move(b));
  return ref;
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

void dct2(const double* in, double* out, int width, int height) {
  const auto& k = kernels::active();
  const DctBasis& bw = basis(width);
  const DctBasis& bh = basis(height);
  std::vector<double> tmp(static_cast<std::size_t>(width) * height);
  // rows: tmp = in * Cw^T ; cols: out = Ch * tmp
  k.matmul_f64(in, bw.ct.data(), tmp.data(), height, width, width);
  k.matmul_f64(bh.c.data(), tmp.data(), out, height, height, width);
}

void idct2(const double* in, double* out, int width, int height) {
  const auto& k = kernels::active();
  const DctBasis& bw = basis(width);
  const DctBasis& bh = basis(height);
  std::vector<double> tmp(static_cast<std::size_t>(width) * height);
  k.matmul_f64(in, bw.c.data(), tmp.data(), height, width, width);
  k.matmul_f64(bh.ct.data(), tmp.data(), out, height, height, width);
}

GradientField gradient_of(const HeightMap& hm) {
  if (hm.width < 2 || hm.height < 2) throw std::invalid_argument("gradient needs dims >= 2x2");
  GradientField g;
  g.width = hm.width;
  g.height = hm.height;
  g.ppmm = hm.ppmm;
  g.gx.assign(hm.data.size(), 0.0);
  g.gy.assign(hm.data.size(), 0.0);
  for (int y = 0; y < hm.height; ++y) {
    for (int x = 0; x < hm.width - 1; ++x) {
      g.gx[static_cast<std::size_t>(y) * hm.width + x] = hm.at(x + 1, y) - hm.at(x, y);
    }
  }
  for (int y = 0; y < hm.height - 1; ++y) {
    for (int x = 0; x < hm.width; ++x) {
      g.gy[static_cast<std::size_t>(y) * hm.width + x] = hm.at(x, y + 1) - hm.at(x, y);
    }
  }
  return g;
}

HeightMap integrate_gradients_dct(const GradientField& g) {
  const int w = g.width, h = g.height;
  if (w < 2 || h < 2) throw std::invalid_argument("integration needs dims >= 2x2");
  if (g.gx.size() != static_cast<std::size_t>(w) * h || g.gy.size() != g.gx.size())
    throw std::invalid_argument("gradient field size mismatch");
  require_finite(g.gx, "gx");
  require_finite(g.gy, "gy");

  // Divergence as the negative adjoint of the forward-difference gradient;
  // the padding column of gx / row of gy is treated as zero flux.
  std::vector<double> div(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    const double* gx = g.gx.data() + static_cast<std::size_t>(y) * w;
    double* d = div.data() + static_cast<std::size_t>(y) * w;
    d[0] += gx[0];
    for (int x = 1; x < w - 1; ++x) d[x] += gx[x] - gx[x - 1];
    d[w - 1] += -gx[w - 2];
  }
  for (int x = 0; x < w; ++x) {
    div[x] += g.gy[x];
    for (int y = 1; y < h - 1; ++y) {
      div[static_cast<std::size_t>(y) * w + x] +=
          g.gy[static_cast<std::size_t>(y) * w + x] - g.gy[static_cast<std::size_t>(y - 1) * w + x];
    }
    div[static_cast<std::size_t>(h - 1) * w + x] += -g.gy[static_cast<std::size_t>(h - 2) * w + x];
  }

  std::vector<double> freq(div.size());
  dct2(div.data(), freq.data(), w, h);

  for (int v = 0; v < h; ++v) {
    const double ly = 2.0 * std::cos(M_PI * v / h) - 2.0;
    for (int u = 0; u < w; ++u) {
      const std::size_t i = static_cast<std::size_t>(v) * w + u;
      if (u == 0 && v == 0) {
        freq[i] = 0.0;  // zero-mean gauge
        continue;
      }
      const double lx = 2.0 * std::cos(M_PI * u / w) - 2.0;
      freq[i] /= (lx + ly);
    }
  }

  HeightMap out = make_height_map(w, h, g.ppmm);
  idct2(freq.data(), out.data.data(), w, h);

  // DC is zeroed above; remove residual rounding in the mean as well.
  const double mean = kernels::active().sum_f64(out.data.data(), out.data.size()) /
                      static_cast<double>(out.data.size());
  for (double& v : out.data) v -= mean;
  return out;
}

}  // namespace ic
