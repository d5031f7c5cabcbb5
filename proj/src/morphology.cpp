#include "ic/morphology.hpp"

#include <cmath>
#include <stdexcept>

#include "ic/kernels/kernels.hpp"

namespace ic {

std::size_t ContactMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

ContactMask make_mask(int width, int height, std::uint8_t fill) {
  if (width < 1 || height < 1) throw std::invalid_argument("mask dims must be positive");
  ContactMask m;
  m.width = width;
  m.height = height;
  m.bits.assign(static_cast<std::size_t>(width) * height, fill);
  return m;
}

std::vector<int> ellipse_halfwidths(int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("structuring element size must be odd and >= 1");
  const int r = k / 2;
  std::vector<int> hw(static_cast<std::size_t>(2 * r + 1));
  for (int dy = -r; dy <= r; ++dy) {
    double w = r == 0 ? 0.0 : std::sqrt(static_cast<double>(r) * r - static_cast<double>(dy) * dy);
    hw[static_cast<std::size_t>(dy + r)] = static_cast<int>(std::floor(w + 0.5));
  }
  return hw;
}

namespace {

ContactMask dilate_once(const ContactMask& m, const std::vector<int>& hw) {
  const auto& k = kernels::active();
  const int r = static_cast<int>(hw.size()) / 2;
  ContactMask out = make_mask(m.width, m.height, 0);
  std::vector<std::uint8_t> tmp(static_cast<std::size_t>(m.width));
  for (int y = 0; y < m.height; ++y) {
    std::uint8_t* orow = out.bits.data() + static_cast<std::size_t>(y) * m.width;
    for (int dy = -r; dy <= r; ++dy) {
      const int sy = y + dy;
      if (sy < 0 || sy >= m.height) continue;
      const std::uint8_t* srow = m.bits.data() + static_cast<std::size_t>(sy) * m.width;
      k.row_dilate_u8(srow, tmp.data(), static_cast<std::size_t>(m.width), hw[static_cast<std::size_t>(dy + r)]);
      k.or_u8(orow, tmp.data(), orow, static_cast<std::size_t>(m.width));
    }
  }
  return out;
}

ContactMask erode_once(const ContactMask& m, const std::vector<int>& hw) {
  const auto& k = kernels::active();
  const int r = static_cast<int>(hw.size()) / 2;
  ContactMask out = make_mask(m.width, m.height, 1);
  std::vector<std::uint8_t> tmp(static_cast<std::size_t>(m.width));
  for (int y = 0; y < m.height; ++y) {
    std::uint8_t* orow = out.bits.data() + static_cast<std::size_t>(y) * m.width;
    for (int dy = -r; dy <= r; ++dy) {
      const int sy = y + dy;
      if (sy < 0 || sy >= m.height) continue;  // off-image kernel rows are clipped
      const std::uint8_t* srow = m.bits.data() + static_cast<std::size_t>(sy) * m.width;
      k.row_erode_u8(srow, tmp.data(), static_cast<std::size_t>(m.width), hw[static_cast<std::size_t>(dy + r)]);
      k.and_u8(orow, tmp.data(), orow, static_cast<std::size_t>(m.width));
    }
  }
  return out;
}

}  // namespace

ContactMask dilate_ellipse(const ContactMask& m, int k, int iterations) {
  const auto hw = ellipse_halfwidths(k);
  ContactMask out = m;
  for (int i = 0; i < iterations; ++i) out = dilate_once(out, hw);
  return out;
}

ContactMask erode_ellipse(const ContactMask& m, int k, int iterations) {
  const auto hw = ellipse_halfwidths(k);
  ContactMask out = m;
  for (int i = 0; i < iterations; ++i) out = erode_once(out, hw);
  return out;
}

ContactMask close_ellipse(const ContactMask& m, int k, int iterations) {
  return erode_ellipse(dilate_ellipse(m, k, iterations), k, iterations);
}

ComponentLabels connected_components(const ContactMask& m) {
  ComponentLabels out;
  out.width = m.width;
  out.height = m.height;
  out.labels.assign(m.bits.size(), 0);
  std::vector<std::size_t> stack;
  std::int32_t next = 0;
  for (std::size_t start = 0; start < m.bits.size(); ++start) {
    if (!m.bits[start] || out.labels[start]) continue;
    ++next;
    std::size_t area = 0;
    stack.push_back(start);
    out.labels[start] = next;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++area;
      const int x = static_cast<int>(i % m.width);
      const int y = static_cast<int>(i / m.width);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (!m.in_bounds(nx, ny)) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * m.width + nx;
          if (m.bits[j] && !out.labels[j]) {
            out.labels[j] = next;
            stack.push_back(j);
          }
        }
      }
    }
    out.areas.push_back(area);
  }
  return out;
}

ContactMask largest_component(const ContactMask& m) {
  const ComponentLabels cc = connected_components(m);
  ContactMask out = make_mask(m.width, m.height, 0);
  if (cc.areas.empty()) return out;
  std::int32_t best = 1;
  for (std::int32_t l = 2; l <= cc.count(); ++l) {
    if (cc.areas[static_cast<std::size_t>(l - 1)] > cc.areas[static_cast<std::size_t>(best - 1)]) best = l;
  }
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = cc.labels[i] == best ? 1 : 0;
  return out;
}

std::vector<PixelCoord> boundary_of_largest(const ContactMask& m) {
  const ContactMask c = largest_component(m);
  std::vector<PixelCoord> pts;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (!c.at(x, y)) continue;
      const bool border = x == 0 || x == c.width - 1 || y == 0 || y == c.height - 1 ||
                          !c.at(x - 1, y) || !c.at(x + 1, y) || !c.at(x, y - 1) || !c.at(x, y + 1);
      if (border) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    }
  }
  return pts;
}

PixelCoord pixel_centroid(const std::vector<PixelCoord>& pts) {
  if (pts.empty()) throw std::invalid_argument("centroid of empty point set");
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += p.x;
    sy += p.y;
  }
  return {sx / pts.size(), sy / pts.size()};
}

}  // namespace ic
