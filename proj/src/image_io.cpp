#include "ic/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "ic/errors.hpp"

namespace ic {
namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  put_u32(os, u);
}

float get_f32(std::istream& is) {
  const std::uint32_t u = get_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

void write_payload(std::ostream& os, const std::vector<double>& data) {
  std::vector<float> buf(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) buf[i] = static_cast<float>(data[i]);
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_payload(std::istream& is, std::vector<double>& data, std::size_t n) {
  std::vector<float> buf(n);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw DataError("truncated payload");
  data.resize(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = buf[i];
}

struct Header {
  char magic[5] = {0};
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  float ppmm = 0.0f;
};

Header read_header(std::istream& is, const char* expected, const std::string& path) {
  Header h;
  is.read(h.magic, 4);
  h.width = get_u32(is);
  h.height = get_u32(is);
  h.ppmm = get_f32(is);
  if (!is || std::strncmp(h.magic, expected, 4) != 0)
    throw DataError(path + ": not a " + expected + " file");
  if (h.width == 0 || h.height == 0 || !(h.ppmm > 0.0f))
    throw DataError(path + ": invalid header");
  return h;
}

}  // namespace

void save_height_map(const HeightMap& hm, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.write("ICHM", 4);
  put_u32(os, static_cast<std::uint32_t>(hm.width));
  put_u32(os, static_cast<std::uint32_t>(hm.height));
  put_f32(os, static_cast<float>(hm.ppmm));
  write_payload(os, hm.data);
  if (!os) throw DataError("write failed: " + path);
}

HeightMap load_height_map(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  const Header h = read_header(is, "ICHM", path);
  HeightMap hm;
  hm.width = static_cast<int>(h.width);
  hm.height = static_cast<int>(h.height);
  hm.ppmm = h.ppmm;
  read_payload(is, hm.data, static_cast<std::size_t>(h.width) * h.height);
  return hm;
}

void save_gradient_field(const GradientField& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.write("ICGF", 4);
  put_u32(os, static_cast<std::uint32_t>(g.width));
  put_u32(os, static_cast<std::uint32_t>(g.height));
  put_f32(os, static_cast<float>(g.ppmm));
  write_payload(os, g.gx);
  write_payload(os, g.gy);
  if (!os) throw DataError("write failed: " + path);
}

GradientField load_gradient_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  const Header h = read_header(is, "ICGF", path);
  GradientField g;
  g.width = static_cast<int>(h.width);
  g.height = static_cast<int>(h.height);
  g.ppmm = h.ppmm;
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  read_payload(is, g.gx, n);
  read_payload(is, g.gy, n);
  return g;
}

namespace {

struct PngWriter {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReader {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_gray_png(const std::string& path, int width, int height, int bit_depth,
                    const std::vector<png_bytep>& rows) {
  PngWriter w;
  w.fp = std::fopen(path.c_str(), "wb");
  if (!w.fp) throw DataError("cannot open " + path + " for writing");
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw DataError("png_create_write_struct failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw DataError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(w.png))) throw DataError("png write error: " + path);
  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (bit_depth == 16) png_set_swap(w.png);  // stored little-endian in memory
  png_write_image(w.png, const_cast<png_bytepp>(rows.data()));
  png_write_end(w.png, nullptr);
}

void read_gray_png(const std::string& path, int expected_depth, int& width, int& height,
                   std::vector<std::uint8_t>& bytes, std::size_t& stride) {
  PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw DataError("cannot open " + path);
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("png_create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) throw DataError("png read error: " + path);
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  width = static_cast<int>(png_get_image_width(r.png, r.info));
  height = static_cast<int>(png_get_image_height(r.png, r.info));
  const int depth = png_get_bit_depth(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != expected_depth)
    throw DataError(path + ": expected " + std::to_string(expected_depth) + "-bit grayscale PNG");
  if (depth == 16) png_set_swap(r.png);
  if (depth < 8) png_set_packing(r.png);  // unpack to one byte per pixel
  png_read_update_info(r.png, r.info);
  stride = png_get_rowbytes(r.png, r.info);
  bytes.assign(stride * static_cast<std::size_t>(height), 0);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = bytes.data() + stride * y;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
}

}  // namespace

void save_height_map_png16(const HeightMap& hm, const std::string& path) {
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : hm.data) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (!(vmax > vmin)) vmax = vmin + 1.0;
  const double scale = 65535.0 / (vmax - vmin);
  std::vector<std::uint16_t> pix(hm.data.size());
  for (std::size_t i = 0; i < hm.data.size(); ++i) {
    pix[i] = static_cast<std::uint16_t>(std::lround((hm.data[i] - vmin) * scale));
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(hm.height));
  for (int y = 0; y < hm.height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        reinterpret_cast<png_bytep>(pix.data() + static_cast<std::size_t>(y) * hm.width);
  }
  write_gray_png(path, hm.width, hm.height, 16, rows);

  std::ofstream side(path + ".scale");
  if (!side) throw DataError("cannot write sidecar for " + path);
  side.precision(17);
  side << "ppmm = " << hm.ppmm << "\n";
  side << "vmin = " << vmin << "\n";
  side << "vmax = " << vmax << "\n";
}

HeightMap load_height_map_png16(const std::string& path) {
  std::ifstream side(path + ".scale");
  if (!side) throw DataError("missing sidecar " + path + ".scale");
  double ppmm = 0.0, vmin = 0.0, vmax = 0.0;
  std::string line;
  while (std::getline(side, line)) {
    std::istringstream ss(line);
    std::string key, eq;
    double val;
    if (ss >> key >> eq >> val) {
      if (key == "ppmm") ppmm = val;
      else if (key == "vmin") vmin = val;
      else if (key == "vmax") vmax = val;
    }
  }
  if (!(ppmm > 0.0)) throw DataError("sidecar missing ppmm: " + path);

  int w = 0, h = 0;
  std::size_t stride = 0;
  std::vector<std::uint8_t> bytes;
  read_gray_png(path, 16, w, h, bytes, stride);
  HeightMap hm = make_height_map(w, h, ppmm);
  const double scale = (vmax - vmin) / 65535.0;
  for (int y = 0; y < h; ++y) {
    const std::uint16_t* row = reinterpret_cast<const std::uint16_t*>(bytes.data() + stride * y);
    for (int x = 0; x < w; ++x) hm.at(x, y) = vmin + row[x] * scale;
  }
  return hm;
}

void save_mask_png(const ContactMask& m, const std::string& path) {
  const std::size_t stride = (static_cast<std::size_t>(m.width) + 7) / 8;
  std::vector<std::uint8_t> packed(stride * static_cast<std::size_t>(m.height), 0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.at(x, y)) packed[stride * y + static_cast<std::size_t>(x) / 8] |= 0x80u >> (x % 8);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(m.height));
  for (int y = 0; y < m.height; ++y) rows[static_cast<std::size_t>(y)] = packed.data() + stride * y;
  write_gray_png(path, m.width, m.height, 1, rows);
}

ContactMask load_mask_png(const std::string& path) {
  int w = 0, h = 0;
  std::size_t stride = 0;
  std::vector<std::uint8_t> bytes;
  read_gray_png(path, 1, w, h, bytes, stride);
  ContactMask m = make_mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      m.at(x, y) = bytes[stride * y + static_cast<std::size_t>(x)] ? 1 : 0;
    }
  }
  return m;
}

}  // namespace ic
