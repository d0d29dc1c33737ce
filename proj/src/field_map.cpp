#include "rydkerr/field_map.hpp"

#include <png.h>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

#include "rydkerr/errors.hpp"

namespace rydkerr {

static_assert(std::endian::native == std::endian::little, "RKF1 I/O assumes a little-endian host");

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (a.width != b.width || a.height != b.height || a.pixel_pitch != b.pixel_pitch) {
    std::ostringstream msg;
    msg << "grid mismatch in " << what << ": " << a.width << "x" << a.height << " @ "
        << a.pixel_pitch << " um vs " << b.width << "x" << b.height << " @ " << b.pixel_pitch << " um";
    throw SignalProcessingError(msg.str());
  }
}

void write_rkf(std::ostream& out, const ScalarFieldMap& map) {
  char pitch[64];
  std::snprintf(pitch, sizeof pitch, "%.17g", map.pixel_pitch());
  out << "RKF1 " << map.width() << ' ' << map.height() << ' ' << pitch << '\n';
  std::vector<float> buf(map.values.begin(), map.values.end());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw SignalProcessingError("failed to write RKF1 image");
}

void write_rkf(const std::filesystem::path& path, const ScalarFieldMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SignalProcessingError("cannot open " + path.string() + " for writing");
  write_rkf(out, map);
}

ScalarFieldMap read_rkf(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw SignalProcessingError("missing RKF1 header");
  std::istringstream hs(header);
  std::string magic;
  long long w = 0, h = 0;
  double pitch = 0.0;
  if (!(hs >> magic >> w >> h >> pitch) || magic != "RKF1" || w <= 0 || h <= 0 || !(pitch > 0.0))
    throw SignalProcessingError("malformed RKF1 header '" + header + "'");
  GridSpec grid{static_cast<std::size_t>(w), static_cast<std::size_t>(h), pitch};
  std::vector<float> buf(grid.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
    throw SignalProcessingError("truncated RKF1 image data");
  ScalarFieldMap map(grid);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (!std::isfinite(buf[i])) throw SignalProcessingError("RKF1 image contains non-finite values");
    map.values[i] = buf[i];
  }
  return map;
}

ScalarFieldMap read_rkf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SignalProcessingError("cannot open image " + path.string());
  try {
    return read_rkf(in);
  } catch (const SignalProcessingError& e) {
    throw SignalProcessingError(path.string() + ": " + e.what());
  }
}

ScalarFieldMap read_png(const std::filesystem::path& path, double pixel_pitch) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) throw SignalProcessingError("cannot open image " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw SignalProcessingError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw SignalProcessingError("libpng initialisation failed");
  }
  std::vector<std::vector<png_byte>> rows;
  ScalarFieldMap map;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw SignalProcessingError("failed to decode PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw SignalProcessingError("PNG " + path.string() + " is not 8- or 16-bit grayscale");
  }
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  rows.assign(h, std::vector<png_byte>(rowbytes));
  std::vector<png_bytep> ptrs(h);
  for (png_uint_32 y = 0; y < h; ++y) ptrs[y] = rows[y].data();
  png_read_image(png, ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  map = ScalarFieldMap(GridSpec{w, h, pixel_pitch});
  const double full = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < h; ++y)
    for (png_uint_32 x = 0; x < w; ++x) {
      // PNG stores 16-bit samples big-endian.
      const unsigned v = depth == 16 ? (unsigned(rows[y][2 * x]) << 8) | rows[y][2 * x + 1] : rows[y][x];
      map.at(x, y) = v / full;
    }
  return map;
}

ScalarFieldMap read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" ? read_png(path) : read_rkf(path);
}

}  // namespace rydkerr
