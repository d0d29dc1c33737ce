#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace rydkerr {

/// Pixel grid shared by camera images and beam fields.
struct GridSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  double pixel_pitch = 2.5;  // um

  std::size_t size() const { return width * height; }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

template <typename T>
struct FieldMap {
  GridSpec grid;
  std::vector<T> values;  // row-major, values[y * width + x]

  FieldMap() = default;
  explicit FieldMap(GridSpec g, T fill = T{}) : grid(g), values(g.size(), fill) {}

  std::size_t width() const { return grid.width; }
  std::size_t height() const { return grid.height; }
  double pixel_pitch() const { return grid.pixel_pitch; }
  T& at(std::size_t x, std::size_t y) { return values[y * grid.width + x]; }
  const T& at(std::size_t x, std::size_t y) const { return values[y * grid.width + x]; }
};

using ScalarFieldMap = FieldMap<double>;
using ComplexFieldMap = FieldMap<std::complex<double>>;

/// Throws SignalProcessingError unless both maps share width, height and pitch.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

/// Raw little-endian float32 image behind the header "RKF1 <w> <h> <pitch_um>\n".
void write_rkf(std::ostream& out, const ScalarFieldMap& map);
void write_rkf(const std::filesystem::path& path, const ScalarFieldMap& map);
ScalarFieldMap read_rkf(std::istream& in);
ScalarFieldMap read_rkf(const std::filesystem::path& path);

/// 8- or 16-bit grayscale PNG mapped to [0, 1].
ScalarFieldMap read_png(const std::filesystem::path& path, double pixel_pitch = 2.5);

/// Dispatches on the extension: .png or RKF1 otherwise.
ScalarFieldMap read_image(const std::filesystem::path& path);

}  // namespace rydkerr
