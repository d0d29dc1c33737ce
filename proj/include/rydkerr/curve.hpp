#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rydkerr {

/// Binned phase shift versus intensity.
struct PhaseShiftCurve {
  std::vector<double> intensities;  // mW/mm^2, ascending
  std::vector<double> mean_phase;   // rad
  std::vector<double> std_phase;    // rad
  std::vector<std::size_t> pixel_counts;

  std::size_t size() const { return intensities.size(); }
  /// Throws DomainError on mismatched lengths, unsorted intensities or negative std.
  void validate() const;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// intensity_mW_mm2,dphi_rad,std_rad,npix preceded by one "# key=value" line per entry.
void write_curve_csv(std::ostream& out, const PhaseShiftCurve& curve, const Metadata& meta = {});

struct CurveFile {
  PhaseShiftCurve curve;
  Metadata meta;
};

CurveFile read_curve_csv(std::istream& in);
CurveFile read_curve_csv(const std::filesystem::path& path);

/// Value of `key` in `meta`, or nullptr.
const std::string* find_meta(const Metadata& meta, const std::string& key);

}  // namespace rydkerr
