#include "rydkerr/curve.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rydkerr/errors.hpp"
#include "text.hpp"

namespace rydkerr {

namespace {

using detail::format_number;

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw DomainError("curve CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void PhaseShiftCurve::validate() const {
  const std::size_t n = intensities.size();
  if (mean_phase.size() != n || std_phase.size() != n || pixel_counts.size() != n)
    throw DomainError("phase-shift curve columns differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(intensities[i]) || !std::isfinite(mean_phase[i]))
      throw DomainError("phase-shift curve contains non-finite values");
    if (intensities[i] < 0.0) throw DomainError("phase-shift curve has a negative intensity");
    if (i > 0 && !(intensities[i] > intensities[i - 1]))
      throw DomainError("phase-shift curve intensities must be strictly increasing");
    if (!(std_phase[i] >= 0.0)) throw DomainError("phase-shift curve has a negative std");
  }
}

void write_curve_csv(std::ostream& out, const PhaseShiftCurve& curve, const Metadata& meta) {
  curve.validate();
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  out << "intensity_mW_mm2,dphi_rad,std_rad,npix\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_number(curve.intensities[i]) << ',' << format_number(curve.mean_phase[i]) << ','
        << format_number(curve.std_phase[i]) << ',' << curve.pixel_counts[i] << '\n';
}

CurveFile read_curve_csv(std::istream& in) {
  CurveFile file;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) file.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line.rfind("intensity_mW_mm2,dphi_rad", 0) != 0)
        throw DomainError("curve CSV lacks the intensity_mW_mm2,dphi_rad,std_rad,npix header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2 || cells.size() > 4)
      throw DomainError("curve CSV line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " columns");
    file.curve.intensities.push_back(parse_number(cells[0], line_no));
    file.curve.mean_phase.push_back(parse_number(cells[1], line_no));
    file.curve.std_phase.push_back(cells.size() > 2 ? parse_number(cells[2], line_no) : 0.0);
    file.curve.pixel_counts.push_back(
        cells.size() > 3 ? static_cast<std::size_t>(parse_number(cells[3], line_no)) : 1);
  }
  if (!header_seen) throw DomainError("curve CSV is empty");
  file.curve.validate();
  return file;
}

CurveFile read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open curve file " + path.string());
  try {
    return read_curve_csv(in);
  } catch (const DomainError& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

const std::string* find_meta(const Metadata& meta, const std::string& key) {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

}  // namespace rydkerr
