#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rydkerr::detail {

/// In-place 2-D DFT of a row-major width x height buffer. The inverse is
/// normalised by 1/(width*height).
void fft2d(std::vector<std::complex<double>>& data, std::size_t width, std::size_t height,
           bool inverse);

}  // namespace rydkerr::detail
