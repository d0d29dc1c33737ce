#pragma once

#include <string>
#include <vector>

#include "rydkerr/config.hpp"
#include "rydkerr/curve.hpp"

namespace rydkerr {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> sigmas;  // standard errors; +inf when unidentifiable
  double residual_norm = 0.0;  // sqrt of the weighted sum of squared residuals
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;

  double param(const std::string& name) const;
  double sigma(const std::string& name) const;
};

enum class Weighting {
  automatic,        // inverse variance when every std is positive, else uniform
  unweighted,
  inverse_variance  // requires every std to be positive
};

/// Least-squares fit of f(I) = alpha I / (1 + I / I_sat); params "alpha", "isat".
FitResult fit_saturable(const PhaseShiftCurve& curve, Weighting weighting = Weighting::automatic);

/// f(I) = alpha I / (1 + I / I_sat).
double saturable_model(double intensity, double alpha, double isat);

struct N2Estimate {
  double n2 = 0.0;    // mm^2/mW
  double z0_um = 0.0;  // effective length after the clamp
  bool clamped = false;
  std::vector<std::string> warnings;
};

/// n2 = alpha / (k z0) with z0 = min(-L / ln T, L) and k = 2 pi / lambda.
/// alpha in rad mm^2/mW, L in um, wavelength in nm.
N2Estimate extract_n2(double alpha, double transmission, double length_um, double wavelength_nm);

/// Linear regression of ln I_sat on ln(n - delta); params "A", "b".
FitResult fit_powerlaw(const std::vector<int>& ns, const std::vector<double>& isats, double delta);

/// Mean of I_sat over the energies inside the FWHM of the nP absorption peak.
/// Non-finite I_sat entries (failed fits) are skipped. With `isat_sigma` the
/// mean is inverse-variance weighted and entries without a finite positive
/// sigma are skipped too.
double isat_near_resonance(const SpectralGrid& grid, const std::vector<double>& isat,
                           const std::vector<double>& absorption, int n,
                           const ExcitonSeriesConfig& cfg,
                           const std::vector<double>& isat_sigma = {});

/// Indices of the energies inside the FWHM of the nP absorption peak.
std::vector<std::size_t> fwhm_window(const SpectralGrid& grid,
                                     const std::vector<double>& absorption, int n,
                                     const ExcitonSeriesConfig& cfg);

/// {"params":{...},"sigmas":{...},"residual_norm":..,"converged":..,"iterations":..,"warnings":[..]}
std::string fit_report_json(const FitResult& fit);

}  // namespace rydkerr
