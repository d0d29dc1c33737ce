#include "rydkerr/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "rydkerr/errors.hpp"
#include "rydkerr/units.hpp"

namespace rydkerr {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr int max_iterations = 200;
constexpr double relative_step_tolerance = 1e-10;

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("fit has no parameter '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

// Saturable model in normalised variables x = I / I_max, a = alpha I_max,
// s = I_max / I_sat, so both parameters are O(1) for typical curves.
struct NormalisedProblem {
  std::vector<double> x, y, w;

  double cost(double a, double s) const {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - a * x[i] / (1.0 + s * x[i]);
      c += w[i] * r * r;
    }
    return c;
  }

  void normal_equations(double a, double s, Eigen::Matrix2d& jtj, Eigen::Vector2d& jtr) const {
    jtj.setZero();
    jtr.setZero();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = 1.0 + s * x[i];
      Eigen::Vector2d j(x[i] / d, -a * x[i] * x[i] / (d * d));
      const double r = y[i] - a * x[i] / d;
      jtj += w[i] * j * j.transpose();
      jtr += w[i] * r * j;
    }
  }
};

}  // namespace

double FitResult::param(const std::string& name) const { return params[index_of(names, name)]; }
double FitResult::sigma(const std::string& name) const { return sigmas[index_of(names, name)]; }

double saturable_model(double intensity, double alpha, double isat) {
  if (std::isinf(isat)) return alpha * intensity;
  return alpha * intensity / (1.0 + intensity / isat);
}

FitResult fit_saturable(const PhaseShiftCurve& curve, Weighting weighting) {
  curve.validate();
  const std::size_t m = curve.size();
  if (m < 3) throw InsufficientDataError("saturable fit needs at least 3 bins, got " + std::to_string(m));

  FitResult fit;
  fit.names = {"alpha", "isat"};
  const double imax = curve.intensities.back();

  NormalisedProblem prob;
  prob.x.resize(m);
  prob.y = curve.mean_phase;
  prob.w.assign(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) prob.x[i] = curve.intensities[i] / imax;
  const bool all_positive_std =
      std::all_of(curve.std_phase.begin(), curve.std_phase.end(), [](double s) { return s > 0.0; });
  if (weighting == Weighting::inverse_variance && !all_positive_std)
    throw DomainError("inverse-variance weighting needs a positive std in every bin");
  if (weighting != Weighting::unweighted && all_positive_std)
    for (std::size_t i = 0; i < m; ++i) prob.w[i] = 1.0 / (curve.std_phase[i] * curve.std_phase[i]);

  if (std::all_of(prob.y.begin(), prob.y.end(), [](double v) { return v == 0.0; })) {
    fit.params = {0.0, inf};
    fit.sigmas = {0.0, inf};
    fit.converged = false;
    fit.warnings.push_back("phase curve is identically zero; saturation intensity is unidentifiable");
    return fit;
  }

  // Initial guess: chord slope of the two lowest bins, I_sat where the chord
  // slope phi/I has dropped to half of it.
  double alpha0 = (prob.y[1] - prob.y[0]) / (prob.x[1] - prob.x[0]);
  if (alpha0 == 0.0 || !std::isfinite(alpha0)) alpha0 = prob.y[m - 1] / prob.x[m - 1];
  double x_half = 10.0;
  for (std::size_t i = 1; i < m; ++i) {
    if (prob.x[i] <= 0.0) continue;
    if ((prob.y[i] / prob.x[i]) / alpha0 <= 0.5) {
      x_half = prob.x[i];
      break;
    }
  }
  double a = alpha0;
  double s = 1.0 / x_half;
  double cost = prob.cost(a, s);
  double lambda = 1e-3;

  Eigen::Matrix2d jtj;
  Eigen::Vector2d jtr;
  int it = 0;
  bool converged = false;
  for (; it < max_iterations && !converged; ++it) {
    prob.normal_equations(a, s, jtj, jtr);
    const double floor = 1e-12 * std::max(jtj.trace(), std::numeric_limits<double>::min());
    for (;;) {
      Eigen::Matrix2d damped = jtj;
      for (int k = 0; k < 2; ++k) damped(k, k) += lambda * std::max(jtj(k, k), floor);
      const Eigen::Vector2d step = damped.ldlt().solve(jtr);
      const double a_new = a + step(0);
      const double s_new = std::max(0.0, s + step(1));
      const bool tiny = std::abs(a_new - a) <= relative_step_tolerance * std::max(std::abs(a), 1e-300) &&
                        std::abs(s_new - s) <= relative_step_tolerance * std::max(std::abs(s), 1e-300);
      const double c_new = prob.cost(a_new, s_new);
      if (std::isfinite(c_new) && c_new <= cost) {
        a = a_new;
        s = s_new;
        cost = c_new;
        lambda = std::max(lambda * 0.1, 1e-15);
        converged = tiny;
        break;
      }
      lambda *= 10.0;
      if (tiny || lambda > 1e15) {
        // No downhill step is left at this resolution: the current point is the minimum.
        converged = true;
        break;
      }
    }
  }
  fit.iterations = it;
  fit.converged = converged;
  if (!converged) fit.warnings.push_back("saturable fit did not converge within 200 iterations");

  prob.normal_equations(a, s, jtj, jtr);
  const double dof = static_cast<double>(m - 2);
  Eigen::Vector2d var(inf, inf);
  Eigen::FullPivLU<Eigen::Matrix2d> lu(jtj);
  if (lu.isInvertible()) {
    const Eigen::Matrix2d cov = lu.inverse() * (cost / dof);
    var = Eigen::Vector2d(std::max(cov(0, 0), 0.0), std::max(cov(1, 1), 0.0));
  }
  fit.residual_norm = std::sqrt(cost);
  const double alpha = a / imax;
  const double sigma_alpha = std::sqrt(var(0)) / imax;
  double isat = inf, sigma_isat = inf;
  if (s > 0.0) {
    isat = imax / s;
    sigma_isat = imax * std::sqrt(var(1)) / (s * s);
  } else {
    fit.warnings.push_back("no saturation within the data range; I_sat is unbounded");
  }
  fit.params = {alpha, isat};
  fit.sigmas = {sigma_alpha, sigma_isat};
  if (converged && !std::isfinite(alpha)) throw NumericError("saturable fit produced a non-finite slope");
  return fit;
}

N2Estimate extract_n2(double alpha, double transmission, double length_um, double wavelength_nm) {
  if (!(transmission > 0.0)) throw DomainError("transmission must be positive to define an absorption length");
  if (!(length_um > 0.0)) throw DomainError("crystal length must be positive");
  if (!(wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  if (!std::isfinite(alpha)) throw DomainError("initial slope must be finite");
  N2Estimate est;
  double z0 = transmission < 1.0 ? -length_um / std::log(transmission) : inf;
  if (!(z0 <= length_um)) {
    est.clamped = true;
    est.warnings.push_back("absorption length exceeds the crystal (T=" + std::to_string(transmission) +
                           "); using the crystal length instead");
    z0 = length_um;
  }
  est.z0_um = z0;
  const double k_per_mm = 2.0 * units::pi / (wavelength_nm * 1e-6);
  est.n2 = alpha / (k_per_mm * z0 * 1e-3);
  return est;
}

FitResult fit_powerlaw(const std::vector<int>& ns, const std::vector<double>& isats, double delta) {
  if (ns.size() != isats.size()) throw DomainError("power-law fit needs one I_sat per n");
  if (std::set<int>(ns.begin(), ns.end()).size() < 3)
    throw InsufficientDataError("power-law fit needs at least 3 distinct n");
  const std::size_t m = ns.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(isats[i] > 0.0) || !std::isfinite(isats[i]))
      throw DomainError("power-law fit needs positive finite I_sat (n=" + std::to_string(ns[i]) + ")");
    const double neff = ns[i] - delta;
    if (!(neff > 0.0)) throw DomainError("n - delta must be positive");
    x[i] = std::log(neff);
    y[i] = std::log(isats[i]);
  }
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  const double b = sxy / sxx;
  const double ln_a = ym - b * xm;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (ln_a + b * x[i]);
    sse += r * r;
  }
  const double s2 = m > 2 ? sse / static_cast<double>(m - 2) : 0.0;
  FitResult fit;
  fit.names = {"A", "b"};
  const double amp = std::exp(ln_a);
  fit.params = {amp, b};
  fit.sigmas = {amp * std::sqrt(s2 * (1.0 / static_cast<double>(m) + xm * xm / sxx)), std::sqrt(s2 / sxx)};
  fit.residual_norm = std::sqrt(sse);
  fit.converged = true;
  fit.iterations = 1;
  return fit;
}

std::vector<std::size_t> fwhm_window(const SpectralGrid& grid, const std::vector<double>& absorption, int n,
                                     const ExcitonSeriesConfig& cfg) {
  if (absorption.size() != grid.size()) throw DomainError("absorption spectrum does not match the grid");
  if (n < cfg.n_min || n > cfg.n_max)
    throw DomainError("n=" + std::to_string(n) + " lies outside the configured series");
  const std::string name = "absorption peak of n=" + std::to_string(n);
  const double et = exciton_energy(n, cfg);
  const double lo_e = n > cfg.n_min ? 0.5 * (exciton_energy(n - 1, cfg) + et) : grid[0];
  const double hi_e = n < cfg.n_max ? 0.5 * (exciton_energy(n + 1, cfg) + et) : grid[grid.size() - 1];
  const auto& e = grid.energies();
  const auto first = static_cast<std::size_t>(std::lower_bound(e.begin(), e.end(), lo_e) - e.begin());
  const auto last = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), hi_e) - e.begin());
  if (last <= first + 2) throw DomainError(name + " is not resolvable: too few grid points");
  std::size_t peak = first;
  for (std::size_t i = first; i < last; ++i)
    if (absorption[i] > absorption[peak]) peak = i;
  if (peak == first || peak == last - 1)
    throw DomainError(name + " is not resolvable: no local maximum between its neighbours");
  const double half = 0.5 * absorption[peak];
  if (!(half > 0.0)) throw DomainError(name + " is not resolvable: non-positive absorption");

  std::size_t left = peak;
  while (left > 0 && absorption[left - 1] >= half) {
    if (absorption[left - 1] > absorption[left])
      throw DomainError(name + " is not resolvable: merges with a neighbour above half height");
    --left;
  }
  if (left == 0) throw DomainError(name + " is not resolvable: half height not reached below the peak");
  std::size_t right = peak;
  while (right + 1 < e.size() && absorption[right + 1] >= half) {
    if (absorption[right + 1] > absorption[right])
      throw DomainError(name + " is not resolvable: merges with a neighbour above half height");
    ++right;
  }
  if (right + 1 == e.size()) throw DomainError(name + " is not resolvable: half height not reached above the peak");
  std::vector<std::size_t> window;
  for (std::size_t i = left; i <= right; ++i) window.push_back(i);
  return window;
}

double isat_near_resonance(const SpectralGrid& grid, const std::vector<double>& isat,
                           const std::vector<double>& absorption, int n, const ExcitonSeriesConfig& cfg,
                           const std::vector<double>& isat_sigma) {
  if (isat.size() != grid.size()) throw DomainError("I_sat spectrum does not match the grid");
  const bool weighted = !isat_sigma.empty();
  if (weighted && isat_sigma.size() != grid.size()) throw DomainError("I_sat uncertainties do not match the grid");
  double sum = 0.0, norm = 0.0;
  for (std::size_t i : fwhm_window(grid, absorption, n, cfg)) {
    if (!std::isfinite(isat[i])) continue;
    double w = 1.0;
    if (weighted) {
      const double s = isat_sigma[i];
      if (!(std::isfinite(s) && s > 0.0)) continue;
      w = 1.0 / (s * s);
    }
    sum += w * isat[i];
    norm += w;
  }
  if (norm == 0.0) throw DomainError("no finite I_sat inside the FWHM of n=" + std::to_string(n));
  return sum / norm;
}

std::string fit_report_json(const FitResult& fit) {
  // Non-finite values (unidentifiable parameters) become null.
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["params"] = nlohmann::json::object();
  j["sigmas"] = nlohmann::json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    j["params"][fit.names[i]] = num(fit.params[i]);
    j["sigmas"][fit.names[i]] = num(fit.sigmas[i]);
  }
  j["residual_norm"] = num(fit.residual_norm);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["warnings"] = fit.warnings;
  return j.dump(2) + "\n";
}

}  // namespace rydkerr
