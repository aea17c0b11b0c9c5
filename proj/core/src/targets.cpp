#include "gkp/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gkp/error.hpp"
#include "gkp/specfun.hpp"

namespace gkp {

double to_db(double delta) { return -20.0 * std::log10(delta); }
double from_db(double db) { return std::pow(10.0, -db / 20.0); }

double EffectiveSqueezing::min_db() const { return std::min(db_x(), db_p()); }

CombCharacteristic comb_characteristic(const GridWavefunction& psi) {
  if (psi.basis() != Basis::position) {
    throw ConfigError("comb_characteristic expects a position-basis state");
  }
  const double total = psi.norm_squared();
  cplx cx{};
  for (std::size_t j = 0; j < psi.size(); ++j) {
    cx += std::norm(psi[j]) * std::polar(1.0, kTwoPiSqrt * psi.coordinate(j));
  }
  cx *= psi.spec().dx() / total;

  const auto mom = to_momentum(psi);
  cplx cp{};
  for (std::size_t k = 0; k < mom.size(); ++k) {
    cp += std::norm(mom[k]) * std::polar(1.0, -kTwoPiSqrt * mom.coordinate(k));
  }
  cp *= mom.spec().dp() / total;
  return {cx, cp};
}

double delta_from_characteristic(cplx c) {
  const double mag = std::abs(c);
  if (!(mag >= 1e-12)) {
    throw MetricUndefinedError("comb overlap below 1e-12; effective squeezing undefined");
  }
  const double v = -std::log(mag * mag) / std::numbers::pi;
  return std::sqrt(std::max(v, 0.0));
}

EffectiveSqueezing effective_squeezing(const GridWavefunction& psi) {
  const auto c = comb_characteristic(psi);
  return {delta_from_characteristic(c.cx), delta_from_characteristic(c.cp)};
}

void SensorParams::validate() const {
  if (!(delta_x > 0 && delta_x < 1) || !(delta_p > 0 && delta_p < 1)) {
    throw ConfigError("sensor widths must lie in (0, 1)");
  }
  if (parity != 0 && parity != 1) throw ConfigError("sensor parity must be 0 or 1");
}

GridWavefunction sensor_state(const SensorParams& params, const GridSpec& grid) {
  params.validate();
  grid.validate();
  if (1.0 / params.delta_p >= 0.3 * grid.half_width) {
    throw GridOverflowError("sensor envelope 1/Delta_p does not fit in 0.3 L");
  }
  const double offset = 0.5 * params.parity;
  // weight exp(-pi Delta_p^2 (s+t/2)^2) < 1e-12  <=>  |s + t/2| > smax
  const double smax =
      std::sqrt(-std::log(1e-12) / (std::numbers::pi * params.delta_p * params.delta_p));
  const auto xs = grid.positions();
  std::vector<double> amp(xs.size(), 0.0);
  const double inv2dx2 = 0.5 / (params.delta_x * params.delta_x);
  for (long s = -long(std::ceil(smax)) - 1; s <= long(std::ceil(smax)) + 1; ++s) {
    const double site = double(s) + offset;
    if (std::abs(site) > smax) continue;
    const double centre = site * kTwoPiSqrt;
    const double weight =
        std::exp(-0.5 * params.delta_p * params.delta_p * centre * centre);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double d = xs[j] - centre;
      const double e = d * d * inv2dx2;
      if (e < 700) amp[j] += weight * std::exp(-e);
    }
  }
  return from_samples(grid, amp);
}

GridWavefunction chi_target(double c, int n, int multiplicity, const GridSpec& grid) {
  if (!(c > 0)) throw ConfigError("chi_target: c must be positive");
  if (n < 1 || multiplicity < 1) throw ConfigError("chi_target: need n >= 1 and N >= 1");
  grid.validate();
  const double kappa = specfun::lattice_wavenumber(n);
  auto xs = grid.positions();
  for (auto& x : xs) x *= kappa;
  const auto envelope = specfun::gaussian_power(c, xs);
  const auto osc = specfun::hermite_phi(n, xs);
  std::vector<double> amp(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    amp[j] = envelope[j] * std::pow(osc[j], multiplicity);
  }
  return from_samples(grid, amp);
}

double phase_reference_offset(int multiplicity) {
  if (multiplicity < 1) throw ConfigError("multiplicity must be >= 1");
  return kHalfPiSqrt * double(multiplicity % 2);
}

PhaseReference align_phase_reference(const GridWavefunction& psi, int multiplicity,
                                     const GridWavefunction& target) {
  const double off = phase_reference_offset(multiplicity);
  const double f_plus = fidelity(displace_p(psi, off), target);
  if (off == 0.0) return {0.0, f_plus};
  const double f_minus = fidelity(displace_p(psi, -off), target);
  return f_plus >= f_minus ? PhaseReference{off, f_plus} : PhaseReference{-off, f_minus};
}

}  // namespace gkp
