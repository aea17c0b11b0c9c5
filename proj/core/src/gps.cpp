#include "gkp/gps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "gkp/error.hpp"
#include "gkp/fft.hpp"
#include "gkp/specfun.hpp"
#include "gkp/targets.hpp"

namespace gkp::gps {

double GpsParams::a() const noexcept { return T * std::exp(-2 * r) + R() * std::exp(2 * r); }

double GpsParams::b() const noexcept {
  return std::sqrt(R() * T) * (std::exp(-2 * r) - std::exp(2 * r));
}

double GpsParams::a_out() const noexcept { return R() * std::exp(-2 * r) + T * std::exp(2 * r); }

double GpsParams::input_db() const noexcept { return 10.0 * std::log10(std::exp(2 * r)); }

double GpsParams::envelope_exponent() const noexcept { return std::exp(-2 * r) / T; }

GpsParams GpsParams::from_db(double db, double T) {
  return {0.5 * std::log(std::pow(10.0, db / 10.0)), T};
}

void GpsParams::validate() const {
  if (!(T > 0 && T < 1)) throw ConfigError("GPS transmittance must lie in (0, 1)");
  if (!(r >= 0) || !std::isfinite(r)) throw ConfigError("GPS squeezing r must be finite and >= 0");
}

namespace {

std::size_t pow2_at_least(double n, std::size_t floor_value) {
  const auto want = static_cast<std::size_t>(std::ceil(std::max(n, 1.0)));
  return std::max(std::bit_ceil(want), floor_value);
}

void check_photon_number(int n) {
  if (n < 0) throw ConfigError("photon number must be non-negative");
  if (n > specfun::kDefaultMaxOrder) {
    throw CapabilityError("photon number " + std::to_string(n) + " above supported max order " +
                          std::to_string(specfun::kDefaultMaxOrder));
  }
}

}  // namespace

GridWavefunction heralded_state_exact(const GpsParams& params, int n, const GridSpec& grid,
                                      ArgumentMap map) {
  params.validate();
  grid.validate();
  check_photon_number(n);
  const double a = params.a();
  const double b = params.b();

  std::vector<double> arg(grid.points);
  double vmax = 0.0;
  for (std::size_t j = 0; j < grid.points; ++j) {
    arg[j] = map.scale * (grid.x(j) - map.shift);
    vmax = std::max(vmax, std::abs(b / a * arg[j]));
  }

  // (phi_0^a * phi_n)(v) on an auxiliary grid wide enough for phi_n, the
  // kernel and every evaluation point; the Gaussian kernel enters through its
  // analytic transform sqrt(2 pi / a) exp(-w^2 / (2a)).
  const double h_target = 0.01;
  const double half = std::max(vmax, std::sqrt(2.0 * n + 1.0) + 10.0) + 10.0 / std::sqrt(a);
  const std::size_t P = pow2_at_least(2.0 * half / h_target, 1024);
  const double h = 2.0 * half / double(P);
  std::vector<double> ys(P);
  for (std::size_t j = 0; j < P; ++j) ys[j] = -half + double(j) * h;
  const auto phin = specfun::hermite_phi(n, ys);
  std::vector<cplx> buf(phin.begin(), phin.end());
  fft::forward(buf, buf);
  const double kernel_norm = std::sqrt(2.0 * std::numbers::pi / a) / double(P);
  for (std::size_t m = 0; m < P; ++m) {
    const double mm = m < P / 2 ? double(m) : double(m) - double(P);
    const double w = 2.0 * std::numbers::pi * mm / (double(P) * h);
    buf[m] *= kernel_norm * std::exp(-0.5 * w * w / a);
  }
  fft::inverse(buf, buf);
  std::vector<double> conv(P);
  for (std::size_t j = 0; j < P; ++j) conv[j] = buf[j].real();

  std::vector<double> amp(grid.points);
  for (std::size_t j = 0; j < grid.points; ++j) {
    const double x = arg[j];
    const double env = std::exp(-0.5 * x * x / a);
    amp[j] = env == 0.0 ? 0.0 : env * detail::interpolate(std::span<const double>(conv), -half, h, b / a * x);
  }
  return from_samples(grid, amp);
}

GridWavefunction heralded_state_approx(const GpsParams& params, int n, const GridSpec& grid,
                                       ArgumentMap map) {
  params.validate();
  grid.validate();
  check_photon_number(n);
  const double k = std::sqrt(params.T / params.R());
  std::vector<double> u(grid.points);
  for (std::size_t j = 0; j < grid.points; ++j) u[j] = k * map.scale * (grid.x(j) - map.shift);
  const auto env = specfun::gaussian_power(params.envelope_exponent(), u);
  const auto osc = specfun::hermite_phi(n, u);
  std::vector<double> amp(grid.points);
  for (std::size_t j = 0; j < grid.points; ++j) amp[j] = env[j] * osc[j];
  return from_samples(grid, amp);
}

bool approx_regime(const GpsParams& params) noexcept { return params.input_db() >= 10.0; }

std::span<const double> ConditionalAmplitudes::row(int n) const {
  if (n < 0 || n > n_cap) throw CapabilityError("conditional amplitude row out of range");
  return {values.data() + std::size_t(n) * x_grid.points, x_grid.points};
}

ConditionalAmplitudes conditional_amplitudes(const GpsParams& params, int n_cap,
                                             std::size_t points) {
  params.validate();
  check_photon_number(n_cap);
  const double a = params.a();
  const double b = params.b();
  const double ap = params.a_out();

  // Heralded-mode marginal has variance a/2; the counted mode sits at b x / a
  // with width 1/sqrt(a), and phi_{n_cap} needs its classical region.
  GridSpec xg{std::max(9.0 * std::sqrt(0.5 * a), 8.0), points};
  xg.validate();
  const double ly = std::max(std::abs(b) / a * xg.half_width + 9.0 / std::sqrt(a),
                             std::sqrt(2.0 * n_cap + 1.0) + 8.0);
  const std::size_t ny = pow2_at_least(2.0 * ly * 8.0 * std::sqrt(a) / std::numbers::pi, points);
  const double dy = 2.0 * ly / double(ny);
  std::vector<double> ys(ny);
  for (std::size_t j = 0; j < ny; ++j) ys[j] = -ly + double(j) * dy;
  const specfun::HermiteTable table(n_cap, ys);

  ConditionalAmplitudes out{xg, n_cap, std::vector<double>(std::size_t(n_cap + 1) * points, 0.0)};
  std::vector<double> kernel(ny);
  const double pref = dy / std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = xg.x(i);
    std::size_t lo = ny, hi = 0;
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = ys[j];
      const double e = -0.5 * (a * y * y - 2.0 * b * x * y + ap * x * x);
      if (e > -700.0) {
        kernel[j] = pref * std::exp(e);
        lo = std::min(lo, j);
        hi = j + 1;
      } else {
        kernel[j] = 0.0;
      }
    }
    if (lo >= hi) continue;
    for (int n = 0; n <= n_cap; ++n) {
      const auto phi = table.row(n);
      double acc = 0.0;
      for (std::size_t j = lo; j < hi; ++j) acc += phi[j] * kernel[j];
      out.values[std::size_t(n) * points + i] = acc;
    }
  }
  return out;
}

double PhotonDistribution::window(int n_min, int n_max) const {
  if (n_min < 0 || n_min > n_max || n_max > n_cap()) {
    throw ConfigError("photon window [" + std::to_string(n_min) + ", " + std::to_string(n_max) +
                      "] invalid for cap " + std::to_string(n_cap()));
  }
  double s = 0.0;
  for (int n = n_min; n <= n_max; ++n) s += p[std::size_t(n)];
  return s;
}

double PhotonDistribution::total() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

PhotonDistribution photon_distribution(const GpsParams& params, int n_cap, std::size_t points) {
  const auto amps = conditional_amplitudes(params, n_cap, points);
  PhotonDistribution dist{std::vector<double>(std::size_t(n_cap + 1))};
  const double dx = amps.x_grid.dx();
  for (int n = 0; n <= n_cap; ++n) {
    double s = 0.0;
    for (double c : amps.row(n)) s += c * c;
    dist.p[std::size_t(n)] = s * dx;
  }
  return dist;
}

double p_ngs(const GpsParams& params, int n_min, int n_max, int n_cap, std::size_t points) {
  if (n_min < 0 || n_min > n_max || n_max > n_cap) {
    throw ConfigError("p_ngs: need 0 <= n_min <= n_max <= n_cap");
  }
  return photon_distribution(params, n_max, points).window(n_min, n_max);
}

double envelope_transmittance(double c, int multiplicity, double input_db) {
  const double T = double(multiplicity) * std::pow(10.0, -input_db / 10.0) / c;
  if (!(T > 0 && T < 1)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "envelope rule gives T = %.4g outside (0, 1) at %.2f dB", T,
                  input_db);
    throw ConfigError(buf);
  }
  return T;
}

SolveResult solve_params(double c, int multiplicity, int n_min, int n_max, int n_cap,
                         std::size_t points) {
  if (!(c > 0)) throw ConfigError("solve_params: c must be positive");
  if (multiplicity < 1) throw ConfigError("solve_params: N must be >= 1");
  if (n_min < 0 || n_min > n_max || n_max > n_cap) {
    throw ConfigError("solve_params: need 0 <= n_min <= n_max <= n_cap");
  }
  check_photon_number(n_cap);
  // T < 1 needs e^{2r} > N / c.
  const double db_lo = std::max(10.0 * std::log10(double(multiplicity) / c), 0.0) + 0.05;
  const double db_hi = 26.0;
  if (db_lo >= db_hi) throw ConfigError("solve_params: envelope constraint infeasible");

  SolveResult best{};
  int evals = 0;
  auto objective = [&](double db) {
    ++evals;
    const GpsParams p{0.5 * std::log(std::pow(10.0, db / 10.0)),
                      envelope_transmittance(c, multiplicity, db)};
    return photon_distribution(p, n_max, points).window(n_min, n_max);
  };

  double best_db = db_lo, best_val = -1.0;
  const double step = 0.5;
  for (double db = db_lo; db <= db_hi + 1e-9; db += step) {
    const double v = objective(db);
    if (v > best_val) {
      best_val = v;
      best_db = db;
    }
  }
  double lo = std::max(db_lo, best_db - step), hi = std::min(db_hi, best_db + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-3) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double db = 0.5 * (lo + hi);
  best.params = {0.5 * std::log(std::pow(10.0, db / 10.0)),
                 envelope_transmittance(c, multiplicity, db)};
  best.p_ngs = objective(db);
  best.evaluations = evals;
  return best;
}

double adaptive_scale(const GpsParams& params, int n, int multiplicity) {
  return specfun::lattice_wavenumber(n) * std::sqrt(double(multiplicity)) /
         std::sqrt(params.T / params.R());
}

double parity_shift(int n, int multiplicity) {
  return n % 2 == 0 ? 0.0 : kHalfPiSqrt / std::sqrt(double(multiplicity));
}

GridWavefunction adaptive_breeding_input(const GpsParams& params, int n, int multiplicity,
                                         const GridSpec& grid) {
  if (multiplicity < 1) throw ConfigError("adaptive_breeding_input: N must be >= 1");
  const ArgumentMap map{adaptive_scale(params, n, multiplicity), parity_shift(n, multiplicity)};
  auto psi = heralded_state_exact(params, n, grid, map);
  require_contained(psi, "adaptive breeding input");
  return psi;
}

void write_distribution_csv(const PhotonDistribution& dist, int n_min, int n_max,
                            std::ostream& out) {
  out << "n,P(n),cumulative,accepted\n";
  double cum = 0.0;
  char line[128];
  for (int n = 0; n <= dist.n_cap(); ++n) {
    const double p = dist.p[std::size_t(n)];
    cum += p;
    std::snprintf(line, sizeof line, "%d,%.12e,%.12e,%s\n", n, p, cum,
                  (n >= n_min && n <= n_max) ? "true" : "false");
    out << line;
  }
}

}  // namespace gkp::gps
