#include "gkp/wavefield.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "gkp/error.hpp"
#include "gkp/fft.hpp"

namespace gkp {

double GridSpec::dp() const noexcept { return std::numbers::pi / half_width; }

double GridSpec::p(std::size_t k) const noexcept {
  return (double(k) - double(points / 2)) * dp();
}

double GridSpec::momentum_extent() const noexcept {
  return std::numbers::pi * double(points) / (2.0 * half_width);
}

std::vector<double> GridSpec::positions() const {
  std::vector<double> out(points);
  for (std::size_t j = 0; j < points; ++j) out[j] = x(j);
  return out;
}

std::vector<double> GridSpec::momenta() const {
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k) out[k] = p(k);
  return out;
}

void GridSpec::validate() const {
  if (!(half_width > 0) || !std::isfinite(half_width)) {
    throw ConfigError("grid half_width must be positive");
  }
  if (points < 1024 || !std::has_single_bit(points)) {
    throw ConfigError("grid points must be a power of two >= 1024, got " + std::to_string(points));
  }
}

GridWavefunction::GridWavefunction(GridSpec spec, std::vector<cplx> amplitudes, Basis basis)
    : spec_(spec), amps_(std::move(amplitudes)), basis_(basis) {
  if (amps_.size() != spec_.points) {
    throw ConfigError("amplitude count " + std::to_string(amps_.size()) +
                      " does not match grid points " + std::to_string(spec_.points));
  }
}

double GridWavefunction::coordinate(std::size_t j) const noexcept {
  return basis_ == Basis::position ? spec_.x(j) : spec_.p(j);
}

double GridWavefunction::step() const noexcept {
  return basis_ == Basis::position ? spec_.dx() : spec_.dp();
}

double GridWavefunction::norm_squared() const noexcept {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s * step();
}

Normalized normalize(const GridWavefunction& psi) {
  const double n2 = psi.norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DegenerateStateError("cannot normalise a zero or non-finite state");
  }
  const double norm = std::sqrt(n2);
  std::vector<cplx> amps(psi.amplitudes().begin(), psi.amplitudes().end());
  for (auto& a : amps) a /= norm;
  return {GridWavefunction(psi.spec(), std::move(amps), psi.basis()), norm};
}

GridWavefunction from_samples(const GridSpec& grid, std::span<const double> samples) {
  std::vector<cplx> amps(samples.begin(), samples.end());
  return normalize(GridWavefunction(grid, std::move(amps))).state;
}

namespace {

// With x_j = (j - G/2) dx and p_k = (k - G/2) dp, the kernel exp(-i p_k x_j)
// factors into (-1)^{j+k} times the plain DFT kernel (G divisible by 4).
GridWavefunction transform(const GridWavefunction& psi, Basis target) {
  const auto& spec = psi.spec();
  const std::size_t n = spec.points;
  std::vector<cplx> buf(psi.amplitudes().begin(), psi.amplitudes().end());
  for (std::size_t j = 1; j < n; j += 2) buf[j] = -buf[j];
  if (target == Basis::momentum) {
    fft::forward(buf, buf);
  } else {
    fft::inverse(buf, buf);
  }
  const double scale = psi.step() / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) buf[k] *= (k % 2 == 0 ? scale : -scale);
  return GridWavefunction(spec, std::move(buf), target);
}

double lost_fraction(double before, double after) {
  return before > 0 ? (before - after) / before : 0.0;
}

}  // namespace

GridWavefunction to_momentum(const GridWavefunction& psi) {
  if (psi.basis() != Basis::position) throw ConfigError("to_momentum expects a position-basis state");
  return transform(psi, Basis::momentum);
}

GridWavefunction to_position(const GridWavefunction& psi) {
  if (psi.basis() != Basis::momentum) throw ConfigError("to_position expects a momentum-basis state");
  return transform(psi, Basis::position);
}

namespace detail {

namespace {
template <class T>
T lagrange4(std::span<const T> s, double origin, double step, double q) noexcept {
  const double t = (q - origin) / step;
  const double fl = std::floor(t);
  const auto i = static_cast<long long>(fl);
  const double f = t - fl;
  const long long n = static_cast<long long>(s.size());
  const double w[4] = {
      -f * (f - 1.0) * (f - 2.0) / 6.0,
      (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
      -(f + 1.0) * f * (f - 2.0) / 2.0,
      (f + 1.0) * f * (f - 1.0) / 6.0,
  };
  T acc{};
  for (int k = 0; k < 4; ++k) {
    const long long idx = i - 1 + k;
    if (idx >= 0 && idx < n) acc += w[k] * s[std::size_t(idx)];
  }
  return acc;
}
}  // namespace

cplx interpolate(std::span<const cplx> samples, double origin, double step, double q) noexcept {
  return lagrange4(samples, origin, step, q);
}

double interpolate(std::span<const double> samples, double origin, double step, double q) noexcept {
  return lagrange4(samples, origin, step, q);
}

}  // namespace detail

namespace {

double origin_of(const GridWavefunction& psi) { return psi.coordinate(0); }

double extent_of(const GridWavefunction& psi) {
  return psi.basis() == Basis::position ? psi.spec().half_width : psi.spec().momentum_extent();
}

// Resample psi at coordinate map q -> scale * (q - shift), weighted by amp.
GridWavefunction resample(const GridWavefunction& psi, double scale, double shift, double amp,
                          const char* op) {
  const std::size_t n = psi.size();
  const double origin = origin_of(psi);
  const double step = psi.step();
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double q = scale * (psi.coordinate(j) - shift);
    out[j] = amp * detail::interpolate(psi.amplitudes(), origin, step, q);
  }
  GridWavefunction result(psi.spec(), std::move(out), psi.basis());
  const double before = psi.norm_squared();
  const double after = result.norm_squared();
  // Source samples whose image lands off the grid are lost.
  const double extent = extent_of(psi);
  const double src_lo = scale * (-extent - shift), src_hi = scale * (extent - shift);
  double outside = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double q = psi.coordinate(j);
    if (q < std::min(src_lo, src_hi) || q > std::max(src_lo, src_hi)) outside += std::norm(psi[j]);
  }
  outside *= step;
  if (lost_fraction(before, before - outside) > 1e-8) {
    throw GridOverflowError(std::string(op) + ": state support exceeds the grid");
  }
  // Interpolation jitter is O(h^4); pin the norm to the input's exactly.
  if (after > 0) {
    const double fix = std::sqrt(before / after);
    std::vector<cplx> amps(result.amplitudes().begin(), result.amplitudes().end());
    for (auto& a : amps) a *= fix;
    return GridWavefunction(psi.spec(), std::move(amps), psi.basis());
  }
  return result;
}

GridWavefunction multiply_phase(const GridWavefunction& psi, double k) {
  std::vector<cplx> out(psi.amplitudes().begin(), psi.amplitudes().end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= std::polar(1.0, k * psi.coordinate(j));
  return GridWavefunction(psi.spec(), std::move(out), psi.basis());
}

}  // namespace

GridWavefunction squeeze(const GridWavefunction& psi, double s) {
  if (!(s > 0) || !std::isfinite(s)) throw ConfigError("squeeze factor must be positive");
  if (s == 1.0) return psi;
  // The momentum grid is coarse (dp = pi/L); resample on the fine side instead.
  if (psi.basis() == Basis::momentum) return to_momentum(squeeze(to_position(psi), s));
  return resample(psi, s, 0.0, std::sqrt(s), "squeeze");
}

GridWavefunction displace_x(const GridWavefunction& psi, double x0) {
  if (x0 == 0.0) return psi;
  if (psi.basis() == Basis::momentum) return multiply_phase(psi, -x0);
  return resample(psi, 1.0, x0, 1.0, "displace_x");
}

GridWavefunction displace_p(const GridWavefunction& psi, double p0) {
  if (p0 == 0.0) return psi;
  if (psi.basis() == Basis::position) return multiply_phase(psi, p0);
  return to_momentum(multiply_phase(to_position(psi), p0));
}

cplx inner_product(const GridWavefunction& psi, const GridWavefunction& chi) {
  if (!(psi.spec() == chi.spec())) throw ConfigError("inner_product: grids differ");
  if (psi.basis() != chi.basis()) throw ConfigError("inner_product: bases differ");
  cplx acc{};
  for (std::size_t j = 0; j < psi.size(); ++j) acc += std::conj(psi[j]) * chi[j];
  return acc * psi.step();
}

double fidelity(const GridWavefunction& psi, const GridWavefunction& chi) {
  const double denom = psi.norm_squared() * chi.norm_squared();
  if (!(denom > 0)) throw DegenerateStateError("fidelity of a zero state");
  return std::clamp(std::norm(inner_product(psi, chi)) / denom, 0.0, 1.0);
}

std::vector<cplx> eval_at(const GridWavefunction& psi, std::span<const double> points) {
  const double extent = extent_of(psi);
  const double origin = origin_of(psi);
  std::vector<cplx> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double q = points[i];
    if (!(q >= -extent && q <= extent)) {
      throw GridOverflowError("eval_at: point " + std::to_string(q) + " outside the grid");
    }
    out[i] = detail::interpolate(psi.amplitudes(), origin, psi.step(), q);
  }
  return out;
}

double tail_mass(const GridWavefunction& psi, double fraction) {
  const double edge = fraction * extent_of(psi);
  double inside = 0.0, total = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double w = std::norm(psi[j]);
    total += w;
    if (std::abs(psi.coordinate(j)) <= edge) inside += w;
  }
  return total > 0 ? (total - inside) / total : 0.0;
}

void require_contained(const GridWavefunction& psi, const char* what, double tolerance) {
  const double tail = tail_mass(psi);
  if (tail > tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: tail mass %.3g outside 0.9 L exceeds %.1g", what, tail,
                  tolerance);
    throw GridOverflowError(buf);
  }
}

namespace {
double weighted_mean(const GridWavefunction& psi, int power) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double w = std::norm(psi[j]);
    num += w * std::pow(psi.coordinate(j), power);
    den += w;
  }
  return num / den;
}
}  // namespace

double mean_position(const GridWavefunction& psi) {
  return psi.basis() == Basis::position ? weighted_mean(psi, 1) : weighted_mean(to_position(psi), 1);
}

double mean_momentum(const GridWavefunction& psi) {
  return psi.basis() == Basis::momentum ? weighted_mean(psi, 1) : weighted_mean(to_momentum(psi), 1);
}

double second_moment_x(const GridWavefunction& psi) {
  return psi.basis() == Basis::position ? weighted_mean(psi, 2) : weighted_mean(to_position(psi), 2);
}

double imaginary_fraction(const GridWavefunction& psi) {
  cplx sq{};
  double total = 0.0;
  for (const auto& a : psi.amplitudes()) {
    sq += a * a;
    total += std::norm(a);
  }
  if (!(total > 0)) throw DegenerateStateError("imaginary_fraction of a zero state");
  return std::max(0.0, 0.5 * (1.0 - std::abs(sq) / total));
}

void write_csv(const GridWavefunction& psi, std::ostream& out) {
  out << (psi.basis() == Basis::position ? "x" : "p") << ",re,im\n";
  char line[96];
  for (std::size_t j = 0; j < psi.size(); ++j) {
    std::snprintf(line, sizeof line, "%.10g,%.12g,%.12g\n", psi.coordinate(j), psi[j].real(),
                  psi[j].imag());
    out << line;
  }
}

}  // namespace gkp
