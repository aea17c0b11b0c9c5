#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace gkp {

using cplx = std::complex<double>;

/// Uniform grid x_j = -L + j dx, dx = 2L/G, j = 0..G-1. The conjugate grid is
/// p_k = -P + k dp with dp = pi/L and P = pi G / (2L).
struct GridSpec {
  double half_width = 25.0;
  std::size_t points = 4096;

  double dx() const noexcept { return 2.0 * half_width / double(points); }
  double dp() const noexcept;
  double x(std::size_t j) const noexcept { return -half_width + double(j) * dx(); }
  double p(std::size_t k) const noexcept;
  double momentum_extent() const noexcept;

  std::vector<double> positions() const;
  std::vector<double> momenta() const;

  /// G must be a power of two, at least 1024; L must be positive.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

enum class Basis { position, momentum };

/// Samples of a single-mode pure state on a GridSpec. Immutable once built;
/// every operation returns a new value.
class GridWavefunction {
 public:
  GridWavefunction(GridSpec spec, std::vector<cplx> amplitudes, Basis basis = Basis::position);

  const GridSpec& spec() const noexcept { return spec_; }
  Basis basis() const noexcept { return basis_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::size_t size() const noexcept { return amps_.size(); }
  const cplx& operator[](std::size_t j) const noexcept { return amps_[j]; }

  /// Coordinate of sample j in this state's basis.
  double coordinate(std::size_t j) const noexcept;
  /// Quadrature weight (dx or dp).
  double step() const noexcept;

  /// sum |psi|^2 * step
  double norm_squared() const noexcept;

 private:
  GridSpec spec_;
  std::vector<cplx> amps_;
  Basis basis_;
};

struct Normalized {
  GridWavefunction state;
  double norm;  // L2 norm before normalisation
};

/// Throws DegenerateStateError for a zero (or non-finite) state.
Normalized normalize(const GridWavefunction& psi);

/// Build a normalised position-basis state from real samples on grid.
GridWavefunction from_samples(const GridSpec& grid, std::span<const double> samples);

/// psi~(p) = (2 pi)^{-1/2} int psi(x) e^{-ipx} dx, exact on the grid up to the
/// periodic-sampling approximation. Unitary.
GridWavefunction to_momentum(const GridWavefunction& psi);
GridWavefunction to_position(const GridWavefunction& psi);

/// Physical squeeze: position samples become sqrt(s) psi(s x). A momentum-basis
/// state is rescaled with 1/s, so squeeze commutes with the transforms.
/// Throws GridOverflowError when the result loses mass past the grid edge.
GridWavefunction squeeze(const GridWavefunction& psi, double s);

/// Position shift psi(x - x0).
GridWavefunction displace_x(const GridWavefunction& psi, double x0);
/// Momentum kick e^{i p0 x} psi(x).
GridWavefunction displace_p(const GridWavefunction& psi, double p0);

/// <psi|chi> by quadrature. Grids and bases must match (ConfigError).
cplx inner_product(const GridWavefunction& psi, const GridWavefunction& chi);
/// |<psi|chi>|^2 / (<psi|psi><chi|chi>), global phase ignored.
double fidelity(const GridWavefunction& psi, const GridWavefunction& chi);

/// Four-point cubic (Lagrange) interpolation at arbitrary coordinates of the
/// state's basis. Samples beyond the last node are treated as zero.
/// Throws GridOverflowError for points outside [-L, L].
std::vector<cplx> eval_at(const GridWavefunction& psi, std::span<const double> points);

namespace detail {
/// eval_at without the range check; returns 0 outside the grid.
cplx interpolate(std::span<const cplx> samples, double origin, double step, double q) noexcept;
double interpolate(std::span<const double> samples, double origin, double step, double q) noexcept;
}  // namespace detail

/// Fraction of |psi|^2 outside [-fraction L, fraction L].
double tail_mass(const GridWavefunction& psi, double fraction = 0.9);

/// Throws GridOverflowError if tail_mass(psi) exceeds tolerance.
void require_contained(const GridWavefunction& psi, const char* what, double tolerance = 1e-8);

double mean_position(const GridWavefunction& psi);
double mean_momentum(const GridWavefunction& psi);
double second_moment_x(const GridWavefunction& psi);

/// Share of the L2 mass in the imaginary part, with the global phase chosen
/// to make the state as real as possible.
double imaginary_fraction(const GridWavefunction& psi);

/// CSV dump with header "x,re,im" (or "p,re,im" for momentum states).
void write_csv(const GridWavefunction& psi, std::ostream& out);

}  // namespace gkp
