#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gkp::specfun {

inline constexpr int kDefaultMaxOrder = 60;

/// L2-normalised Hermite-Gauss function phi_n at a single point, using the
/// normalised three-term recurrence. No order cap.
double hermite_phi(int n, double x);

/// phi_n sampled at every x. Throws CapabilityError when n > max_order.
std::vector<double> hermite_phi(int n, std::span<const double> x,
                                int max_order = kDefaultMaxOrder);

/// Rows phi_0 .. phi_max_order over a fixed set of sample points.
class HermiteTable {
 public:
  HermiteTable(int max_order, std::span<const double> x);

  int max_order() const noexcept { return max_order_; }
  std::size_t points() const noexcept { return points_; }

  /// Throws CapabilityError when n is outside [0, max_order].
  std::span<const double> row(int n) const;

 private:
  int max_order_;
  std::size_t points_;
  std::vector<double> values_;
};

/// exp(-c x^2 / 2), i.e. phi_0^c up to a constant.
std::vector<double> gaussian_power(double c, std::span<const double> x);

/// k_n = sqrt(pi / (2n + 1)).
double comb_wavenumber(int n);

/// Scale that maps the near-origin oscillation of phi_n onto a comb with
/// sqrt(2 pi) spacing: phi_n(kappa_n x) ~ cos(sqrt(pi/2) x - n pi/2).
/// Equals comb_wavenumber(n) / sqrt(2).
double lattice_wavenumber(int n);

}  // namespace gkp::specfun
