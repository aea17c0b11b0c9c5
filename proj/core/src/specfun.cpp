#include "gkp/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gkp/error.hpp"

namespace gkp::specfun {

namespace {

void check_order(int n, int max_order) {
  if (n < 0) throw ConfigError("hermite order must be non-negative, got " + std::to_string(n));
  if (n > max_order) {
    throw CapabilityError("hermite order " + std::to_string(n) + " exceeds table max_order " +
                          std::to_string(max_order));
  }
}

}  // namespace

double hermite_phi(int n, double x) {
  if (n < 0) throw ConfigError("hermite order must be non-negative");
  const double quarter_pi = std::pow(std::numbers::pi, -0.25);
  double prev = quarter_pi * std::exp(-0.5 * x * x);
  if (n == 0) return prev;
  double cur = std::numbers::sqrt2 * x * prev;
  for (int k = 1; k < n; ++k) {
    const double next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_phi(int n, std::span<const double> x, int max_order) {
  check_order(n, max_order);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = hermite_phi(n, x[i]);
  return out;
}

HermiteTable::HermiteTable(int max_order, std::span<const double> x)
    : max_order_(max_order), points_(x.size()), values_((max_order + 1) * x.size()) {
  if (max_order < 0) throw ConfigError("max_order must be non-negative");
  const double quarter_pi = std::pow(std::numbers::pi, -0.25);
  double* row0 = values_.data();
  for (std::size_t j = 0; j < points_; ++j) row0[j] = quarter_pi * std::exp(-0.5 * x[j] * x[j]);
  if (max_order == 0) return;
  double* row1 = row0 + points_;
  for (std::size_t j = 0; j < points_; ++j) row1[j] = std::numbers::sqrt2 * x[j] * row0[j];
  for (int k = 1; k < max_order; ++k) {
    const double up = std::sqrt(2.0 / (k + 1));
    const double down = std::sqrt(double(k) / (k + 1));
    const double* prev = values_.data() + (k - 1) * points_;
    const double* cur = prev + points_;
    double* next = values_.data() + (k + 1) * points_;
    for (std::size_t j = 0; j < points_; ++j) next[j] = x[j] * up * cur[j] - down * prev[j];
  }
}

std::span<const double> HermiteTable::row(int n) const {
  check_order(n, max_order_);
  return {values_.data() + std::size_t(n) * points_, points_};
}

std::vector<double> gaussian_power(double c, std::span<const double> x) {
  if (!(c > 0)) throw ConfigError("gaussian_power exponent must be positive");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(-0.5 * c * x[i] * x[i]);
  return out;
}

double comb_wavenumber(int n) {
  if (n < 0) throw ConfigError("photon number must be non-negative");
  return std::sqrt(std::numbers::pi / (2.0 * n + 1.0));
}

double lattice_wavenumber(int n) { return comb_wavenumber(n) / std::numbers::sqrt2; }

}  // namespace gkp::specfun
