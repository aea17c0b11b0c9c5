#pragma once

#include <iosfwd>
#include <vector>

#include "gkp/wavefield.hpp"

namespace gkp::gps {

inline constexpr int kDefaultPhotonCap = 60;

/// Two squeezed vacua phi_0(e^{-r} x) (mode 1) and phi_0(e^{r} x) (mode 2)
/// meet on a beam splitter of transmittance T with the quadrature map
///   x1' =  sqrt(T) x1 + sqrt(R) x2
///   x2' = -sqrt(R) x1 + sqrt(T) x2.
/// Mode 1' is photon-counted; mode 2' carries the heralded state. The joint
/// output wavefunction is pi^{-1/2} exp(-(a y1^2 - 2 b y1 y2 + a' y2^2) / 2).
struct GpsParams {
  double r = 0.0;
  double T = 0.5;

  double R() const noexcept { return 1.0 - T; }
  double a() const noexcept;
  double b() const noexcept;
  /// Output-mode coefficient a' = R e^{-2r} + T e^{2r} = (1 + b^2) / a.
  double a_out() const noexcept;
  /// Squeezing of each input in dB, 10 log10(e^{2r}).
  double input_db() const noexcept;
  /// Envelope exponent of the large-squeezing form, e^{-2r} / T.
  double envelope_exponent() const noexcept;

  static GpsParams from_db(double db, double T);

  void validate() const;
};

/// Argument map applied when sampling a heralded state: the returned state is
/// sqrt(scale) * psi_n(scale * (x - shift)). Used for the adaptive squeeze and
/// the parity displacement without resampling.
struct ArgumentMap {
  double scale = 1.0;
  double shift = 0.0;
};

/// psi_n(x) ~ phi_0(x / sqrt(a)) * (phi_0^a * phi_n)(b x / a), normalised. The
/// convolution is done with an FFT on an auxiliary grid sized to phi_n.
GridWavefunction heralded_state_exact(const GpsParams& params, int n, const GridSpec& grid,
                                      ArgumentMap map = {});

/// Large-squeezing form phi_0^{e^{-2r}/T}(sqrt(T/R) x) * phi_n(sqrt(T/R) x).
GridWavefunction heralded_state_approx(const GpsParams& params, int n, const GridSpec& grid,
                                       ArgumentMap map = {});

/// The approximate form is meant for e^{2r} >> 1; below 10 dB it degrades.
bool approx_regime(const GpsParams& params) noexcept;

/// Conditional amplitudes c_n(x) = int phi_n(y) Psi'(y, x) dy of the heralded
/// mode, sampled on a reduced two-mode grid. Row n holds c_n over x_grid.
struct ConditionalAmplitudes {
  GridSpec x_grid;
  int n_cap = 0;
  std::vector<double> values;  // (n_cap + 1) x x_grid.points, row-major

  std::span<const double> row(int n) const;
};

ConditionalAmplitudes conditional_amplitudes(const GpsParams& params, int n_cap,
                                             std::size_t points = 1024);

struct PhotonDistribution {
  std::vector<double> p;  // P(0) .. P(n_cap)

  int n_cap() const noexcept { return int(p.size()) - 1; }
  double window(int n_min, int n_max) const;
  double total() const;
};

PhotonDistribution photon_distribution(const GpsParams& params, int n_cap = kDefaultPhotonCap,
                                       std::size_t points = 1024);

double p_ngs(const GpsParams& params, int n_min, int n_max, int n_cap = kDefaultPhotonCap,
             std::size_t points = 1024);

struct SolveResult {
  GpsParams params;
  double p_ngs = 0.0;
  int evaluations = 0;
};

/// Fix T by the envelope rule e^{-2r}/T = c/N and pick the r that maximises
/// the window probability (coarse dB scan, then golden section).
SolveResult solve_params(double c, int multiplicity, int n_min, int n_max,
                         int n_cap = kDefaultPhotonCap, std::size_t points = 1024);

/// T implied by the envelope rule for a given input squeezing.
double envelope_transmittance(double c, int multiplicity, double input_db);

/// Squeeze factor sigma = kappa_n sqrt(N) / sqrt(T/R) taking the heralded
/// oscillation onto the breeding coordinates.
double adaptive_scale(const GpsParams& params, int n, int multiplicity);

/// Parity displacement in input coordinates: 0 for even n, sqrt(pi/2)/sqrt(N)
/// for odd n (sqrt(pi/2) after breeding).
double parity_shift(int n, int multiplicity);

/// Heralded state for count n, squeezed and displaced so that inputs with
/// different n share one comb after breeding. Throws GridOverflowError when
/// the input breaks the tail-mass guard.
GridWavefunction adaptive_breeding_input(const GpsParams& params, int n, int multiplicity,
                                         const GridSpec& grid);

struct GpsOutcome {
  int n = 0;
  GridWavefunction state;
  double probability = 0.0;
  bool accepted = false;
};

/// CSV with header "n,P(n),cumulative,accepted".
void write_distribution_csv(const PhotonDistribution& dist, int n_min, int n_max,
                            std::ostream& out);

}  // namespace gkp::gps
