#pragma once

#include "gkp/wavefield.hpp"

namespace gkp {

inline constexpr double kTwoPiSqrt = 2.5066282746310002;   // sqrt(2 pi)
inline constexpr double kHalfPiSqrt = 1.2533141373155003;  // sqrt(pi / 2)

/// dB(Delta) = -20 log10(Delta)
double to_db(double delta);
double from_db(double db);

struct EffectiveSqueezing {
  double delta_x = 0.0;
  double delta_p = 0.0;

  double db_x() const { return to_db(delta_x); }
  double db_p() const { return to_db(delta_p); }
  double min_db() const;
};

/// Displacement expectation values <e^{i sqrt(2pi) x}> and <e^{-i sqrt(2pi) p}>.
struct CombCharacteristic {
  cplx cx;
  cplx cp;
};

CombCharacteristic comb_characteristic(const GridWavefunction& psi);

/// Delta~ = sqrt(-ln|C|^2 / pi). Throws MetricUndefinedError if |C| < 1e-12.
double delta_from_characteristic(cplx c);

/// Effective squeezing of a normalised pure position-basis state.
EffectiveSqueezing effective_squeezing(const GridWavefunction& psi);

struct SensorParams {
  double delta_x = 0.316;
  double delta_p = 0.316;
  int parity = 0;  // t: 0 puts teeth at s sqrt(2pi), 1 at (s + 1/2) sqrt(2pi)

  void validate() const;
};

/// Gaussian teeth of width Delta_x spaced by sqrt(2pi) under an envelope of
/// width 1/Delta_p; lattice sites with envelope weight < 1e-12 are dropped.
GridWavefunction sensor_state(const SensorParams& params, const GridSpec& grid);

/// phi_0^c(kappa_n x) * phi_n^N(kappa_n x), normalised, with kappa_n the
/// lattice wavenumber (comb spacing sqrt(2pi)).
GridWavefunction chi_target(double c, int n, int multiplicity, const GridSpec& grid);

/// Momentum kick sqrt(pi/2) * (N mod 2) relating chi to the sensor state.
double phase_reference_offset(int multiplicity);

struct PhaseReference {
  double p0;        // signed kick applied to psi
  double fidelity;  // to the sensor target after the kick
};

/// Apply +/- phase_reference_offset(N) to psi and keep the sign with the
/// higher fidelity to target.
PhaseReference align_phase_reference(const GridWavefunction& psi, int multiplicity,
                                     const GridWavefunction& target);

}  // namespace gkp
