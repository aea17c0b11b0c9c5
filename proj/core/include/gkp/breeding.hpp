#pragma once

#include <span>
#include <vector>

#include "gkp/rng.hpp"
#include "gkp/targets.hpp"
#include "gkp/wavefield.hpp"

namespace gkp::breeding {

enum class OutcomeMode { fixed, sampled };

/// Chain of N-1 beam-splitter merges. Merge k (1-based) combines the running
/// state with input k+1 at transmittance T_k and conditions the second output
/// on a homodyne value.
struct BreedingPlan {
  int inputs = 2;
  std::vector<double> transmittances;
  OutcomeMode mode = OutcomeMode::sampled;
  std::vector<double> fixed_outcomes;  // used when mode == fixed

  /// T_k = k / (k + 1): at all-zero outcomes the output is prod psi_i(x / sqrt(N)).
  static BreedingPlan chain(int inputs, OutcomeMode mode = OutcomeMode::sampled);
  /// Chain schedule with the given outcomes (all zero when empty).
  static BreedingPlan with_outcomes(int inputs, std::vector<double> outcomes = {});

  void validate() const;
};

struct HomodyneRecord {
  std::vector<double> outcomes;
  std::vector<double> densities;
  double cumulative_weight = 1.0;
};

struct GaussianCorrection {
  double sigma = 1.0;
  double x0 = 0.0;
  double p0 = 0.0;
};

struct Conditioned {
  GridWavefunction state;
  double density;  // p(x_m), the pre-normalisation norm squared
};

/// psi_out(x) ~ psiA(sqrt(T) x - sqrt(R) x_m) * psiB(sqrt(R) x + sqrt(T) x_m).
/// Throws DegenerateConditioningError when the outcome has zero density.
Conditioned bs_condition(const GridWavefunction& a, const GridWavefunction& b, double T,
                         double x_m);

/// Tabulated outcome density, normalised to unit trapezoid integral.
class DensityTable {
 public:
  DensityTable(std::vector<double> outcomes, std::vector<double> density);

  std::span<const double> outcomes() const noexcept { return x_; }
  std::span<const double> density() const noexcept { return p_; }
  std::span<const double> cdf() const noexcept { return cdf_; }
  double integral() const;

 private:
  std::vector<double> x_;
  std::vector<double> p_;
  std::vector<double> cdf_;
};

/// Marginal density of the homodyne outcome over a range covering both
/// inputs' supports.
DensityTable homodyne_density(const GridWavefunction& a, const GridWavefunction& b, double T,
                              std::size_t points = 512);

/// Inverse-CDF draw, linear between table nodes.
double sample_outcome(const DensityTable& table, Stream& rng);

struct BreedResult {
  GridWavefunction state;
  HomodyneRecord record;
};

/// Fold inputs left to right through the plan. rng is required in sampled mode.
BreedResult breed(std::span<const GridWavefunction> inputs, const BreedingPlan& plan,
                  Stream* rng = nullptr);

struct CorrectionResult {
  GaussianCorrection correction;
  GridWavefunction state;
  EffectiveSqueezing metrics;
  int evaluations = 0;
};

/// Search the squeeze that maximises min(dB_x, dB_p) (log-scan then golden
/// section), then displace so both comb characteristics are real and
/// positive, i.e. the comb sits on the t = 0 lattice. x0 takes the lattice
/// representative that brings the state's centre nearest the origin;
/// parity = N mod 2 picks the representative p0 closest to parity * sqrt(pi/2).
CorrectionResult optimize_correction(const GridWavefunction& psi, int parity);

GridWavefunction apply_correction(const GridWavefunction& psi, const GaussianCorrection& c);

}  // namespace gkp::breeding
