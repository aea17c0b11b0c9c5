#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gkp/breeding.hpp"
#include "gkp/gps.hpp"
#include "gkp/wavefield.hpp"

namespace gkp::factory {

struct FactoryConfig {
  int M = 5;
  int N = 5;
  int n_min = 10;
  int n_max = 20;
  double c = 1.3;
  GridSpec grid{};
  long trials = 2000;          // breeding trials conditioned on selector success
  long count_trials = 100000;  // count-only trials for the selector statistics
  std::uint64_t seed = 1;
  double threshold_db = 10.0;
  int n_cap = gps::kDefaultPhotonCap;
  std::size_t two_mode_points = 1024;
  std::size_t homodyne_points = 512;

  /// M >= N >= 2, 0 <= n_min <= n_max <= n_cap, trials >= 1.
  void validate() const;
};

/// Everything a trial needs that depends only on the configuration: the
/// photon-count law and one adapted breeding input per accepted n. Built once,
/// then shared read-only by all workers.
class FactoryContext {
 public:
  FactoryContext(FactoryConfig cfg, gps::GpsParams params);

  const FactoryConfig& config() const noexcept { return cfg_; }
  const gps::GpsParams& params() const noexcept { return params_; }
  const gps::PhotonDistribution& distribution() const noexcept { return dist_; }
  double p_ngs() const { return dist_.window(cfg_.n_min, cfg_.n_max); }

  /// Adapted input for an accepted count.
  const GridWavefunction& input(int n) const;

  /// Inverse-CDF draw of one unit's photon count; n_cap + 1 stands for the
  /// mass above the cap.
  int sample_count(Stream& rng) const;

 private:
  FactoryConfig cfg_;
  gps::GpsParams params_;
  gps::PhotonDistribution dist_;
  std::vector<double> cdf_;
  std::map<int, GridWavefunction> inputs_;
};

struct TrialRecord {
  std::uint64_t trial_id = 0;
  bool conditioned = false;  // counts resampled until the selector succeeded
  bool bred = false;
  std::vector<int> counts;
  std::vector<int> accepted_idx;
  bool ngs_success = false;
  std::vector<double> outcomes;
  breeding::GaussianCorrection correction;
  double delta_x = 0.0;
  double delta_p = 0.0;
  double db_x = 0.0;
  double db_p = 0.0;
  double imag_fraction = 0.0;
  bool success = false;
  std::string error_tag;
  std::optional<GridWavefunction> state;  // corrected output, when kept
  std::optional<GridWavefunction> bred_state;  // breeding output before correction, when kept
};

struct TrialOptions {
  bool count_only = false;
  bool keep_state = false;
};

/// One shot of the full system: M unit counts, selector, breeding with
/// sampled outcomes, correction, threshold test. Numerical failures are
/// recorded in error_tag rather than thrown.
TrialRecord run_trial(const FactoryContext& ctx, std::uint64_t trial, TrialOptions opts = {});

/// As run_trial, but the M counts are redrawn until at least N units accept.
TrialRecord run_conditioned_trial(const FactoryContext& ctx, std::uint64_t trial,
                                  TrialOptions opts = {});

/// Runs trials [first, first + count) on up to `workers` threads (0 = all
/// cores). The result is ordered by trial id and independent of workers.
std::vector<TrialRecord> run_batch(const FactoryContext& ctx, std::uint64_t first, long count,
                                   bool conditioned, TrialOptions opts = {}, int workers = 0);

/// Selector statistics from count-only trials, without storing records.
struct CountSummary {
  long trials = 0;
  long ngs_successes = 0;
  long units = 0;
  long accepted_units = 0;
};

CountSummary run_counts(const FactoryContext& ctx, long trials, int workers = 0);

struct Interval {
  double value = 0.0;
  double half_width = 0.0;  // 95% normal-approximation half width
};

struct ProbabilityReport {
  Interval p_ngs_empirical;
  double p_ngs_analytic = 0.0;
  Interval ngs_rate_empirical;  // fraction of shots with >= N acceptances
  double ngs_rate_analytic = 0.0;
  Interval p_hd;
  bool p_hd_defined = false;
  long conditioned_trials = 0;
  long successes = 0;
  long failed_with_error = 0;
  double p_total_analytic = 0.0;
  Interval p_total_empirical;
};

/// p_hd = successes / bred records; p_total_empirical = ngs_rate * p_hd with
/// ngs_rate from the count summary.
ProbabilityReport estimate(const CountSummary& counts, std::span<const TrialRecord> records,
                           const FactoryConfig& cfg, double p_ngs_analytic);

Interval binomial_interval(long successes, long trials);

/// P_HD * sum_{j=N}^{M} C(M,j) p^j (1-p)^{M-j}, evaluated in log space.
double analytic_total(double p_ngs, double p_hd, int M, int N);

/// Probability that at least N of M units accept.
double selector_success(double p_ngs, int M, int N);

std::vector<std::pair<int, double>> sweep_m(double p_ngs, double p_hd, int N, int m_lo, int m_hi);

/// Smallest M with analytic_total >= target, or nullopt within [N, m_max].
std::optional<int> crossing_m(double p_ngs, double p_hd, int N, double target, int m_max = 500);

/// (dB_x, dB_p) of every bred record without an error.
std::vector<std::pair<double, double>> scatter_metrics(std::span<const TrialRecord> records);

/// Same configuration with c = N: GPS outputs approximate cat states and the
/// breeding reduces to cat breeding.
FactoryConfig cat_breeding_variant(FactoryConfig cfg);

/// Results CSV, one row per record:
/// trial_id,n_counts,accepted_idx,ngs_success,x_m,sigma,x0,p0,delta_x_db,delta_p_db,success,error_tag
void write_results_csv(std::span<const TrialRecord> records, std::ostream& out);

}  // namespace gkp::factory
