#include "gkp/factory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "gkp/error.hpp"
#include "gkp/targets.hpp"

namespace gkp::factory {

void FactoryConfig::validate() const {
  if (N < 2) throw ConfigError("N must be >= 2");
  if (M < N) throw ConfigError("M must be >= N");
  if (M > 4096) throw ConfigError("M above 4096 is not supported");
  if (n_min < 0 || n_min > n_max) throw ConfigError("photon window needs 0 <= n_min <= n_max");
  if (n_max > n_cap) throw ConfigError("n_max must not exceed n_cap");
  if (!(c > 0)) throw ConfigError("c must be positive");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (count_trials < 0) throw ConfigError("count_trials must be >= 0");
  if (two_mode_points < 1024) throw ConfigError("two_mode_points must be >= 1024");
  if (homodyne_points < 16) throw ConfigError("homodyne_points must be >= 16");
  grid.validate();
}

FactoryContext::FactoryContext(FactoryConfig cfg, gps::GpsParams params)
    : cfg_(std::move(cfg)), params_(params) {
  cfg_.validate();
  params_.validate();
  dist_ = gps::photon_distribution(params_, cfg_.n_cap, cfg_.two_mode_points);
  cdf_.resize(dist_.p.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < dist_.p.size(); ++n) {
    acc += dist_.p[n];
    cdf_[n] = acc;
  }
  for (int n = cfg_.n_min; n <= cfg_.n_max; ++n) {
    inputs_.emplace(n, gps::adaptive_breeding_input(params_, n, cfg_.N, cfg_.grid));
  }
}

const GridWavefunction& FactoryContext::input(int n) const {
  auto it = inputs_.find(n);
  if (it == inputs_.end()) {
    throw ConfigError("no breeding input for photon count " + std::to_string(n));
  }
  return it->second;
}

int FactoryContext::sample_count(Stream& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return int(it - cdf_.begin());
}

namespace {

void draw_counts(const FactoryContext& ctx, Stream& rng, TrialRecord& rec) {
  const auto& cfg = ctx.config();
  rec.counts.resize(std::size_t(cfg.M));
  rec.accepted_idx.clear();
  for (int i = 0; i < cfg.M; ++i) {
    const int n = ctx.sample_count(rng);
    rec.counts[std::size_t(i)] = n;
    if (n >= cfg.n_min && n <= cfg.n_max) rec.accepted_idx.push_back(i);
  }
  rec.ngs_success = int(rec.accepted_idx.size()) >= cfg.N;
}

void breed_and_correct(const FactoryContext& ctx, TrialRecord& rec, TrialOptions opts) {
  const auto& cfg = ctx.config();
  rec.bred = true;
  try {
    std::vector<GridWavefunction> inputs;
    inputs.reserve(std::size_t(cfg.N));
    // Selector: first N accepted units in index order.
    for (int k = 0; k < cfg.N; ++k) {
      inputs.push_back(ctx.input(rec.counts[std::size_t(rec.accepted_idx[std::size_t(k)])]));
    }
    Stream hd(cfg.seed, rec.trial_id, site::kHomodyne);
    auto bred = breeding::breed(inputs, breeding::BreedingPlan::chain(cfg.N), &hd);
    rec.outcomes = bred.record.outcomes;
    auto corr = breeding::optimize_correction(bred.state, cfg.N % 2);
    rec.correction = corr.correction;
    rec.delta_x = corr.metrics.delta_x;
    rec.delta_p = corr.metrics.delta_p;
    rec.db_x = corr.metrics.db_x();
    rec.db_p = corr.metrics.db_p();
    rec.imag_fraction = imaginary_fraction(corr.state);
    rec.success = std::min(rec.db_x, rec.db_p) >= cfg.threshold_db;
    if (opts.keep_state) {
      rec.state = std::move(corr.state);
      rec.bred_state = std::move(bred.state);
    }
  } catch (const Error& e) {
    rec.error_tag = e.tag();
    rec.success = false;
  }
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  return std::max(1, int(std::thread::hardware_concurrency()));
}

template <class Fn>
void parallel_for(long count, int workers, Fn&& fn) {
  const int w = int(std::min<long>(resolve_workers(workers), std::max<long>(count, 1)));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&](int worker) {
    try {
      for (long i = next++; i < count; i = next++) fn(i, worker);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = count;
    }
  };
  if (w == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(body, i);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

TrialRecord run_trial(const FactoryContext& ctx, std::uint64_t trial, TrialOptions opts) {
  TrialRecord rec;
  rec.trial_id = trial;
  Stream counts(ctx.config().seed, trial, site::kCounts);
  draw_counts(ctx, counts, rec);
  if (rec.ngs_success && !opts.count_only) breed_and_correct(ctx, rec, opts);
  return rec;
}

TrialRecord run_conditioned_trial(const FactoryContext& ctx, std::uint64_t trial,
                                  TrialOptions opts) {
  const auto& cfg = ctx.config();
  if (selector_success(ctx.p_ngs(), cfg.M, cfg.N) < 1e-12) {
    throw ConfigError("selector success probability is effectively zero for this window");
  }
  TrialRecord rec;
  rec.trial_id = trial;
  rec.conditioned = true;
  Stream counts(cfg.seed, trial, site::kConditionedCounts);
  constexpr long kMaxAttempts = 100'000'000;
  for (long attempt = 0; attempt < kMaxAttempts; ++attempt) {
    draw_counts(ctx, counts, rec);
    if (rec.ngs_success) break;
  }
  if (!rec.ngs_success) throw ConfigError("selector never succeeded in conditioned trial");
  if (!opts.count_only) breed_and_correct(ctx, rec, opts);
  return rec;
}

std::vector<TrialRecord> run_batch(const FactoryContext& ctx, std::uint64_t first, long count,
                                   bool conditioned, TrialOptions opts, int workers) {
  std::vector<TrialRecord> out(std::size_t(std::max(count, 0L)));
  parallel_for(count, workers, [&](long i, int) {
    const auto id = first + std::uint64_t(i);
    out[std::size_t(i)] = conditioned ? run_conditioned_trial(ctx, id, opts)
                                      : run_trial(ctx, id, opts);
  });
  return out;
}

CountSummary run_counts(const FactoryContext& ctx, long trials, int workers) {
  const int w = resolve_workers(workers);
  std::vector<CountSummary> partial(static_cast<std::size_t>(w));
  parallel_for(trials, w, [&](long i, int worker) {
    const auto rec = run_trial(ctx, std::uint64_t(i), {.count_only = true});
    auto& s = partial[std::size_t(worker)];
    ++s.trials;
    s.ngs_successes += rec.ngs_success ? 1 : 0;
    s.units += long(rec.counts.size());
    s.accepted_units += long(rec.accepted_idx.size());
  });
  CountSummary total;
  for (const auto& s : partial) {
    total.trials += s.trials;
    total.ngs_successes += s.ngs_successes;
    total.units += s.units;
    total.accepted_units += s.accepted_units;
  }
  return total;
}

Interval binomial_interval(long successes, long trials) {
  if (trials <= 0) return {};
  const double p = double(successes) / double(trials);
  return {p, 1.96 * std::sqrt(p * (1.0 - p) / double(trials))};
}

ProbabilityReport estimate(const CountSummary& counts, std::span<const TrialRecord> records,
                           const FactoryConfig& cfg, double p_ngs_analytic) {
  ProbabilityReport rep;
  rep.p_ngs_analytic = p_ngs_analytic;
  rep.p_ngs_empirical = binomial_interval(counts.accepted_units, counts.units);
  rep.ngs_rate_empirical = binomial_interval(counts.ngs_successes, counts.trials);
  rep.ngs_rate_analytic = selector_success(p_ngs_analytic, cfg.M, cfg.N);
  long bred = 0;
  for (const auto& r : records) {
    if (!r.bred) continue;
    ++bred;
    rep.successes += r.success ? 1 : 0;
    rep.failed_with_error += r.error_tag.empty() ? 0 : 1;
  }
  rep.conditioned_trials = bred;
  rep.p_hd_defined = bred > 0;
  if (rep.p_hd_defined) {
    rep.p_hd = binomial_interval(rep.successes, bred);
    rep.p_total_analytic = analytic_total(p_ngs_analytic, rep.p_hd.value, cfg.M, cfg.N);
    const double a = rep.ngs_rate_empirical.value, b = rep.p_hd.value;
    rep.p_total_empirical.value = a * b;
    rep.p_total_empirical.half_width =
        std::hypot(b * rep.ngs_rate_empirical.half_width, a * rep.p_hd.half_width);
  }
  return rep;
}

double selector_success(double p_ngs, int M, int N) {
  if (!(p_ngs >= 0 && p_ngs <= 1)) throw ConfigError("p_ngs must lie in [0, 1]");
  if (M < N || N < 0) throw ConfigError("need M >= N >= 0");
  if (N == 0) return 1.0;
  if (p_ngs == 0.0) return 0.0;
  if (p_ngs == 1.0) return 1.0;
  const double lp = std::log(p_ngs), lq = std::log1p(-p_ngs);
  double sum = 0.0;
  for (int j = N; j <= M; ++j) {
    const double lc = std::lgamma(M + 1.0) - std::lgamma(j + 1.0) - std::lgamma(M - j + 1.0);
    sum += std::exp(lc + j * lp + (M - j) * lq);
  }
  return std::min(sum, 1.0);
}

double analytic_total(double p_ngs, double p_hd, int M, int N) {
  if (!(p_hd >= 0 && p_hd <= 1)) throw ConfigError("p_hd must lie in [0, 1]");
  return p_hd * selector_success(p_ngs, M, N);
}

std::vector<std::pair<int, double>> sweep_m(double p_ngs, double p_hd, int N, int m_lo,
                                            int m_hi) {
  if (m_lo > m_hi) throw ConfigError("sweep range must have m_lo <= m_hi");
  std::vector<std::pair<int, double>> out;
  for (int m = std::max(m_lo, N); m <= m_hi; ++m) out.emplace_back(m, analytic_total(p_ngs, p_hd, m, N));
  return out;
}

std::optional<int> crossing_m(double p_ngs, double p_hd, int N, double target, int m_max) {
  for (int m = N; m <= m_max; ++m) {
    if (analytic_total(p_ngs, p_hd, m, N) >= target) return m;
  }
  return std::nullopt;
}

std::vector<std::pair<double, double>> scatter_metrics(std::span<const TrialRecord> records) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : records) {
    if (r.bred && r.error_tag.empty()) out.emplace_back(r.db_x, r.db_p);
  }
  return out;
}

FactoryConfig cat_breeding_variant(FactoryConfig cfg) {
  cfg.c = double(cfg.N);
  return cfg;
}

namespace {
template <class T>
std::string join(const std::vector<T>& v, const char* fmt) {
  std::string s;
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    std::snprintf(buf, sizeof buf, fmt, v[i]);
    s += buf;
  }
  return s;
}
}  // namespace

void write_results_csv(std::span<const TrialRecord> records, std::ostream& out) {
  out << "trial_id,n_counts,accepted_idx,ngs_success,x_m,sigma,x0,p0,delta_x_db,delta_p_db,"
         "success,error_tag\n";
  char buf[256];
  for (const auto& r : records) {
    out << r.trial_id << ',' << join(r.counts, "%d") << ',' << join(r.accepted_idx, "%d") << ','
        << (r.ngs_success ? "true" : "false") << ',' << join(r.outcomes, "%.10g") << ',';
    if (r.bred && r.error_tag.empty()) {
      std::snprintf(buf, sizeof buf, "%.8g,%.8g,%.8g,%.6f,%.6f", r.correction.sigma,
                    r.correction.x0, r.correction.p0, r.db_x, r.db_p);
      out << buf;
    } else {
      out << ",,,,";
    }
    out << ',' << (r.success ? "true" : "false") << ',' << r.error_tag << '\n';
  }
}

}  // namespace gkp::factory
