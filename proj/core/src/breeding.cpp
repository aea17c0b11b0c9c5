#include "gkp/breeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gkp/error.hpp"

namespace gkp::breeding {

BreedingPlan BreedingPlan::chain(int inputs, OutcomeMode mode) {
  BreedingPlan plan;
  plan.inputs = inputs;
  plan.mode = mode;
  for (int k = 1; k < inputs; ++k) plan.transmittances.push_back(double(k) / double(k + 1));
  if (mode == OutcomeMode::fixed) plan.fixed_outcomes.assign(std::size_t(std::max(inputs - 1, 0)), 0.0);
  return plan;
}

BreedingPlan BreedingPlan::with_outcomes(int inputs, std::vector<double> outcomes) {
  auto plan = chain(inputs, OutcomeMode::fixed);
  if (!outcomes.empty()) plan.fixed_outcomes = std::move(outcomes);
  return plan;
}

void BreedingPlan::validate() const {
  if (inputs < 2) throw ConfigError("breeding needs at least two inputs");
  if (transmittances.size() != std::size_t(inputs - 1)) {
    throw ConfigError("breeding plan needs N-1 transmittances");
  }
  for (double t : transmittances) {
    if (!(t > 0 && t < 1)) throw ConfigError("breeding transmittance outside (0, 1)");
  }
  if (mode == OutcomeMode::fixed && fixed_outcomes.size() != transmittances.size()) {
    throw ConfigError("fixed-outcome plan needs N-1 outcomes");
  }
}

namespace {

void check_pair(const GridWavefunction& a, const GridWavefunction& b, double T) {
  if (!(a.spec() == b.spec())) throw ConfigError("beam-splitter inputs must share a grid");
  if (a.basis() != Basis::position || b.basis() != Basis::position) {
    throw ConfigError("beam-splitter inputs must be position-basis states");
  }
  if (!(T > 0 && T < 1)) throw ConfigError("beam-splitter transmittance outside (0, 1)");
}

struct Support {
  double lo, hi;
};

// Smallest interval holding all but ~1e-14 of the mass on each side.
Support support_of(std::span<const double> rho, const GridSpec& g) {
  double total = 0.0;
  for (double v : rho) total += v;
  const double cut = 1e-14 * total;
  std::size_t lo = 0, hi = rho.size() - 1;
  for (double acc = 0.0; lo < rho.size(); ++lo) {
    acc += rho[lo];
    if (acc > cut) break;
  }
  for (double acc = 0.0; hi > lo; --hi) {
    acc += rho[hi];
    if (acc > cut) break;
  }
  const double pad = 2.0 * g.dx();
  return {std::max(g.x(lo) - pad, -g.half_width), std::min(g.x(hi) + pad, g.half_width)};
}

std::vector<double> density_of(const GridWavefunction& psi) {
  std::vector<double> rho(psi.size());
  for (std::size_t j = 0; j < rho.size(); ++j) rho[j] = std::norm(psi[j]);
  return rho;
}

}  // namespace

Conditioned bs_condition(const GridWavefunction& a, const GridWavefunction& b, double T,
                         double x_m) {
  check_pair(a, b, T);
  if (!std::isfinite(x_m)) throw ConfigError("homodyne outcome must be finite");
  const auto& g = a.spec();
  const double st = std::sqrt(T), sr = std::sqrt(1.0 - T);
  const double origin = g.x(0), dx = g.dx();
  std::vector<cplx> out(g.points);
  for (std::size_t j = 0; j < g.points; ++j) {
    const double x = g.x(j);
    out[j] = detail::interpolate(a.amplitudes(), origin, dx, st * x - sr * x_m) *
             detail::interpolate(b.amplitudes(), origin, dx, sr * x + st * x_m);
  }
  GridWavefunction raw(g, std::move(out));
  const double density = raw.norm_squared();
  if (!(density > 1e-300) || !std::isfinite(density)) {
    throw DegenerateConditioningError("homodyne outcome " + std::to_string(x_m) +
                                      " has zero conditional density");
  }
  return {normalize(raw).state, density};
}

DensityTable::DensityTable(std::vector<double> outcomes, std::vector<double> density)
    : x_(std::move(outcomes)), p_(std::move(density)) {
  if (x_.size() < 2 || x_.size() != p_.size()) {
    throw ConfigError("density table needs >= 2 matching nodes");
  }
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw ConfigError("density table nodes must increase");
  }
  for (auto& v : p_) {
    if (!(v >= 0) || !std::isfinite(v)) v = 0.0;
  }
  cdf_.assign(x_.size(), 0.0);
  for (std::size_t i = 1; i < x_.size(); ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * (p_[i] + p_[i - 1]) * (x_[i] - x_[i - 1]);
  }
  const double total = cdf_.back();
  if (!(total > 0)) throw DegenerateConditioningError("outcome density integrates to zero");
  for (auto& v : p_) v /= total;
  for (auto& v : cdf_) v /= total;
}

double DensityTable::integral() const {
  double s = 0.0;
  for (std::size_t i = 1; i < x_.size(); ++i) s += 0.5 * (p_[i] + p_[i - 1]) * (x_[i] - x_[i - 1]);
  return s;
}

DensityTable homodyne_density(const GridWavefunction& a, const GridWavefunction& b, double T,
                              std::size_t points) {
  check_pair(a, b, T);
  if (points < 2) throw ConfigError("homodyne_density needs >= 2 points");
  const auto& g = a.spec();
  const double st = std::sqrt(T), sr = std::sqrt(1.0 - T);
  const auto ra = density_of(a);
  const auto rb = density_of(b);
  const auto sa = support_of(ra, g);
  const auto sb = support_of(rb, g);

  // x_m = -sqrt(R) u + sqrt(T) w with u in supp(a), w in supp(b).
  const double m_lo = -sr * sa.hi + st * sb.lo;
  const double m_hi = -sr * sa.lo + st * sb.hi;
  const double origin = g.x(0), dx = g.dx();
  std::vector<double> ms(points), dens(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double m = m_lo + (m_hi - m_lo) * double(i) / double(points - 1);
    ms[i] = m;
    // x range where both arguments stay inside their supports
    double x_lo = std::max((sa.lo + sr * m) / st, (sb.lo - st * m) / sr);
    double x_hi = std::min((sa.hi + sr * m) / st, (sb.hi - st * m) / sr);
    x_lo = std::max(x_lo, -g.half_width);
    x_hi = std::min(x_hi, g.half_width);
    double acc = 0.0;
    if (x_hi > x_lo) {
      const auto j0 = std::size_t(std::max(0.0, std::floor((x_lo - origin) / dx)));
      const auto j1 = std::min(g.points - 1, std::size_t(std::ceil((x_hi - origin) / dx)));
      for (std::size_t j = j0; j <= j1; ++j) {
        const double x = g.x(j);
        acc += detail::interpolate(std::span<const double>(ra), origin, dx, st * x - sr * m) *
               detail::interpolate(std::span<const double>(rb), origin, dx, sr * x + st * m);
      }
    }
    dens[i] = std::max(acc * dx, 0.0);
  }
  return DensityTable(std::move(ms), std::move(dens));
}

double sample_outcome(const DensityTable& table, Stream& rng) {
  const auto cdf = table.cdf();
  const auto xs = table.outcomes();
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.begin()) return xs.front();
  if (it == cdf.end()) return xs.back();
  const auto i = std::size_t(it - cdf.begin()) - 1;
  const double span = cdf[i + 1] - cdf[i];
  const double f = span > 0 ? (u - cdf[i]) / span : 0.0;
  return xs[i] + f * (xs[i + 1] - xs[i]);
}

BreedResult breed(std::span<const GridWavefunction> inputs, const BreedingPlan& plan,
                  Stream* rng) {
  plan.validate();
  if (inputs.size() != std::size_t(plan.inputs)) {
    throw ConfigError("breed: got " + std::to_string(inputs.size()) + " inputs, plan expects " +
                      std::to_string(plan.inputs));
  }
  if (plan.mode == OutcomeMode::sampled && rng == nullptr) {
    throw ConfigError("breed: sampled outcomes need an rng stream");
  }
  HomodyneRecord record;
  GridWavefunction state = inputs[0];
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    const double T = plan.transmittances[k - 1];
    double m = 0.0;
    if (plan.mode == OutcomeMode::sampled) {
      m = sample_outcome(homodyne_density(state, inputs[k], T), *rng);
    } else {
      m = plan.fixed_outcomes[k - 1];
    }
    auto cond = bs_condition(state, inputs[k], T, m);
    record.outcomes.push_back(m);
    record.densities.push_back(cond.density);
    record.cumulative_weight *= cond.density;
    state = std::move(cond.state);
  }
  return {std::move(state), std::move(record)};
}

namespace {

// Characteristic functions of |psi|^2 and |psi~|^2 under a squeeze s, without
// resampling: <e^{i a x}> after squeeze = sum rho(x) e^{i a x / s}.
class SqueezeProfile {
 public:
  explicit SqueezeProfile(const GridWavefunction& psi) {
    collect(psi, xs_, wx_);
    collect(to_momentum(psi), ps_, wp_);
  }

  cplx cx(double s) const {
    cplx acc{};
    for (std::size_t i = 0; i < xs_.size(); ++i) acc += wx_[i] * std::polar(1.0, kTwoPiSqrt * xs_[i] / s);
    return acc;
  }
  cplx cp(double s) const {
    cplx acc{};
    for (std::size_t i = 0; i < ps_.size(); ++i) acc += wp_[i] * std::polar(1.0, -kTwoPiSqrt * ps_[i] * s);
    return acc;
  }

 private:
  static void collect(const GridWavefunction& psi, std::vector<double>& q, std::vector<double>& w) {
    double total = 0.0, peak = 0.0;
    for (const auto& a : psi.amplitudes()) {
      total += std::norm(a);
      peak = std::max(peak, std::norm(a));
    }
    for (std::size_t j = 0; j < psi.size(); ++j) {
      const double v = std::norm(psi[j]);
      if (v > 1e-20 * peak) {
        q.push_back(psi.coordinate(j));
        w.push_back(v / total);
      }
    }
  }

  std::vector<double> xs_, wx_, ps_, wp_;
};

double safe_delta(cplx c) {
  return std::abs(c) < 1e-12 ? std::numeric_limits<double>::infinity()
                             : delta_from_characteristic(c);
}

double nearest_representative(double value, double target) {
  double best = value;
  for (int k = -2; k <= 2; ++k) {
    const double cand = value + k * kTwoPiSqrt;
    if (std::abs(cand - target) < std::abs(best - target)) best = cand;
  }
  return best;
}

}  // namespace

GridWavefunction apply_correction(const GridWavefunction& psi, const GaussianCorrection& c) {
  return displace_p(displace_x(squeeze(psi, c.sigma), c.x0), c.p0);
}

CorrectionResult optimize_correction(const GridWavefunction& psi, int parity) {
  if (psi.basis() != Basis::position) throw ConfigError("optimize_correction expects position basis");
  const SqueezeProfile profile(normalize(psi).state);
  int evals = 0;
  auto objective = [&](double log_s) {
    ++evals;
    const double s = std::exp(log_s);
    return std::max(safe_delta(profile.cx(s)), safe_delta(profile.cp(s)));
  };

  // Smallest squeeze whose stretched, centred state still fits on the grid.
  const double d = mean_position(psi);
  double radius = 0.0, outside = 0.0;
  {
    std::vector<std::pair<double, double>> by_distance;
    for (std::size_t j = 0; j < psi.size(); ++j) {
      by_distance.emplace_back(std::abs(psi.coordinate(j) - d), std::norm(psi[j]) * psi.step());
    }
    std::sort(by_distance.begin(), by_distance.end());
    const double total = psi.norm_squared();
    for (auto it = by_distance.rbegin(); it != by_distance.rend(); ++it) {
      outside += it->second;
      if (outside > 1e-10 * total) {
        radius = it->first;
        break;
      }
    }
  }
  const double log_floor = std::log(std::max(radius, 1e-300) / (0.95 * psi.spec().half_width));

  const double step = 0.05;
  double best_log = 0.0, best_val = objective(0.0);
  for (int i = -24; i <= 24; ++i) {
    if (i == 0 || i * step < log_floor) continue;
    const double v = objective(i * step);
    if (v < best_val) {
      best_val = v;
      best_log = i * step;
    }
  }
  if (!std::isfinite(best_val)) {
    throw MetricUndefinedError("no squeeze gives a defined comb overlap");
  }
  double lo = std::max(best_log - step, std::min(log_floor, best_log)), hi = best_log + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-4) {
    if (f1 < f2) {
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
  double log_s = 0.5 * (lo + hi);
  if (objective(log_s) > best_val) log_s = best_log;

  GaussianCorrection corr;
  corr.sigma = std::exp(log_s);
  // Squeeze about the centre of mass so off-centre states stay on the grid;
  // squeeze(D(-d) psi) = D(-d / sigma) squeeze(psi), folded into x0 below.
  const auto squeezed = squeeze(displace_x(psi, -d), corr.sigma);
  const auto chars = comb_characteristic(squeezed);
  const double x0 = nearest_representative(-std::arg(chars.cx) / kTwoPiSqrt, 0.0);
  corr.x0 = x0 - d / corr.sigma;
  corr.p0 = nearest_representative(std::arg(chars.cp) / kTwoPiSqrt, parity * kHalfPiSqrt);
  auto state = displace_p(displace_x(squeezed, x0), corr.p0);
  const auto metrics = effective_squeezing(state);
  return {corr, std::move(state), metrics, evals};
}

}  // namespace gkp::breeding
