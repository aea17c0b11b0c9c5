#include "gkp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "gkp/error.hpp"

namespace gkp::fft {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex);
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    // FFTW_UNALIGNED lets the plan run on any caller buffer via fftw_execute_dft.
    std::vector<std::complex<double>> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(int(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw CapabilityError("FFTW could not create a plan");
    plans.emplace(std::pair{n, sign}, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void run(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int sign) {
  if (in.size() != out.size()) throw ConfigError("fft input/output length mismatch");
  if (in.empty()) return;
  fftw_plan plan = cache().get(in.size(), sign);
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (src == dst) {
    fftw_execute_dft(plan, src, dst);
  } else {
    // Out-of-place on the in-place plan: copy first so the input stays untouched.
    std::copy(in.begin(), in.end(), out.begin());
    fftw_execute_dft(plan, dst, dst);
  }
}

}  // namespace

void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(in, out, FFTW_FORWARD);
}

void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(in, out, FFTW_BACKWARD);
}

}  // namespace gkp::fft
