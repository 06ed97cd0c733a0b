#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace earm::detail {

namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution with new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

  const Plans& get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<fftw_complex> cplx(static_cast<std::size_t>(n / 2 + 1));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(n, real.data(), cplx.data(), flags);
    p.inverse = fftw_plan_dft_c2r_1d(n, cplx.data(), real.data(), flags);
    return plans_.emplace(n, p).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<int, Plans> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  const Plans& p = cache().get(n);
  // r2c does not modify its input but FFTW's signature is non-const.
  std::vector<double> scratch(in.begin(), in.end());
  fftw_execute_dft_r2c(p.forward, scratch.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  const Plans& p = cache().get(n);
  // c2r destroys its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(p.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / n;
  for (auto& v : out) v *= scale;
}

}  // namespace earm::detail
