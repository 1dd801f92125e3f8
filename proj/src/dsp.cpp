#include "asrkit/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace asrkit {

namespace {

// Planner calls are not thread-safe in FFTW; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct PlanDestroy {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDestroy>;

template <class T>
std::unique_ptr<T[], FftwFree> fftw_array(std::size_t n) {
  return std::unique_ptr<T[], FftwFree>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

std::size_t fft_size(std::size_t n) {
  std::size_t size = 1;
  while (size < n) size <<= 1;
  return size;
}

std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
  }
  return out;
}

std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b) {
  const std::size_t n_out = a.size() + b.size() - 1;
  const std::size_t n = fft_size(n_out);
  const std::size_t n_bins = n / 2 + 1;

  auto xa = fftw_array<double>(n);
  auto xb = fftw_array<double>(n);
  auto fa = fftw_array<fftw_complex>(n_bins);
  auto fb = fftw_array<fftw_complex>(n_bins);

  PlanPtr plan_a, plan_b, plan_inv;
  {
    std::lock_guard lock(planner_mutex());
    const auto n_int = static_cast<int>(n);
    plan_a.reset(fftw_plan_dft_r2c_1d(n_int, xa.get(), fa.get(), FFTW_ESTIMATE));
    plan_b.reset(fftw_plan_dft_r2c_1d(n_int, xb.get(), fb.get(), FFTW_ESTIMATE));
    plan_inv.reset(fftw_plan_dft_c2r_1d(n_int, fa.get(), xa.get(), FFTW_ESTIMATE));
  }

  std::fill(xa.get(), xa.get() + n, 0.0);
  std::fill(xb.get(), xb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), xa.get());
  std::copy(b.begin(), b.end(), xb.get());
  fftw_execute(plan_a.get());
  fftw_execute(plan_b.get());
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re;
    fa[k][1] = im;
  }
  fftw_execute(plan_inv.get());

  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) out[i] = xa[i] * scale;
  return out;
}

}  // namespace

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, ConvolutionMethod method) {
  if (a.empty() || b.empty()) return {};
  if (method == ConvolutionMethod::Auto) {
    const std::size_t short_len = std::min(a.size(), b.size());
    method = short_len <= 64 ? ConvolutionMethod::Direct : ConvolutionMethod::Fft;
  }
  return method == ConvolutionMethod::Direct ? convolve_direct(a, b) : convolve_fft(a, b);
}

}  // namespace asrkit
