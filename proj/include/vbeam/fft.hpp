#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "vbeam/common.hpp"

namespace vbeam {

/// Thin FFTW wrapper with cached plans.
///
/// Conventions: fft() is the unnormalized forward transform
/// X[k] = sum_n x[n] e^{-i 2 pi k n / N}; ifft() applies the 1/N factor so
/// ifft(fft(x)) == x. FFTW_ESTIMATE keeps planning deterministic.
///
/// FFTW plan creation is not thread-safe, and executing a plan on arbitrary
/// caller buffers has alignment constraints, so each cached plan owns its
/// buffers and is guarded by a mutex. Workers contend only on same-size
/// transforms, and the copy in/out is negligible next to the transform.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine engine;
    return engine;
  }

  std::vector<cplx> forward(const std::vector<cplx>& x) { return run(x, FFTW_FORWARD); }

  std::vector<cplx> inverse(const std::vector<cplx>& x) {
    std::vector<cplx> out = run(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (cplx& v : out) v *= scale;
    return out;
  }

 private:
  struct PlanSlot {
    fftw_plan plan = nullptr;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::size_t n = 0;
    std::mutex mutex;

    ~PlanSlot() {
      if (plan) fftw_destroy_plan(plan);
      if (in) fftw_free(in);
      if (out) fftw_free(out);
    }
  };

  std::vector<cplx> run(const std::vector<cplx>& x, int sign) {
    if (x.empty()) return {};
    PlanSlot& slot = acquire(x.size(), sign);
    std::lock_guard<std::mutex> lock(slot.mutex);
    for (std::size_t i = 0; i < x.size(); ++i) {
      slot.in[i][0] = x[i].real();
      slot.in[i][1] = x[i].imag();
    }
    fftw_execute(slot.plan);
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = cplx(slot.out[i][0], slot.out[i][1]);
    return out;
  }

  PlanSlot& acquire(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(table_mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return *it->second;
    auto slot = std::make_unique<PlanSlot>();
    slot->n = n;
    slot->in = fftw_alloc_complex(n);
    slot->out = fftw_alloc_complex(n);
    slot->plan = fftw_plan_dft_1d(static_cast<int>(n), slot->in, slot->out, sign, FFTW_ESTIMATE);
    if (!slot->plan) throw NumericError("FFTW plan creation failed");
    auto [pos, inserted] = plans_.emplace(key, std::move(slot));
    (void)inserted;
    return *pos->second;
  }

  std::mutex table_mutex_;
  std::map<std::pair<std::size_t, int>, std::unique_ptr<PlanSlot>> plans_;
};

inline std::vector<cplx> fft(const std::vector<cplx>& x) {
  return FftEngine::instance().forward(x);
}

inline std::vector<cplx> ifft(const std::vector<cplx>& x) {
  return FftEngine::instance().inverse(x);
}

inline std::vector<cplx> fft_real(const std::vector<double>& x) {
  std::vector<cplx> tmp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = cplx(x[i], 0.0);
  return fft(tmp);
}

/// Magnitude of the analytic signal: zero the negative-frequency half of the
/// spectrum, double the positive half, inverse transform, take |.|. DC and
/// (for even N) the Nyquist bin stay unscaled.
inline std::vector<double> analytic_envelope(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<cplx> spec = fft_real(x);
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < half + (n % 2 ? 1 : 0); ++k) spec[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) spec[k] = cplx(0.0, 0.0);
  const std::vector<cplx> a = ifft(spec);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(a[i]);
  return env;
}

/// Real part of the inverse transform, asserting the imaginary residue is
/// numerically negligible (the conjugate-symmetry contract of real signals).
inline std::vector<double> ifft_expect_real(const std::vector<cplx>& x, double rel_tol = 1e-9) {
  std::vector<cplx> full = ifft(x);
  double re2 = 0.0, im2 = 0.0;
  for (const cplx& v : full) {
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
  }
  if (im2 > rel_tol * rel_tol * (re2 + 1e-300))
    throw NumericError("inverse transform expected to be real");
  std::vector<double> out(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) out[i] = full[i].real();
  return out;
}

}  // namespace vbeam
