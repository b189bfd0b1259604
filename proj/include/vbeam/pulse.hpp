#pragma once

#include "vbeam/common.hpp"
#include "vbeam/fft.hpp"

namespace vbeam {

/// Transmit pulse: Gaussian-modulated cosine, compactly supported on
/// [0, duration), unit energy (sum h^2 * T_s == 1).
struct Pulse {
  double f0 = 3e6;         // carrier, Hz
  double bandwidth = 1.4e6;  // -6 dB two-sided, Hz
  double fs = 18.25e6;     // sample rate, Hz
  double duration = 0.0;   // seconds, = samples.size() / fs
  double sigma_t = 0.0;    // Gaussian envelope std, seconds
  std::vector<double> samples;

  double sample_period() const { return 1.0 / fs; }
};

/// Builds the pulse from its -6 dB bandwidth. The envelope is truncated where
/// it falls to 1e-4 of its peak and the result is shifted to start at 0.
inline Pulse make_pulse(double f0, double bandwidth, double fs) {
  if (!(bandwidth > 0.0) || !(bandwidth < 2.0 * f0))
    throw ConfigError("pulse bandwidth must lie in (0, 2 f0)");
  if (!(2.0 * f0 < fs))
    throw ConfigError("sample rate must exceed twice the carrier");
  if (fs <= 2.0 * (f0 + bandwidth / 2.0))
    throw ConfigError("sample rate too low for the pulse's upper band edge");

  Pulse p;
  p.f0 = f0;
  p.bandwidth = bandwidth;
  p.fs = fs;
  // -6 dB two-sided width of exp(-f^2 / (2 sigma_f^2)) is
  // 2 sigma_f sqrt(2 ln 10^0.3).
  const double sigma_f = (bandwidth / 2.0) / std::sqrt(2.0 * std::log(std::pow(10.0, 0.3)));
  p.sigma_t = 1.0 / (2.0 * kPi * sigma_f);

  const double ts = 1.0 / fs;
  const double half = p.sigma_t * std::sqrt(2.0 * std::log(1e4));  // envelope 1e-4 cut
  const int n = static_cast<int>(2.0 * half / ts) + 1;
  const double center = 0.5 * (n - 1) * ts;
  p.samples.resize(n);
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = i * ts - center;
    p.samples[i] = std::exp(-t * t / (2.0 * p.sigma_t * p.sigma_t)) * std::cos(2.0 * kPi * f0 * t);
    energy += p.samples[i] * p.samples[i];
  }
  const double scale = 1.0 / std::sqrt(energy * ts);
  for (double& v : p.samples) v *= scale;
  p.duration = n * ts;
  return p;
}

/// Fourier-series coefficients of the pulse over the period N/fs:
/// h[k] = (1/N) sum_n h[n] e^{-i 2 pi k n / N}, with the pulse zero-padded.
inline std::vector<cplx> pulse_spectrum(const Pulse& p, int grid_n) {
  if (static_cast<int>(p.samples.size()) > grid_n)
    throw ConfigError("pulse longer than the sample grid");
  std::vector<cplx> padded(grid_n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < p.samples.size(); ++i) padded[i] = cplx(p.samples[i], 0.0);
  std::vector<cplx> spec = fft(padded);
  const double inv_n = 1.0 / grid_n;
  for (cplx& v : spec) v *= inv_n;
  return spec;
}

/// Contiguous one-sided coefficient band [k_lo, k_hi] where the pulse
/// spectrum magnitude stays above cutoff_db relative to its peak. Conjugate
/// symmetry is implied; only positive-frequency bins are reported.
struct CoefficientBandIndices {
  int k_lo = 0;
  int k_hi = 0;
  int peak = 0;
  int count() const { return k_hi - k_lo + 1; }
};

inline CoefficientBandIndices effective_band(const Pulse& p, int grid_n,
                                             double cutoff_db = -24.0) {
  const std::vector<cplx> spec = pulse_spectrum(p, grid_n);
  const int half = grid_n / 2;
  int peak = 1;
  double peak_mag = 0.0;
  for (int k = 1; k < half; ++k) {
    const double mag = std::abs(spec[k]);
    if (mag > peak_mag) {
      peak_mag = mag;
      peak = k;
    }
  }
  if (peak_mag <= 0.0) throw NumericError("pulse spectrum is identically zero");
  const double threshold = peak_mag * std::pow(10.0, cutoff_db / 20.0);
  int lo = peak, hi = peak;
  while (lo - 1 >= 1 && std::abs(spec[lo - 1]) > threshold) --lo;
  while (hi + 1 < half && std::abs(spec[hi + 1]) > threshold) ++hi;
  return {lo, hi, peak};
}

/// Centered contiguous coefficient subset of size count within the band.
inline std::vector<int> centered_subset(const CoefficientBandIndices& band, int count) {
  if (count < 1 || count > band.count())
    throw ConfigError("coefficient subset size outside the effective band");
  const int center = (band.k_lo + band.k_hi) / 2;
  int start = center - (count - 1) / 2;
  start = std::max(band.k_lo, std::min(start, band.k_hi - count + 1));
  std::vector<int> out(count);
  for (int i = 0; i < count; ++i) out[i] = start + i;
  return out;
}

}  // namespace vbeam
