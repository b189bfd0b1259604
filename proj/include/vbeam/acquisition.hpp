#pragma once

#include "vbeam/fft.hpp"
#include "vbeam/pulse.hpp"

namespace vbeam {

/// One element's low-rate capture: the retained samples of the
/// demodulate-filter-decimate chain plus the band they represent.
struct LowRateCapture {
  CoefficientBandIndices band;  // element coefficient indices retained
  int grid_n = 0;               // full-rate DFT grid size N
  int nu = 0;                   // retained low-rate samples (>= band.count())
  std::vector<cplx> samples;    // the nu stored samples
};

/// Element coefficient range consumed by the distortion window for a beam
/// band [k1, k2]: the window sum reads c[k - l] for l in [-L1, L2], so the
/// union over k is [k1 - L2, k2 + L1]. Counting the integers in that range
/// gives kappa + L1 + L2 + 1; see sample_budget for the convention used in
/// rate accounting.
inline CoefficientBandIndices element_band_for(const CoefficientBandIndices& beam_band, int l_neg,
                                               int l_pos) {
  CoefficientBandIndices b;
  b.k_lo = beam_band.k_lo - l_pos;
  b.k_hi = beam_band.k_hi + l_neg;
  b.peak = beam_band.peak;
  return b;
}

/// Simulated low-rate front end. Demodulates the record so the band starts at
/// DC, low-pass filters by discarding all other DFT bins, and decimates to nu
/// complex samples. The retained samples carry exactly the band's Fourier
/// coefficients: an nu-point DFT restores them with no approximation beyond
/// floating-point roundoff.
inline LowRateCapture acquire_band(const std::vector<double>& record,
                                   const CoefficientBandIndices& band, int nu = 0) {
  const int n = static_cast<int>(record.size());
  if (band.k_lo < 0 || band.k_hi >= n || band.k_lo > band.k_hi)
    throw ConfigError("acquisition band must lie inside [0, N-1]");
  if (nu == 0) nu = band.count();
  if (nu < band.count())
    throw ConfigError("retained sample count smaller than the coefficient band");

  std::vector<cplx> mixed(static_cast<std::size_t>(n));
  const double w = -2.0 * kPi * band.k_lo / n;
  for (int i = 0; i < n; ++i) mixed[static_cast<std::size_t>(i)] = record[i] * std::polar(1.0, w * i);
  const std::vector<cplx> spec = fft(mixed);

  std::vector<cplx> kept(static_cast<std::size_t>(nu), cplx(0.0, 0.0));
  for (int j = 0; j < band.count(); ++j) kept[static_cast<std::size_t>(j)] = spec[static_cast<std::size_t>(j)] / double(n);

  LowRateCapture cap;
  cap.band = band;
  cap.grid_n = n;
  cap.nu = nu;
  cap.samples = ifft(kept);  // nu low-rate samples; inverse of band_coefficients' DFT
  return cap;
}

/// Fourier coefficients c[k], k in the capture's band, recovered from the
/// retained samples by an exact nu-point DFT.
inline std::vector<cplx> band_coefficients(const LowRateCapture& cap) {
  const std::vector<cplx> spec = fft(cap.samples);
  return std::vector<cplx>(spec.begin(), spec.begin() + cap.band.count());
}

enum class BeamformMethod { kTime, kFrequency };

/// Convention for the per-record retained-sample count nu of the
/// frequency-domain path. kFormula is kappa + L1 + L2, which also equals the
/// number of distinct coefficient indices a contiguous band of kappa bins
/// consumes: |[k1 - L2, k2 + L1]| = (kappa - 1) + L1 + L2 + 1. kInclusive is
/// one more; it measures the window by its width in bins (kappa, not
/// kappa - 1 spacings) and counts both endpoints, which is the accounting
/// behind most of the tabulated reference budgets. Both are supported so
/// either total can be reproduced; kFormula is the default.
enum class NuConvention { kFormula, kInclusive };

inline std::uint64_t nu_samples(int kappa, int l_neg, int l_pos,
                                NuConvention conv = NuConvention::kFormula) {
  std::uint64_t nu = static_cast<std::uint64_t>(kappa) + l_neg + l_pos;
  if (conv == NuConvention::kInclusive) nu += 1;
  return nu;
}

/// Samples per volume: lines x elements x per-record samples, where the
/// per-record count is the full grid N for the time-domain path and nu for
/// the frequency-domain path.
inline std::uint64_t sample_budget(BeamformMethod method, std::uint64_t n_rx_eff,
                                   std::uint64_t lines, std::uint64_t grid_n, int kappa,
                                   int l_neg, int l_pos,
                                   NuConvention conv = NuConvention::kFormula) {
  if (n_rx_eff == 0 || lines == 0 || grid_n == 0)
    throw ConfigError("sample budget requires positive counts");
  if (method == BeamformMethod::kTime) return lines * n_rx_eff * grid_n;
  return lines * n_rx_eff * nu_samples(kappa, l_neg, l_pos, conv);
}

}  // namespace vbeam
