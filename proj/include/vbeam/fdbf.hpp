#pragma once

#include "vbeam/fft.hpp"
#include "vbeam/lut.hpp"
#include "vbeam/pulse.hpp"

namespace vbeam {

/// Beam Fourier coefficients on a contiguous band, for one steering angle.
struct BeamSpectrum {
  SteeringAngle angle;
  CoefficientBandIndices band;  // beam coefficients k in [k_lo, k_hi]
  std::vector<cplx> values;     // indexed k - band.k_lo
  double T = 0.0;
  int grid_n = 0;  // samples per record the coefficients refer to

  const cplx& at(int k) const { return values[static_cast<std::size_t>(k - band.k_lo)]; }
};

/// Fourier coefficients of one element record: c[k] = DFT(record)[k] / N for
/// k in [k_lo, k_hi]. This is the full-rate reference path; the low-rate
/// acquisition chain produces the same numbers from fewer samples.
inline std::vector<cplx> element_coefficients(const std::vector<double>& record,
                                              const CoefficientBandIndices& band) {
  const int n = static_cast<int>(record.size());
  if (band.k_lo < 0 || band.k_hi >= n)
    throw ConfigError("coefficient band exceeds the record's DFT grid");
  std::vector<cplx> spec = fft_real(record);
  std::vector<cplx> out(static_cast<std::size_t>(band.count()));
  for (int k = band.k_lo; k <= band.k_hi; ++k)
    out[static_cast<std::size_t>(k - band.k_lo)] = spec[static_cast<std::size_t>(k)] / double(n);
  return out;
}

/// Distorts one element's coefficient band into beam coefficients through the
/// LUT window: chat[k] = sum_l c[k - l] Q_k[l], l in [-L1, L2].
///
/// The element band must cover [k_lo - L2, k_hi + L1] so every window tap
/// reads a real coefficient; interior gaps are a configuration error, never
/// silently zero-filled.
inline std::vector<cplx> element_to_beam_coeffs(const std::vector<cplx>& elem_coeffs,
                                                const CoefficientBandIndices& elem_band,
                                                const DistortionLut& lut, std::size_t angle_i,
                                                std::size_t elem_i,
                                                const CoefficientBandIndices& beam_band) {
  if (elem_coeffs.size() != static_cast<std::size_t>(elem_band.count()))
    throw ConfigError("element coefficient vector does not match its declared band");
  if (beam_band.k_lo < lut.k_first || beam_band.k_hi >= lut.k_first + lut.k_count)
    throw ConfigError("requested beam band exceeds the LUT band");
  if (beam_band.k_lo - lut.l_pos < elem_band.k_lo || beam_band.k_hi + lut.l_neg > elem_band.k_hi)
    throw ConfigError(
        "element band too narrow for the distortion window; widen the band instead of "
        "zero-filling");
  std::vector<cplx> out(static_cast<std::size_t>(beam_band.count()));
  for (int k = beam_band.k_lo; k <= beam_band.k_hi; ++k) {
    const cplx* q = lut.at(angle_i, elem_i, k);
    cplx acc(0.0, 0.0);
    for (int l = -lut.l_neg; l <= lut.l_pos; ++l)
      acc += elem_coeffs[static_cast<std::size_t>(k - l - elem_band.k_lo)] * q[l + lut.l_neg];
    out[static_cast<std::size_t>(k - beam_band.k_lo)] = acc;
  }
  return out;
}

/// Frequency-domain beamformer: averages the distorted element coefficient
/// bands over the active set. `records` follows the active-element order of
/// the geometry the LUT was built from.
inline BeamSpectrum beamform_frequency(const std::vector<std::vector<double>>& records,
                                       const DistortionLut& lut, std::size_t angle_i,
                                       const CoefficientBandIndices& beam_band) {
  if (records.size() != lut.active.size())
    throw ConfigError("record count does not match the LUT active set");
  if (angle_i >= lut.angles.size()) throw ConfigError("angle index outside the LUT angle grid");
  if (records.empty()) throw ConfigError("frequency beamformer needs at least one record");
  const int n = static_cast<int>(records[0].size());

  CoefficientBandIndices elem_band;
  elem_band.k_lo = beam_band.k_lo - lut.l_pos;
  elem_band.k_hi = beam_band.k_hi + lut.l_neg;
  elem_band.peak = beam_band.peak;
  if (elem_band.k_lo < 0 || elem_band.k_hi >= n)
    throw ConfigError("distortion window reaches outside the record's DFT grid");

  BeamSpectrum beam;
  beam.angle = lut.angles[angle_i];
  beam.band = beam_band;
  beam.T = lut.T;
  beam.grid_n = n;
  beam.values.assign(static_cast<std::size_t>(beam_band.count()), cplx(0.0, 0.0));
  for (std::size_t ei = 0; ei < records.size(); ++ei) {
    if (static_cast<int>(records[ei].size()) != n)
      throw ConfigError("element records must share one length");
    const std::vector<cplx> ce = element_coefficients(records[ei], elem_band);
    const std::vector<cplx> cb =
        element_to_beam_coeffs(ce, elem_band, lut, angle_i, ei, beam_band);
    for (std::size_t i = 0; i < beam.values.size(); ++i) beam.values[i] += cb[i];
  }
  const double scale = 1.0 / static_cast<double>(records.size());
  for (cplx& v : beam.values) v *= scale;
  return beam;
}

/// Same as beamform_frequency but the element coefficients are supplied
/// directly (e.g. from the low-rate acquisition chain) instead of full-rate
/// records. elem_coeffs[ei] covers elem_band.
inline BeamSpectrum beamform_frequency_coeffs(const std::vector<std::vector<cplx>>& elem_coeffs,
                                              const CoefficientBandIndices& elem_band,
                                              const DistortionLut& lut, std::size_t angle_i,
                                              const CoefficientBandIndices& beam_band, double T,
                                              int grid_n) {
  if (elem_coeffs.size() != lut.active.size())
    throw ConfigError("coefficient set does not match the LUT active set");
  if (angle_i >= lut.angles.size()) throw ConfigError("angle index outside the LUT angle grid");
  BeamSpectrum beam;
  beam.angle = lut.angles[angle_i];
  beam.band = beam_band;
  beam.T = T;
  beam.grid_n = grid_n;
  beam.values.assign(static_cast<std::size_t>(beam_band.count()), cplx(0.0, 0.0));
  for (std::size_t ei = 0; ei < elem_coeffs.size(); ++ei) {
    const std::vector<cplx> cb =
        element_to_beam_coeffs(elem_coeffs[ei], elem_band, lut, angle_i, ei, beam_band);
    for (std::size_t i = 0; i < beam.values.size(); ++i) beam.values[i] += cb[i];
  }
  const double scale = 1.0 / static_cast<double>(elem_coeffs.size());
  for (cplx& v : beam.values) v *= scale;
  return beam;
}

}  // namespace vbeam
