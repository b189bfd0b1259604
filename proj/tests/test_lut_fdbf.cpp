#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "support/oracles.hpp"
#include "vbeam/fdbf.hpp"
#include "vbeam/lut.hpp"
#include "vbeam/phantom.hpp"
#include "vbeam/recovery.hpp"
#include "vbeam/time_beamformer.hpp"

using namespace vbeam;

namespace {
constexpr double kFs = 18.25e6;
constexpr int kGridN = 1304;
constexpr double kT = kGridN / kFs;
}  // namespace

TEST_CASE("Gauss-Legendre rules integrate their exactness degree") {
  std::vector<double> x, w;
  gauss_legendre(12, x, w);
  REQUIRE(x.size() == 12);
  double wsum = 0.0, p22 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    wsum += w[i];
    p22 += w[i] * std::pow(x[i], 22);
    CHECK(x[i] == Catch::Approx(-x[x.size() - 1 - i]).margin(1e-15));  // symmetric nodes
  }
  CHECK(wsum == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(p22 == Catch::Approx(2.0 / 23.0).epsilon(1e-13));  // exact through degree 23
}

TEST_CASE("distortion kernel obeys its indicator support") {
  const ArrayGeometry g = oracle::reference_grid();
  const SteeringAngle angle{0.28, 0.36};
  const DirectionCosines d = direction_cosines(angle);
  const double tb = beam_support(g, angle, kT);
  const double lo = g.gamma_norm(7, 21);
  const double hi = delay_tau(g, 7, 21, d, tb);
  CHECK(distortion_function(g, 7, 21, angle, 300, lo * 0.999, kT, tb) == cplx(0.0, 0.0));
  CHECK(distortion_function(g, 7, 21, angle, 300, hi * 1.001, kT, tb) == cplx(0.0, 0.0));
  CHECK(std::abs(distortion_function(g, 7, 21, angle, 300, 0.5 * (lo + hi), kT, tb)) > 0.0);
}

TEST_CASE("distortion coefficients match the 30-digit reference integrals") {
  const ArrayGeometry g = oracle::reference_grid();
  LutBuildParams params;  // window [-10, 10]
  const DistortionLut lut = build_lut(g, kT, {{0.28, 0.36}}, 300, 1, params);
  REQUIRE(lut.supports.size() == 1);
  CHECK(lut.supports[0] == Catch::Approx(oracle::kSupportSteered).epsilon(1e-14));

  const std::size_t ei = 7 * 32 + 21;  // full active set keeps grid order
  REQUIRE(lut.active[ei] == static_cast<int>(ei));
  const cplx* q = lut.at(0, ei, 300);
  CHECK(std::abs(q[10] - oracle::kQ300_l0) < 1e-12);    // l = 0
  CHECK(std::abs(q[0] - oracle::kQ300_lm10) < 1e-12);   // l = -10
  CHECK(std::abs(q[11] - oracle::kQ300_lp1) < 1e-12);   // l = +1
}

TEST_CASE("quadrature agrees with dense sampling of the pointwise kernel") {
  const ArrayGeometry g = oracle::small_grid();
  const SteeringAngle angle{0.15, -0.2};
  const double tb = beam_support(g, angle, kT);
  LutBuildParams params;
  for (int k : {120, 214, 300}) {
    const DistortionLut lut = build_lut(g, kT, {angle}, k, 1, params);
    for (std::size_t ei : {std::size_t(0), std::size_t(27), std::size_t(44)}) {
      const int m = g.active[ei] / g.cols, n = g.active[ei] % g.cols;
      const std::vector<cplx> dense =
          oracle::dense_lut_row(g, m, n, angle, k, kT, tb, 1 << 17);
      const cplx* q = lut.at(0, ei, k);
      for (int l = -10; l <= 10; ++l) {
        const cplx ref = dense[static_cast<std::size_t>((l + (1 << 17)) % (1 << 17))];
        CHECK(std::abs(q[l + 10] - ref) < 2e-4);
      }
    }
  }
}

TEST_CASE("out-of-window tail is small when verification is requested") {
  const ArrayGeometry g = oracle::small_grid();
  LutBuildParams params;
  params.verify_tail = true;
  const DistortionLut lut = build_lut(g, kT, {{0.1, 0.05}}, 115, 200, params);
  CHECK(lut.tail_ratio > 0.0);
  CHECK(lut.tail_ratio < 0.15);
  LutBuildParams plain;
  const DistortionLut unverified = build_lut(g, kT, {{0.1, 0.05}}, 115, 1, plain);
  CHECK(unverified.tail_ratio == -1.0);
}

TEST_CASE("table files round trip and reject foreign content") {
  const ArrayGeometry g = oracle::small_grid(4, 4);
  LutBuildParams params;
  const DistortionLut lut = build_lut(g, kT, {{0.0, 0.0}, {0.1, -0.1}}, 200, 3, params);
  const std::string path = "test_lut_roundtrip.vbq1";
  write_lut(path, lut);
  const DistortionLut back = read_lut(path);
  CHECK(back.config_hash == lut.config_hash);
  CHECK(back.k_first == lut.k_first);
  CHECK(back.k_count == lut.k_count);
  CHECK(back.rows == lut.rows);
  CHECK(back.active == lut.active);
  REQUIRE(back.values.size() == lut.values.size());
  for (std::size_t i = 0; i < lut.values.size(); ++i) CHECK(back.values[i] == lut.values[i]);
  REQUIRE(back.supports.size() == lut.supports.size());
  CHECK(back.supports[0] == lut.supports[0]);

  std::ofstream bad("test_lut_bad.vbq1", std::ios::binary);
  bad << "not a table";
  bad.close();
  CHECK_THROWS_AS(read_lut("test_lut_bad.vbq1"), ConfigError);
  std::remove(path.c_str());
  std::remove("test_lut_bad.vbq1");
}

TEST_CASE("element coefficients equal the direct DFT subset") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> record(kGridN);
  for (double& v : record) v = dist(rng);
  const CoefficientBandIndices band{115, 314, 214};
  const std::vector<cplx> coeffs = element_coefficients(record, band);
  REQUIRE(coeffs.size() == 200);
  for (int k : {115, 116, 214, 313, 314}) {
    const cplx direct = oracle::direct_dft_bin(record, k);
    CHECK(std::abs(coeffs[static_cast<std::size_t>(k - 115)] - direct) < 1e-12);
  }
  CHECK_THROWS_AS(element_coefficients(record, CoefficientBandIndices{-1, 10, 5}), ConfigError);
  CHECK_THROWS_AS(element_coefficients(record, CoefficientBandIndices{0, kGridN, 5}),
                  ConfigError);
}

TEST_CASE("window application rejects narrow element bands and foreign k") {
  const ArrayGeometry g = oracle::small_grid(4, 4);
  LutBuildParams params;
  const DistortionLut lut = build_lut(g, kT, {{0.0, 0.0}}, 200, 5, params);
  const CoefficientBandIndices beam_band{200, 204, 202};
  const CoefficientBandIndices narrow{195, 209, 202};  // needs [190, 214]
  std::vector<cplx> coeffs(static_cast<std::size_t>(narrow.count()), cplx(1.0, 0.0));
  CHECK_THROWS_AS(element_to_beam_coeffs(coeffs, narrow, lut, 0, 0, beam_band), ConfigError);

  const CoefficientBandIndices wide{190, 214, 202};
  std::vector<cplx> ok(static_cast<std::size_t>(wide.count()), cplx(1.0, 0.0));
  CHECK_NOTHROW(element_to_beam_coeffs(ok, wide, lut, 0, 0, beam_band));
  const CoefficientBandIndices outside{199, 205, 202};  // k=199 not in the LUT
  CHECK_THROWS_AS(element_to_beam_coeffs(ok, wide, lut, 0, 0, outside), ConfigError);
}

TEST_CASE("window application matches a hand-rolled convolution") {
  const ArrayGeometry g = oracle::small_grid(4, 4);
  LutBuildParams params;
  const DistortionLut lut = build_lut(g, kT, {{0.05, -0.03}}, 200, 3, params);
  const CoefficientBandIndices beam_band{200, 202, 201};
  const CoefficientBandIndices elem_band{190, 212, 201};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<cplx> coeffs(static_cast<std::size_t>(elem_band.count()));
  for (cplx& v : coeffs) v = cplx(dist(rng), dist(rng));
  const std::vector<cplx> out =
      element_to_beam_coeffs(coeffs, elem_band, lut, 0, 2, beam_band);
  for (int k = 200; k <= 202; ++k) {
    const cplx* q = lut.at(0, 2, k);
    cplx acc(0.0, 0.0);
    for (int l = -10; l <= 10; ++l)
      acc += coeffs[static_cast<std::size_t>(k - l - elem_band.k_lo)] * q[l + 10];
    CHECK(std::abs(out[static_cast<std::size_t>(k - 200)] - acc) < 1e-14);
  }
}

TEST_CASE("frequency-domain beam matches the time-domain beam in band") {
  const ArrayGeometry g = oracle::small_grid();
  const Pulse pulse = make_pulse(3e6, 1.4e6, kFs);
  Phantom ph;
  ph.reflectors.push_back({33.766e-6, 0.0, 0.0, 1.0});
  ph.reflectors.push_back({40.909e-6, 0.0, 0.0, 1.0});
  ph.reflectors.push_back({48.052e-6, 0.0, 0.0, 1.0});
  const SynthesisResult res = synthesize_element_signals(g, ph, pulse, kGridN);

  const SteeringAngle angle{0.0, 0.0};
  const CoefficientBandIndices band = effective_band(pulse, kGridN);
  LutBuildParams params;
  const DistortionLut lut = build_lut(g, kT, {angle}, band.k_lo, band.count(), params);
  const BeamSpectrum spec = beamform_frequency(res.records, lut, 0, band);
  const Beam freq = beam_from_full_band(spec, band);

  const Beam time = beamform_time(res.records, g, angle, kFs, Interpolation::kSinc);
  const std::vector<double> time_band =
      oracle::band_project(time.samples, band.k_lo, band.k_hi);

  const std::size_t gate = static_cast<std::size_t>(lut.supports[0] * kFs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < gate; ++i) {
    const double d = freq.samples[i] - time_band[i];
    num += d * d;
    den += time_band[i] * time_band[i];
  }
  CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("spectra from records and from supplied coefficients coincide") {
  const ArrayGeometry g = oracle::small_grid(4, 4);
  const Pulse pulse = make_pulse(3e6, 1.4e6, kFs);
  Phantom ph;
  ph.reflectors.push_back({40e-6, 0.0, 0.0, 1.0});
  const SynthesisResult res = synthesize_element_signals(g, ph, pulse, kGridN);
  const CoefficientBandIndices band = effective_band(pulse, kGridN);
  LutBuildParams params;
  const DistortionLut lut = build_lut(g, kT, {{0.0, 0.0}}, band.k_lo, band.count(), params);

  const BeamSpectrum direct = beamform_frequency(res.records, lut, 0, band);

  CoefficientBandIndices elem_band;
  elem_band.k_lo = band.k_lo - params.l_pos;
  elem_band.k_hi = band.k_hi + params.l_neg;
  elem_band.peak = band.peak;
  std::vector<std::vector<cplx>> coeffs;
  for (const std::vector<double>& rec : res.records)
    coeffs.push_back(element_coefficients(rec, elem_band));
  const BeamSpectrum via_coeffs =
      beamform_frequency_coeffs(coeffs, elem_band, lut, 0, band, kT, kGridN);

  REQUIRE(direct.values.size() == via_coeffs.values.size());
  for (std::size_t i = 0; i < direct.values.size(); ++i)
    CHECK(std::abs(direct.values[i] - via_coeffs.values[i]) < 1e-12);
}
