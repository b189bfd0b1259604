#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"
#include "vbeam/acquisition.hpp"

using namespace vbeam;

namespace {

std::vector<double> random_record(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (double& v : out) v = dist(rng);
  return out;
}

}  // namespace

TEST_CASE("element band extends the beam band by the window extents") {
  const CoefficientBandIndices beam{115, 314, 214};
  const CoefficientBandIndices elem = element_band_for(beam, 10, 10);
  CHECK(elem.k_lo == 105);
  CHECK(elem.k_hi == 324);
  CHECK(elem.count() == 220);

  const CoefficientBandIndices lop = element_band_for(beam, 3, 7);
  CHECK(lop.k_lo == 115 - 7);  // window reads k - l down to k - L2
  CHECK(lop.k_hi == 314 + 3);  // and up to k + L1
}

TEST_CASE("low-rate capture carries the exact coefficient band") {
  const std::vector<double> record = random_record(1304, 42);
  const CoefficientBandIndices band{105, 324, 214};
  const LowRateCapture cap = acquire_band(record, band);
  CHECK(cap.nu == 220);
  CHECK(cap.samples.size() == 220);
  CHECK(cap.grid_n == 1304);

  const std::vector<cplx> coeffs = band_coefficients(cap);
  REQUIRE(coeffs.size() == 220);
  for (int k : {105, 106, 214, 323, 324}) {
    const cplx direct = oracle::direct_dft_bin(record, k);
    const cplx got = coeffs[static_cast<std::size_t>(k - 105)];
    CHECK(std::abs(got - direct) < 1e-12);
    // The contract allows 1% relative; the chain is exact to roundoff.
    CHECK(std::abs(got - direct) < 0.01 * std::abs(direct) + 1e-15);
  }
}

TEST_CASE("extra retained samples change nothing but the sample count") {
  const std::vector<double> record = random_record(1304, 43);
  const CoefficientBandIndices band{115, 314, 214};
  const LowRateCapture tight = acquire_band(record, band);
  const LowRateCapture padded = acquire_band(record, band, 256);
  CHECK(padded.nu == 256);
  CHECK(padded.samples.size() == 256);
  const std::vector<cplx> a = band_coefficients(tight);
  const std::vector<cplx> b = band_coefficients(padded);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("capture rejects invalid bands and sample counts") {
  const std::vector<double> record = random_record(1304, 44);
  CHECK_THROWS_AS(acquire_band(record, CoefficientBandIndices{-1, 100, 50}), ConfigError);
  CHECK_THROWS_AS(acquire_band(record, CoefficientBandIndices{100, 1304, 200}), ConfigError);
  CHECK_THROWS_AS(acquire_band(record, CoefficientBandIndices{200, 100, 150}), ConfigError);
  CHECK_THROWS_AS(acquire_band(record, CoefficientBandIndices{115, 314, 214}, 100), ConfigError);
}

TEST_CASE("retained-sample conventions differ by exactly one") {
  CHECK(nu_samples(200, 10, 10) == 220);
  CHECK(nu_samples(200, 10, 10, NuConvention::kInclusive) == 221);
  CHECK(nu_samples(100, 10, 10, NuConvention::kInclusive) == 121);
  CHECK(nu_samples(67, 10, 10, NuConvention::kInclusive) == 88);
}

TEST_CASE("closed-form convention equals the brute-force consumed set") {
  // The union of indices a contiguous band of kappa bins touches after
  // widening by [L1, L2] has kappa + L1 + L2 members; the inclusive
  // width-based accounting counts one more.
  for (int kappa : {200, 100, 67, 5}) {
    std::vector<int> bins(static_cast<std::size_t>(kappa));
    for (int i = 0; i < kappa; ++i) bins[static_cast<std::size_t>(i)] = 150 + i;
    const std::set<int> consumed = oracle::consumed_indices(bins, 10, 10);
    CHECK(consumed.size() == nu_samples(kappa, 10, 10));
    CHECK(consumed.size() + 1 == nu_samples(kappa, 10, 10, NuConvention::kInclusive));
    CHECK(*consumed.begin() == 150 - 10);
    CHECK(*consumed.rbegin() == 150 + kappa - 1 + 10);
  }
}

TEST_CASE("volume sample budgets reproduce the reference table") {
  const std::uint64_t lines = 441;
  const std::uint64_t full = 1024, diag = 64;
  const std::uint64_t n = 1304;
  CHECK(sample_budget(BeamformMethod::kTime, full, lines, n, 0, 0, 0) == 588865536ull);
  CHECK(sample_budget(BeamformMethod::kTime, diag, lines, n, 0, 0, 0) == 36804096ull);
  CHECK(sample_budget(BeamformMethod::kFrequency, full, lines, n, 100, 10, 10,
                      NuConvention::kInclusive) == 54641664ull);
  CHECK(sample_budget(BeamformMethod::kFrequency, full, lines, n, 67, 10, 10,
                      NuConvention::kInclusive) == 39739392ull);
  CHECK(sample_budget(BeamformMethod::kFrequency, full, lines, n, 200, 10, 10,
                      NuConvention::kInclusive) == 99800064ull);
  CHECK(sample_budget(BeamformMethod::kFrequency, full, lines, n, 200, 10, 10) == 99348480ull);
  CHECK_THROWS_AS(sample_budget(BeamformMethod::kTime, 0, lines, n, 0, 0, 0), ConfigError);
}
