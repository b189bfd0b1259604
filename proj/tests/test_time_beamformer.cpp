#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "vbeam/phantom.hpp"
#include "vbeam/time_beamformer.hpp"

using namespace vbeam;

namespace {

constexpr double kFs = 18.25e6;
constexpr int kGridN = 1304;

Pulse reference_pulse() { return make_pulse(3e6, 1.4e6, kFs); }

Beam beam_for(const ArrayGeometry& g, const Phantom& ph, const SteeringAngle& angle,
              Interpolation interp = Interpolation::kLinear) {
  const SynthesisResult res = synthesize_element_signals(g, ph, reference_pulse(), kGridN);
  return beamform_time(res.records, g, angle, kFs, interp);
}

}  // namespace

TEST_CASE("aligned echo lands at the reference arrival time") {
  const ArrayGeometry g = oracle::small_grid();
  Phantom ph;
  ph.reflectors.push_back({40e-6, 0.12, -0.08, 1.0});
  const Beam b = beam_for(g, ph, {0.12, -0.08});
  REQUIRE(b.samples.size() == kGridN);

  const Pulse p = reference_pulse();
  const auto it = std::max_element(b.samples.begin(), b.samples.end(),
                                   [](double x, double y) { return x * x < y * y; });
  const double peak_t = static_cast<double>(it - b.samples.begin()) / kFs;
  CHECK(std::abs(peak_t - (40e-6 + p.duration / 2.0)) < 3.0 / kFs);

  SECTION("support window contains the echo and nothing before it") {
    const double t_l = 40e-6;
    double peak = 0.0;
    for (double v : b.samples) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      const double t = static_cast<double>(i) / kFs;
      if (t < t_l - 2.0 / kFs || t >= t_l + 2.0 * p.duration)
        CHECK(std::abs(b.samples[i]) < 0.02 * peak);  // interpolation leakage only
    }
  }
}

TEST_CASE("aligned echo amplitude stays within the first-order ratio bounds") {
  const ArrayGeometry g = oracle::small_grid();
  const Pulse p = reference_pulse();
  Phantom ph;
  ph.reflectors.push_back({40e-6, 0.1, 0.05, 1.0});
  const Beam b = beam_for(g, ph, {0.1, 0.05}, Interpolation::kSinc);

  // The beam echo is the pulse scaled by the mean alignment ratio; compare
  // peak magnitudes since the pulse peaks mid-envelope.
  const double pulse_peak =
      *std::max_element(p.samples.begin(), p.samples.end(),
                        [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double beam_peak =
      *std::max_element(b.samples.begin(), b.samples.end(),
                        [](double x, double y) { return std::abs(x) < std::abs(y); });
  const double ratio = std::abs(beam_peak) / std::abs(pulse_peak);
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.1);
}

TEST_CASE("beam is gated to zero at and beyond the support bound") {
  const ArrayGeometry g = oracle::small_grid();
  Phantom ph;
  ph.reflectors.push_back({40e-6, 0.0, 0.0, 1.0});
  const Beam b = beam_for(g, ph, {0.3, -0.2});
  const double tb = beam_support(g, {0.3, -0.2}, kGridN / kFs);
  CHECK(b.support == Catch::Approx(tb));
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    if (static_cast<double>(i) / kFs >= tb) CHECK(b.samples[i] == 0.0);
  }
}

TEST_CASE("steering away from the reflector suppresses the echo") {
  const ArrayGeometry g = oracle::small_grid(16, 16);
  Phantom ph;
  ph.reflectors.push_back({40e-6, 0.0, 0.0, 1.0});
  const SynthesisResult res = synthesize_element_signals(g, ph, reference_pulse(), kGridN);
  const Beam on = beamform_time(res.records, g, {0.0, 0.0}, kFs);
  const Beam off = beamform_time(res.records, g, {0.35, 0.0}, kFs);
  auto peak = [](const Beam& b) {
    double m = 0.0;
    for (double v : b.samples) m = std::max(m, std::abs(v));
    return m;
  };
  CHECK(peak(off) < 0.35 * peak(on));
}

TEST_CASE("interpolation modes agree on placement; sinc is more faithful") {
  const ArrayGeometry g = oracle::small_grid();
  const Pulse p = reference_pulse();
  Phantom ph;
  ph.reflectors.push_back({40e-6, 0.07, 0.03, 1.0});
  const SynthesisResult res = synthesize_element_signals(g, ph, p, kGridN);
  const Beam lin = beamform_time(res.records, g, {0.07, 0.03}, kFs, Interpolation::kLinear);
  const Beam snc = beamform_time(res.records, g, {0.07, 0.03}, kFs, Interpolation::kSinc);

  // Same placement: the traces differ only by linear-interpolation droop,
  // which at ~6 samples per carrier cycle is of order 10 percent RMS. A
  // misplacement bug would push this to order one.
  CHECK(relative_l2(lin.samples, snc.samples) < 0.15);

  // Fidelity: compare each against an ideally aligned reference echo built by
  // re-synthesizing the pulse at t_l on the beam grid.
  Phantom ideal;
  ideal.reflectors.push_back({40e-6, 0.07, 0.03, 1.0});
  ArrayGeometry point = oracle::small_grid(1, 1);  // single central element
  const SynthesisResult ref = synthesize_element_signals(point, ideal, p, kGridN);
  auto err = [&](const Beam& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      const double d = b.samples[i] - ref.records[0][i];
      num += d * d;
      den += ref.records[0][i] * ref.records[0][i];
    }
    return std::sqrt(num / den);
  };
  CHECK(err(snc) < err(lin));
  CHECK(err(snc) < 0.05);
}

TEST_CASE("reads past the record end contribute zero") {
  const ArrayGeometry g = oracle::small_grid(4, 4);
  // Constant-one records: any in-range read returns 1, so beam samples near
  // the end of the support window drop below 1 exactly when some element
  // would need data past T.
  std::vector<std::vector<double>> ones(g.active.size(), std::vector<double>(kGridN, 1.0));
  const Beam b = beamform_time(ones, g, {0.25, 0.0}, kFs);
  const double tb = b.support;
  bool saw_partial = false;
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const double t = static_cast<double>(i) / kFs;
    if (t < tb - 1e-6) {
      CHECK(b.samples[i] == Catch::Approx(1.0).margin(1e-9));
    } else if (t < tb && b.samples[i] < 1.0 - 1e-9) {
      saw_partial = true;  // some element already ran out of data
    }
  }
  (void)saw_partial;  // presence depends on grid rounding; the gate is the contract
}

TEST_CASE("record count must match the active set") {
  const ArrayGeometry g = oracle::small_grid(4, 4);
  std::vector<std::vector<double>> records(3, std::vector<double>(kGridN, 0.0));
  CHECK_THROWS_AS(beamform_time(records, g, {0.0, 0.0}, kFs), ConfigError);
}
