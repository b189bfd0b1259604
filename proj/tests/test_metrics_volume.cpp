#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "support/oracles.hpp"
#include "vbeam/metrics.hpp"
#include "vbeam/volume.hpp"

using namespace vbeam;

namespace {

constexpr double kFs = 18.25e6;

Volume blank_volume(std::vector<double> tx, std::vector<double> ty, int samples) {
  Volume v;
  v.theta_x = std::move(tx);
  v.theta_y = std::move(ty);
  v.samples = samples;
  v.fs = kFs;
  v.T = samples / kFs;
  v.speed_of_sound = 1540.0;
  v.allocate();
  return v;
}

/// RF trace: carrier under a Gaussian envelope centered at `center` samples.
std::vector<double> gaussian_rf(int samples, double center, double sigma, double amp) {
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double x = (i - center) / sigma;
    out[static_cast<std::size_t>(i)] =
        amp * std::exp(-0.5 * x * x) * std::cos(2.0 * kPi * 0.16 * (i - center));
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace

TEST_CASE("volume indexing and beam round trip") {
  Volume v = blank_volume({-0.1, 0.0, 0.1}, {-0.05, 0.05}, 16);
  CHECK(v.nx() == 3);
  CHECK(v.ny() == 2);
  std::vector<double> beam(16);
  for (int i = 0; i < 16; ++i) beam[static_cast<std::size_t>(i)] = i * 0.5;
  v.set_beam(2, 1, beam);
  const std::vector<double> back = v.beam(2, 1);
  for (int i = 0; i < 16; ++i)
    CHECK(back[static_cast<std::size_t>(i)] == static_cast<float>(i * 0.5));
  CHECK(v.beam(0, 0)[5] == 0.0);
  CHECK_THROWS_AS(v.set_beam(0, 0, std::vector<double>(15)), ConfigError);

  CHECK(v.depth_of_sample(100) == Catch::Approx(1540.0 * (100.0 / kFs) / 2.0));
  CHECK(v.sample_of_depth(v.depth_of_sample(100)) == Catch::Approx(100.0));
}

TEST_CASE("volume files round trip exactly") {
  Volume v = blank_volume(linspace(-0.2, 0.2, 4), {0.0}, 64);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (float& x : v.voxels) x = static_cast<float>(dist(rng));
  const std::string path = "test_volume_roundtrip.vbv1";
  write_volume(path, v);
  const Volume back = read_volume(path);
  CHECK(back.samples == v.samples);
  CHECK(back.fs == v.fs);
  CHECK(back.speed_of_sound == v.speed_of_sound);
  CHECK(back.theta_x == v.theta_x);
  CHECK(back.theta_y == v.theta_y);
  CHECK(back.voxels == v.voxels);

  std::ofstream bad("test_volume_bad.vbv1", std::ios::binary);
  bad << "nope";
  bad.close();
  CHECK_THROWS_AS(read_volume("test_volume_bad.vbv1"), ConfigError);
  std::remove(path.c_str());
  std::remove("test_volume_bad.vbv1");
}

TEST_CASE("log compression maps the display range to [0, 1]") {
  CHECK(log_compress(1.0, 1.0, 40.0) == 1.0);
  CHECK(log_compress(0.01, 1.0, 40.0) == Catch::Approx(0.0));          // -40 dB floor
  CHECK(log_compress(0.1, 1.0, 40.0) == Catch::Approx(0.5));           // -20 dB midpoint
  CHECK(log_compress(1e-9, 1.0, 40.0) == 0.0);                         // clamped below
  CHECK(log_compress(2.0, 1.0, 40.0) == 1.0);                          // clamped above
  CHECK(log_compress(0.5, 0.0, 40.0) == 0.0);                          // empty volume
}

TEST_CASE("nearest grid index") {
  const std::vector<double> grid{-0.2, -0.1, 0.0, 0.1, 0.2};
  CHECK(nearest_index(grid, 0.0) == 2);
  CHECK(nearest_index(grid, 0.26) == 4);
  CHECK(nearest_index(grid, -1.0) == 0);
  CHECK(nearest_index(grid, 0.049) == 2);
}

TEST_CASE("width estimation is exact on a triangle and a Gaussian") {
  const std::vector<double> pos = linspace(0.0, 10.0, 11);
  std::vector<double> tri(11, 0.0);
  for (int i = 0; i <= 10; ++i) tri[static_cast<std::size_t>(i)] = 1.0 - std::abs(i - 5) / 5.0;
  // Level 1/sqrt(2): crossings at 5 +- 5 (1 - 1/sqrt(2)).
  CHECK(curve_fwhm(pos, tri) == Catch::Approx(10.0 * (1.0 - 1.0 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(curve_fwhm(pos, tri, 0.5) == Catch::Approx(5.0).epsilon(1e-12));

  const int n = 4001;
  const std::vector<double> x = linspace(-10.0, 10.0, n);
  std::vector<double> gauss(static_cast<std::size_t>(n));
  const double sigma = 1.7;
  for (int i = 0; i < n; ++i)
    gauss[static_cast<std::size_t>(i)] =
        std::exp(-0.5 * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] /
                 (sigma * sigma));
  CHECK(curve_fwhm(x, gauss) == Catch::Approx(2.0 * sigma * std::sqrt(std::log(2.0))).epsilon(1e-4));
  CHECK(curve_fwhm(x, gauss, 0.5) ==
        Catch::Approx(2.0 * sigma * std::sqrt(2.0 * std::log(2.0))).epsilon(1e-4));

  CHECK_THROWS_AS(curve_fwhm(pos, std::vector<double>(11, 0.0)), NumericError);
  CHECK_THROWS_AS(curve_fwhm({0.0, 1.0, 2.0}, {0.9, 1.0, 0.95}), NumericError);
}

TEST_CASE("side-lobe statistics on a hand-built curve") {
  PsfReport rep;
  rep.positions = linspace(0.0, 8.0, 9);
  rep.curve = {0.001, 0.05, 0.001, 0.3, 1.0, 0.3, 0.001, 0.02, 0.001};
  metrics_detail::fill_side_lobes(rep);
  // Side region: indices {0, 1} and {7, 8} outside the first sub -20 dB minima.
  const double mean_power = (1e-6 + 0.05 * 0.05 + 0.02 * 0.02 + 1e-6) / 4.0;
  CHECK(rep.avg_side_lobe_db == Catch::Approx(10.0 * std::log10(mean_power)).epsilon(1e-12));
  CHECK(rep.first_side_lobe_db == Catch::Approx(20.0 * std::log10(0.05)).epsilon(1e-12));

  PsfReport lobe_free;
  lobe_free.positions = linspace(0.0, 4.0, 5);
  lobe_free.curve = {0.5, 0.8, 1.0, 0.8, 0.5};
  metrics_detail::fill_side_lobes(lobe_free);
  CHECK(lobe_free.avg_side_lobe_db == -std::numeric_limits<double>::infinity());
}

TEST_CASE("lateral point spread of a synthetic angular Gaussian") {
  const int nx = 41;
  const double sigma_deg = 2.0;
  Volume v = blank_volume(linspace(deg2rad(-10.0), deg2rad(10.0), nx), {0.0}, 1024);
  for (int ix = 0; ix < nx; ++ix) {
    const double deg = rad2deg(v.theta_x[static_cast<std::size_t>(ix)]);
    const double w = std::exp(-0.5 * deg * deg / (sigma_deg * sigma_deg));
    v.set_beam(static_cast<std::size_t>(ix), 0, gaussian_rf(1024, 500.0, 30.0, w));
  }
  const PsfReport rep = lateral_psf(v);
  CHECK(rep.axis == PsfReport::Axis::kLateral);
  CHECK(rep.positions.front() == Catch::Approx(-10.0));
  CHECK(rep.positions.back() == Catch::Approx(10.0));
  CHECK(*std::max_element(rep.curve.begin(), rep.curve.end()) == Catch::Approx(1.0));
  // Half-power width of the angular Gaussian: 2 sigma sqrt(ln 2).
  CHECK(rep.fwhm == Catch::Approx(2.0 * sigma_deg * std::sqrt(std::log(2.0))).epsilon(0.02));

  Volume narrow = blank_volume({0.0, 0.1}, {0.0}, 64);
  CHECK_THROWS_AS(lateral_psf(narrow), ConfigError);
}

TEST_CASE("axial point spread of a synthetic depth Gaussian") {
  const double sigma_samples = 20.0;
  Volume v = blank_volume({0.0}, {0.0}, 1024);
  v.set_beam(0, 0, gaussian_rf(1024, 400.0, sigma_samples, 1.0));
  const PsfReport rep = axial_psf(v, 0, 0);
  CHECK(rep.axis == PsfReport::Axis::kAxial);
  double energy = 0.0;
  for (double c : rep.curve) energy += c * c;
  CHECK(energy == Catch::Approx(1.0).epsilon(1e-9));
  const double mm_per_sample = 1e3 * 1540.0 / (2.0 * kFs);
  const double expect = 2.0 * sigma_samples * std::sqrt(std::log(2.0)) * mm_per_sample;
  CHECK(rep.fwhm == Catch::Approx(expect).epsilon(0.02));

  const PsfReport windowed = axial_psf(v, 0, 0, 400, 100);
  CHECK(windowed.fwhm == Catch::Approx(rep.fwhm).epsilon(0.01));
  CHECK_THROWS_AS(axial_psf(v, 0, 0, 400, 0), ConfigError);
}

TEST_CASE("beam SNR against a known disturbance") {
  const int n = 1024;
  const std::vector<double> clean = gaussian_rf(n, 300.0, 25.0, 1.0);
  std::vector<double> noisy = clean;
  noisy[600] += 0.1;  // single-sample disturbance: noise energy 0.01
  const double wavelength = 1540.0 / 3e6;
  const double snr = beam_snr(clean, noisy, wavelength, kFs, 1540.0);

  const std::vector<double> env = analytic_envelope(clean);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < env.size(); ++i)
    if (env[i] > env[peak]) peak = i;
  const long half = std::lround(5.0 * wavelength * kFs / (2.0 * 1540.0));
  double es = 0.0;
  for (std::size_t i = peak - half; i <= peak + half; ++i) es += clean[i] * clean[i];
  CHECK(snr == Catch::Approx(10.0 * std::log10(es / 0.01)).epsilon(1e-9));

  CHECK(beam_snr(clean, clean, wavelength, kFs, 1540.0) ==
        std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(beam_snr(clean, std::vector<double>(12), wavelength, kFs, 1540.0),
                  ConfigError);
}

TEST_CASE("cross sections render the bright point inside [0, 1]") {
  const int nx = 5;
  Volume v = blank_volume(linspace(-0.3, 0.3, nx), {0.0}, 512);
  v.set_beam(2, 0, gaussian_rf(512, 256.0, 10.0, 1.0));
  v.set_beam(0, 0, gaussian_rf(512, 256.0, 10.0, 0.05));
  double peak = 0.0;
  const Image img = cross_section(v, 0, 120, 200, 40.0, &peak);
  CHECK(img.width == 120);
  CHECK(img.height == 200);
  CHECK(peak > 0.9);
  double mx = 0.0;
  for (double p : img.pixels) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    mx = std::max(mx, p);
  }
  CHECK(mx > 0.9);

  const std::string path = "test_image.pgm";
  write_pgm16(path, img);
  std::ifstream is(path, std::ios::binary);
  std::string header;
  std::getline(is, header);
  CHECK(header == "P5");
  is.seekg(0, std::ios::end);
  const auto size = static_cast<long>(is.tellg());
  CHECK(size > 2 * img.width * img.height);  // header + payload
  is.close();
  std::remove(path.c_str());
}
