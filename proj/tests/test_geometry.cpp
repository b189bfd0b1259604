#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"
#include "vbeam/geometry.hpp"

using namespace vbeam;

TEST_CASE("direction cosines match the closed-form reference") {
  const DirectionCosines d = direction_cosines({0.28, 0.36});
  CHECK(d.x == Catch::Approx(oracle::kDirX).epsilon(1e-15));
  CHECK(d.y == Catch::Approx(oracle::kDirY).epsilon(1e-15));
  CHECK(d.z == Catch::Approx(oracle::kDirZ).epsilon(1e-15));
}

TEST_CASE("direction cosines are unit vectors for random steering angles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    const DirectionCosines d = direction_cosines({ang(rng), ang(rng)});
    const double norm = d.x * d.x + d.y * d.y + d.z * d.z;
    CHECK(norm == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(d.z > 0.0);
  }
}

TEST_CASE("steering angles at or beyond 90 degrees are rejected") {
  CHECK_THROWS_AS(direction_cosines({kPi / 2, 0.0}), ConfigError);
  CHECK_THROWS_AS(direction_cosines({0.0, -kPi / 2}), ConfigError);
}

TEST_CASE("element offsets are centered on the grid") {
  const ArrayGeometry g = oracle::small_grid(8, 6);
  double sx = 0.0, sy = 0.0;
  for (int m = 0; m < g.rows; ++m) sx += g.delta_x(m);
  for (int n = 0; n < g.cols; ++n) sy += g.delta_y(n);
  CHECK(std::abs(sx) < 1e-18);
  CHECK(std::abs(sy) < 1e-18);
  CHECK(g.delta_x(1) - g.delta_x(0) == Catch::Approx(g.pitch_x));
  CHECK(g.delta_y(1) - g.delta_y(0) == Catch::Approx(g.pitch_y));
}

TEST_CASE("element delay vector matches the reference element") {
  const ArrayGeometry g = oracle::reference_grid();
  const DirectionCosines d = direction_cosines({0.28, 0.36});
  CHECK(g.gamma_norm(7, 21) == Catch::Approx(oracle::kGammaNorm).epsilon(1e-14));
  CHECK(g.gamma_projection(7, 21, d) == Catch::Approx(oracle::kGammaProj).epsilon(1e-14));
}

TEST_CASE("dynamic delay matches the reference value and boundary behavior") {
  const ArrayGeometry g = oracle::reference_grid();
  const DirectionCosines d = direction_cosines({0.28, 0.36});
  CHECK(delay_tau(g, 7, 21, d, 40e-6) == Catch::Approx(oracle::kTauAt40us).epsilon(1e-14));
  // At t = 0 the echo of the reference point arrives after |gamma|.
  CHECK(delay_tau(g, 7, 21, d, 0.0) == Catch::Approx(g.gamma_norm(7, 21)).epsilon(1e-12));
}

TEST_CASE("inverse delay inverts the delay to 1e-9 s over random cases") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-0.6, 0.6);
  std::uniform_real_distribution<double> tr(2e-6, 70e-6);
  const ArrayGeometry g = oracle::reference_grid();
  std::uniform_int_distribution<int> em(0, g.rows - 1), en(0, g.cols - 1);
  for (int i = 0; i < 300; ++i) {
    const DirectionCosines d = direction_cosines({ang(rng), ang(rng)});
    const int m = em(rng), n = en(rng);
    const double t = tr(rng);
    const double fwd = delay_tau(g, m, n, d, t);
    CHECK(std::abs(delay_tau_inverse(g, m, n, d, fwd) - t) < 1e-9);
  }
  CHECK(delay_tau_inverse(g, 7, 21, direction_cosines({0.28, 0.36}), oracle::kPenetrationT) ==
        Catch::Approx(oracle::kTauInvAtT).epsilon(1e-14));
}

TEST_CASE("delay slope agrees with a central finite difference") {
  const ArrayGeometry g = oracle::reference_grid();
  const DirectionCosines d = direction_cosines({-0.31, 0.12});
  for (double t : {5e-6, 20e-6, 60e-6}) {
    const double h = 1e-9;
    const double fd = (delay_tau(g, 3, 28, d, t + h) - delay_tau(g, 3, 28, d, t - h)) / (2 * h);
    CHECK(delay_tau_slope(g, 3, 28, d, t) == Catch::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("beam support matches the reference bounds") {
  const ArrayGeometry g = oracle::reference_grid();
  const double T = oracle::kPenetrationT;
  CHECK(beam_support(g, {0.28, 0.36}, T) == Catch::Approx(oracle::kSupportSteered).epsilon(1e-14));
  CHECK(beam_support(g, {0.0, 0.0}, T) ==
        Catch::Approx(oracle::kSupportBroadside).epsilon(1e-14));
}

TEST_CASE("beam support and delays stay inside the acquisition window") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  std::uniform_real_distribution<double> pitch(80e-6, 300e-6);
  std::uniform_int_distribution<int> dim(2, 12);
  for (int i = 0; i < 100; ++i) {
    ArrayGeometry g = oracle::small_grid(dim(rng), dim(rng), pitch(rng));
    const SteeringAngle a{ang(rng), ang(rng)};
    const double T = oracle::kPenetrationT;
    const double tb = beam_support(g, a, T);
    REQUIRE(tb <= T);
    const DirectionCosines d = direction_cosines(a);
    for (int idx : g.active) {
      const int m = idx / g.cols, n = idx % g.cols;
      CHECK(delay_tau(g, m, n, d, tb) <= T * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("active sets have the expected shapes") {
  CHECK(full_active_set(4, 5).size() == 20);
  const std::vector<int> diag = diagonal_subset(32, 32);
  CHECK(diag.size() == 64);
  const std::vector<int> odd = diagonal_subset(5, 5);
  CHECK(odd.size() == 9);  // center element shared by both diagonals
  CHECK_THROWS_AS(diagonal_subset(4, 6), ConfigError);
  for (int idx : diag) {
    const int m = idx / 32, n = idx % 32;
    CHECK((m == n || m == 31 - n));
  }
}

TEST_CASE("geometry validation rejects malformed grids") {
  ArrayGeometry g = oracle::small_grid(4, 4);
  g.pitch_x = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = oracle::small_grid(4, 4);
  g.active = {17};
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = oracle::small_grid(4, 4);
  g.active.clear();
  CHECK_THROWS_AS(g.validate(), ConfigError);
}
