#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bpsim/grid.hpp"
#include "helpers.hpp"

using namespace bpsim;

TEST_CASE("make_grid accepts powers of two and centers coordinates", "[grid]") {
  const GridSpec g = make_grid(512, 1.0);
  REQUIRE(g.size == 512);
  REQUIRE(g.coordinate(0) == -256.0);
  REQUIRE(g.coordinate(511) == 255.0);

  const GridSpec small = make_grid(128, 1.0);
  REQUIRE(small.coordinate(0) == -64.0);
  REQUIRE(small.coordinate(127) == 63.0);
}

TEST_CASE("make_grid rejects bad sizes and pitches", "[grid]") {
  REQUIRE_THROWS_AS(make_grid(100, 1.0), ConfigError);
  REQUIRE_THROWS_AS(make_grid(0, 1.0), ConfigError);
  REQUIRE_THROWS_AS(make_grid(128, 0.0), ConfigError);
  REQUIRE_THROWS_AS(make_grid(128, -2.0), ConfigError);
}

TEST_CASE("fourier_2d matches the naive quadratic DFT oracle", "[grid][oracle]") {
  const GridSpec g = make_grid(64, 1.0);
  const BiphotonState s = test::random_normalized_state(g, 42);

  for (const bool inverse : {false, true}) {
    const BiphotonState fast =
        fourier_2d(s, inverse ? FourierDirection::Inverse : FourierDirection::Forward);
    const std::vector<cplx> slow = test::naive_centered_dft_2d(s.amplitude, g.size, inverse);
    REQUIRE(test::max_abs_diff(fast.amplitude, slow) < 1e-9);
  }
}

TEST_CASE("fourier_1d matches the naive oracle", "[grid][oracle]") {
  const GridSpec g = make_grid(64, 1.0);
  Field1D f = make_field(g, Domain::Position);
  CounterRng rng(7, 1);
  for (cplx& v : f.values) v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));

  const Field1D fast = fourier_1d(f, FourierDirection::Forward);
  const std::vector<cplx> slow = test::naive_centered_dft(f.values, false);
  REQUIRE(test::max_abs_diff(fast.values, slow) < 1e-9);
  REQUIRE(fast.domain == Domain::Momentum);
}

TEST_CASE("forward-inverse round trip is the identity", "[grid]") {
  const GridSpec g = make_grid(128, 1.0);
  const BiphotonState s = test::random_normalized_state(g, 99);
  const BiphotonState back =
      fourier_2d(fourier_2d(s, FourierDirection::Forward), FourierDirection::Inverse);
  REQUIRE(test::max_abs_diff(s.amplitude, back.amplitude) < 1e-9);
  REQUIRE(back.domain == s.domain);
}

TEST_CASE("transforms preserve the norm", "[grid]") {
  const GridSpec g = make_grid(128, 1.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const BiphotonState s = test::random_normalized_state(g, seed);
    const BiphotonState t = fourier_2d(s, FourierDirection::Forward);
    REQUIRE(std::abs(t.norm_squared() - 1.0) < 1e-9);
  }
}

TEST_CASE("delta at the center transforms to a flat magnitude", "[grid]") {
  const GridSpec g = make_grid(64, 1.0);
  BiphotonState s = make_state(g, Domain::Position);
  s.at(32, 32) = cplx(1.0, 0.0);
  const BiphotonState t = fourier_2d(s, FourierDirection::Forward);
  REQUIRE(t.domain == Domain::Momentum);
  const double expected = 1.0 / 64.0;  // 1/sqrt(M) per axis
  for (const cplx& a : t.amplitude) REQUIRE(std::abs(std::abs(a) - expected) < 1e-12);
}

TEST_CASE("separable Gaussian maps to the conjugate width M/(pi w)", "[grid][oracle]") {
  const GridSpec g = make_grid(64, 1.0);
  const double w = 6.0;
  BiphotonState s = make_state(g, Domain::Position);
  for (std::size_t i = 0; i < g.size; ++i)
    for (std::size_t j = 0; j < g.size; ++j) {
      const double xi = g.coordinate(i), xj = g.coordinate(j);
      s.at(i, j) = std::exp(-(xi * xi + xj * xj) / (w * w));
    }
  s.normalize();
  const BiphotonState t = fourier_2d(s, FourierDirection::Forward);

  // Fit the 1/e point of the transformed magnitude along the center row.
  const double expected_width = static_cast<double>(g.size) / (std::numbers::pi * w);
  const std::size_t c = g.size / 2;
  const double peak = std::abs(t.at(c, c));
  double measured = 0.0;
  for (std::size_t j = c; j < g.size - 1; ++j) {
    const double a = std::abs(t.at(c, j)), b = std::abs(t.at(c, j + 1));
    if (a >= peak / std::numbers::e && b < peak / std::numbers::e) {
      // Linear interpolation between the two samples in log space.
      const double frac = (std::log(a) - std::log(peak / std::numbers::e)) /
                          (std::log(a) - std::log(b));
      measured = g.coordinate(j) + frac;
      break;
    }
  }
  REQUIRE(measured == Catch::Approx(expected_width).epsilon(0.03));
}

TEST_CASE("fourier_2d rejects an unnormalized state", "[grid]") {
  const GridSpec g = make_grid(64, 1.0);
  BiphotonState s = make_state(g, Domain::Position);
  s.at(1, 1) = cplx(3.0, 0.0);  // norm^2 = 9
  check_normalized(test::random_normalized_state(g, 5), "test");  // sanity: no throw
  REQUIRE_THROWS_AS(check_normalized(s, "test"), InvariantError);
}
