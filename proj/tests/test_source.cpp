#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bpsim/metrics.hpp"
#include "bpsim/pipeline.hpp"
#include "bpsim/source.hpp"
#include "helpers.hpp"

using namespace bpsim;

TEST_CASE("source state is normalized, real-nonnegative, exchange symmetric", "[source]") {
  const GridSpec g = make_grid(256, 1.0);
  const BiphotonState s = make_source(g, SourceParams{40.0, 4.0});
  REQUIRE(s.domain == Domain::Momentum);
  REQUIRE(std::abs(s.norm_squared() - 1.0) < 1e-9);
  for (const cplx& a : s.amplitude) {
    REQUIRE(a.imag() == 0.0);
    REQUIRE(a.real() >= 0.0);
  }
  for (std::size_t i = 0; i < g.size; i += 17)
    for (std::size_t j = 0; j < g.size; j += 13)
      REQUIRE(std::abs(s.at(i, j) - s.at(j, i)) < 1e-12);
}

TEST_CASE("strict sampling bounds reject unresolvable widths", "[source]") {
  const GridSpec g = make_grid(128, 1.0);
  // Reference-sweep parameters: w_0 = w_q/15 drops below 4 px.
  const SourceParams under{0.2 * 128.0, 0.2 * 128.0 / 15.0};
  REQUIRE_THROWS_AS(make_source(g, under), ConfigError);
  REQUIRE_NOTHROW(make_source(g, under, false));

  REQUIRE_THROWS_AS(make_source(g, SourceParams{40.0, 2.0}), ConfigError);
  REQUIRE_THROWS_AS(make_source(g, SourceParams{80.0, 8.0}), ConfigError);  // w_q > M/4
  REQUIRE_THROWS_AS(make_source(g, SourceParams{4.0, 8.0}, false), ConfigError);  // w_q < w_0
  try {
    make_source(g, SourceParams{40.0, 2.0});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("4 px") != std::string::npos);
  }
}

TEST_CASE("separable point w_q == w_0 needs strict sampling off", "[source]") {
  const GridSpec g = make_grid(128, 1.0);
  REQUIRE_THROWS_AS(make_source(g, SourceParams{16.0, 16.0}), ConfigError);
  const BiphotonState s = make_source(g, SourceParams{16.0, 16.0}, false);
  // Product state: amplitude factorizes, so rows are proportional.
  const std::size_t c = g.size / 2;
  for (std::size_t j = 0; j < g.size; j += 7) {
    const double lhs = s.at(c - 10, j).real() * s.at(c, c).real();
    const double rhs = s.at(c, j).real() * s.at(c - 10, c).real();
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("momentum marginal width matches the closed form", "[source][oracle]") {
  const GridSpec g = make_grid(512, 1.0);
  const SourceParams p{100.0, 2.0};
  const BiphotonState s = make_source(g, p, false);

  std::vector<double> marginal_prof(g.size, 0.0);
  for (std::size_t i = 0; i < g.size; ++i)
    for (std::size_t j = 0; j < g.size; ++j) marginal_prof[i] += std::norm(s.at(i, j));

  const GaussianFit fit = fit_intensity_width(centered_axis(g.size), marginal_prof);
  REQUIRE(fit.width == Catch::Approx(momentum_marginal_width(p)).epsilon(0.02));
}

TEST_CASE("position correlation width matches the conjugate-domain closed form",
          "[source][oracle]") {
  const GridSpec g = make_grid(512, 1.0);
  const SourceParams p{100.0, 2.0};
  const BiphotonState pos = fourier_2d(make_source(g, p, false), FourierDirection::Inverse);
  const double measured = position_correlation_width(pos);
  REQUIRE(measured ==
          Catch::Approx(position_correlation_width_closed_form(g, p)).epsilon(0.05));
}

TEST_CASE("position correlation width requires the position domain", "[source]") {
  const GridSpec g = make_grid(128, 1.0);
  const BiphotonState s = make_source(g, SourceParams{25.0, 5.0});
  REQUIRE_THROWS_AS(position_correlation_width(s), ConfigError);
}

TEST_CASE("correlation width is non-increasing in w_q at fixed w_0", "[source][property]") {
  const GridSpec g = make_grid(256, 1.0);
  double previous = 1e300;
  for (const double w_q : {24.0, 32.0, 44.0, 60.0}) {
    const BiphotonState pos =
        fourier_2d(make_source(g, SourceParams{w_q, 4.0}), FourierDirection::Inverse);
    const double width = position_correlation_width(pos);
    REQUIRE(width <= previous * (1.0 + 1e-9));
    previous = width;
  }
}

TEST_CASE("separable state has no narrow correlation ridge", "[source]") {
  const GridSpec g = make_grid(256, 1.0);
  const double w = 20.0;
  const BiphotonState pos =
      fourier_2d(make_source(g, SourceParams{w, w}, false), FourierDirection::Inverse);
  const double corr = position_correlation_width(pos);
  // For a product state the difference profile is as wide as the single-photon
  // envelope; compare with the strongly entangled case at the same w_q.
  const BiphotonState ent =
      fourier_2d(make_source(g, SourceParams{w, 4.0}), FourierDirection::Inverse);
  REQUIRE(corr > 3.0 * position_correlation_width(ent));
}

TEST_CASE("strong scattering broadens the correlation width at least 5x", "[source][slow]") {
  const GridSpec g = make_grid(128, 1.0);
  PipelineConfig cfg;
  cfg.source = SourceParams{25.6, 25.6 / 15.0};
  cfg.strict_sampling = false;
  cfg.object = make_uniform_object(g);
  cfg.realizations = 100;
  const std::uint64_t seed = 2024;
  cfg.screen = ScreenParams{solve_segments_for_strength(g, cfg.source.w_q, 10.0, seed, 32), 100,
                            seed};

  const double scattered = coincidence_correlation_width(ensemble_coincidences(g, cfg));

  PipelineConfig clean = cfg;
  clean.screens_before = clean.screens_after = false;
  clean.realizations = 1;
  const double baseline = coincidence_correlation_width(ensemble_coincidences(g, clean));
  REQUIRE(scattered >= 5.0 * baseline);
}
