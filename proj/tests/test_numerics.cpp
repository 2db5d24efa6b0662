#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bpsim/numerics.hpp"
#include "bpsim/rng.hpp"
#include "helpers.hpp"

using namespace bpsim;

namespace {

std::vector<double> gaussian_profile(const std::vector<double>& xs, double a, double c, double s) {
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    ys[i] = a * std::exp(-(xs[i] - c) * (xs[i] - c) / (s * s));
  return ys;
}

}  // namespace

TEST_CASE("gaussian fit recovers exact parameters", "[numerics]") {
  const std::vector<double> xs = centered_axis(256);
  const std::vector<double> ys = gaussian_profile(xs, 2.5, 7.0, 14.0);
  const GaussianFit fit = fit_gaussian(xs, ys);
  REQUIRE_FALSE(fit.used_moment_fallback);
  REQUIRE(fit.amplitude == Catch::Approx(2.5).epsilon(1e-6));
  REQUIRE(fit.center == Catch::Approx(7.0).margin(1e-6));
  REQUIRE(fit.width == Catch::Approx(14.0).epsilon(1e-6));
}

TEST_CASE("gaussian fit tolerates moderate noise", "[numerics]") {
  const std::vector<double> xs = centered_axis(256);
  std::vector<double> ys = gaussian_profile(xs, 1.0, -12.0, 20.0);
  CounterRng rng(11, 0);
  for (double& y : ys) y = std::max(0.0, y + 0.02 * rng.gaussian());
  const GaussianFit fit = fit_gaussian(xs, ys);
  REQUIRE(fit.width == Catch::Approx(20.0).epsilon(0.08));
  REQUIRE(fit.center == Catch::Approx(-12.0).margin(1.5));
}

TEST_CASE("gaussian fit falls back to moments on strongly non-Gaussian data", "[numerics]") {
  const std::vector<double> xs = centered_axis(128);
  std::vector<double> ys(xs.size(), 0.0);
  // Rectangular profile: residual of the best Gaussian exceeds the 10% gate.
  for (std::size_t i = 44; i < 84; ++i) ys[i] = 1.0;
  const GaussianFit fit = fit_gaussian(xs, ys);
  REQUIRE(fit.used_moment_fallback);
  // Moment width of a 40-px-wide box: sigma = width/sqrt(12), s = sigma*sqrt(2).
  REQUIRE(fit.width == Catch::Approx(40.0 / std::sqrt(12.0) * std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("gaussian fit rejects degenerate input", "[numerics]") {
  const std::vector<double> xs = centered_axis(64);
  REQUIRE_THROWS_AS(fit_gaussian(xs, std::vector<double>(64, 0.0)), FitError);
  REQUIRE_THROWS_AS(fit_gaussian({0.0, 1.0}, {0.0, 1.0}), FitError);
}

TEST_CASE("fit ignores an isolated noise-floor bump far from the peak", "[numerics]") {
  const std::vector<double> xs = centered_axis(256);
  std::vector<double> ys = gaussian_profile(xs, 1.0, 0.0, 8.0);
  ys[5] = 0.02;  // above the 1% threshold but disconnected from the core
  const GaussianFit fit = fit_gaussian(xs, ys);
  REQUIRE(fit.width == Catch::Approx(8.0).epsilon(0.02));
}

TEST_CASE("unimodality check flags twin peaks", "[numerics]") {
  const std::vector<double> xs = centered_axis(256);
  std::vector<double> a = gaussian_profile(xs, 1.0, -40.0, 10.0);
  const std::vector<double> b = gaussian_profile(xs, 0.9, 40.0, 10.0);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  REQUIRE_THROWS_AS(require_unimodal(a), FitError);
  REQUIRE_NOTHROW(require_unimodal(gaussian_profile(xs, 1.0, 0.0, 12.0)));
}

TEST_CASE("intensity width convention: exp(-2d^2/w^2) reports w", "[numerics]") {
  const std::vector<double> xs = centered_axis(256);
  const double w = 18.0;
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    ys[i] = std::exp(-2.0 * xs[i] * xs[i] / (w * w));
  const GaussianFit fit = fit_intensity_width(xs, ys);
  REQUIRE(fit.width == Catch::Approx(w).epsilon(1e-6));
}

TEST_CASE("difference projection sums matrix diagonals circularly", "[numerics]") {
  const std::size_t m = 8;
  std::vector<double> mat(m * m, 0.0);
  for (std::size_t s = 0; s < m; ++s) mat[((s + 2) % m) * m + s] = 1.0;  // diagonal d = +2
  const std::vector<double> prof = difference_projection(mat, m);
  for (long long d = -4; d < 4; ++d) {
    const double expected = d == 2 ? static_cast<double>(m) : 0.0;
    REQUIRE(prof[static_cast<std::size_t>(d + 4)] == Catch::Approx(expected));
  }
}
