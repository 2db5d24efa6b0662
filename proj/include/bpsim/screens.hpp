#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bpsim/grid.hpp"
#include "bpsim/numerics.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

/// Random phase mask generation parameters. `segments` is the coarse list
/// length before interpolation and sets the scattering strength; each
/// realization r < realization_count draws its own independent list.
struct ScreenParams {
  std::size_t segments = 2;
  std::size_t realization_count = 1;
  std::uint64_t base_seed = 0;
};

struct PhaseScreen {
  GridSpec grid;
  std::vector<double> phase;  // radians, in [-pi, pi]
  std::size_t realization_index = 0;
  ScreenParams params;
};

enum class Arm { Idler, Signal };

inline void check_screen_params(const GridSpec& grid, const ScreenParams& p) {
  if (p.segments < 2 || p.segments > grid.size)
    throw ConfigError("screen segments must be in [2, M], got " + std::to_string(p.segments));
  if (p.realization_count < 1) throw ConfigError("screen realization_count must be >= 1");
}

/// Draws `segments` uniform phases in [-pi, pi] from the (base_seed, r)
/// stream and linearly interpolates them onto the M-pixel grid. The draw is a
/// pure function of (base_seed, r, segments), so regeneration and parallel
/// generation are bit-identical.
inline PhaseScreen generate_screen(const GridSpec& grid, const ScreenParams& params,
                                   std::size_t r) {
  check_screen_params(grid, params);
  const std::size_t m = grid.size;
  const std::size_t s = params.segments;

  CounterRng rng(params.base_seed, r);
  std::vector<double> knots(s);
  for (double& k : knots) k = rng.uniform(-std::numbers::pi, std::numbers::pi);

  PhaseScreen screen{grid, std::vector<double>(m), r, params};
  if (s == m) {
    screen.phase = knots;
  } else {
    // Knots sit at linspace(0, M-1, S); endpoints are exact.
    const double step = static_cast<double>(m - 1) / static_cast<double>(s - 1);
    for (std::size_t x = 0; x < m; ++x) {
      const double pos = static_cast<double>(x) / step;
      const std::size_t lo = std::min(static_cast<std::size_t>(pos), s - 2);
      const double frac = pos - static_cast<double>(lo);
      screen.phase[x] = knots[lo] + frac * (knots[lo + 1] - knots[lo]);
    }
  }
  // Convex interpolation cannot leave [-pi, pi]; the wrap guards the invariant anyway.
  for (double& v : screen.phase) {
    while (v > std::numbers::pi) v -= 2.0 * std::numbers::pi;
    while (v < -std::numbers::pi) v += 2.0 * std::numbers::pi;
  }
  return screen;
}

inline std::vector<PhaseScreen> generate_screens(const GridSpec& grid,
                                                 const ScreenParams& params) {
  std::vector<PhaseScreen> screens;
  screens.reserve(params.realization_count);
  for (std::size_t r = 0; r < params.realization_count; ++r)
    screens.push_back(generate_screen(grid, params, r));
  return screens;
}

namespace detail {

inline void require_momentum(const BiphotonState& state, const char* op) {
  if (state.domain != Domain::Momentum)
    throw ConfigError(std::string(op) + " requires a momentum-domain state (got position)");
  if (state.grid.size == 0) throw ConfigError(std::string(op) + ": empty state");
}

inline std::vector<cplx> phase_factors(const PhaseScreen& screen) {
  std::vector<cplx> f(screen.phase.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = cplx(std::cos(screen.phase[i]), std::sin(screen.phase[i]));
  return f;
}

}  // namespace detail

/// psi(q_i, q_s) -> e^{i(phi(q_i) + phi(q_s))} psi(q_i, q_s). Unitary.
inline BiphotonState apply_screen_both(const BiphotonState& state, const PhaseScreen& screen) {
  detail::require_momentum(state, "apply_screen_both");
  if (screen.grid.size != state.grid.size)
    throw ConfigError("apply_screen_both: screen grid does not match state grid");
  BiphotonState out = state;
  const std::size_t m = state.grid.size;
  const std::vector<cplx> f = detail::phase_factors(screen);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) *= f[i] * f[j];
  return out;
}

/// Phase applied along a single coordinate only (one photon scatters, the
/// other propagates as a clean reference).
inline BiphotonState apply_screen_one(const BiphotonState& state, const PhaseScreen& screen,
                                      Arm arm) {
  detail::require_momentum(state, "apply_screen_one");
  if (screen.grid.size != state.grid.size)
    throw ConfigError("apply_screen_one: screen grid does not match state grid");
  BiphotonState out = state;
  const std::size_t m = state.grid.size;
  const std::vector<cplx> f = detail::phase_factors(screen);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) *= (arm == Arm::Idler ? f[i] : f[j]);
  return out;
}

/// Disorder-averaged circular autocorrelation of an ensemble and the Gaussian
/// width extracted from it. `strength` is w_q / w_A.
struct ScatterCharacterization {
  double w_A = 0.0;
  double strength = 0.0;
  std::vector<double> autocorrelation;  // centered axis, length M
};

/// A(d) = (1/R) sum_r sum_x phi_r((x+d) mod M) phi_r(x), fitted by
/// A0 exp(-d^2 / w_A^2). Widths are floored at one pixel: a delta-like
/// autocorrelation cannot be resolved below the sample spacing.
inline ScatterCharacterization characterize_screens(const std::vector<PhaseScreen>& screens,
                                                    double w_q) {
  if (screens.empty()) throw ConfigError("characterize_screens: empty ensemble");
  const std::size_t m = screens.front().grid.size;
  for (const PhaseScreen& s : screens)
    if (s.grid.size != m) throw ConfigError("characterize_screens: mixed grids in ensemble");

  std::vector<double> acc(m, 0.0);
  std::vector<cplx> buf(m);
  detail::Fft fft(m);
  for (const PhaseScreen& s : screens) {
    for (std::size_t i = 0; i < m; ++i) buf[i] = cplx(s.phase[i], 0.0);
    fft.transform(buf.data(), false);
    for (cplx& v : buf) v = cplx(std::norm(v), 0.0);
    fft.transform(buf.data(), true);
    // Unnormalized FFT pair leaves a factor M; the inverse also needs 1/M.
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t d = 0; d < m; ++d) acc[d] += buf[d].real() * scale;
  }
  for (double& v : acc) v /= static_cast<double>(screens.size());

  // Recenter: acc[d] is indexed by shift d in 0..M-1; move d=0 to the middle.
  std::vector<double> centered(m);
  const std::size_t half = m / 2;
  for (std::size_t d = 0; d < m; ++d) centered[(d + half) % m] = acc[d];

  const double peak = *std::max_element(centered.begin(), centered.end());
  const double floor = *std::min_element(centered.begin(), centered.end());
  if (!(peak > 0.0) || peak - floor < 1e-12 * std::max(1.0, std::abs(peak)))
    throw FitError("no scattering / undefined w_A: autocorrelation is flat");

  ScatterCharacterization out;
  out.autocorrelation = centered;
  GaussianFit fit = fit_gaussian(centered_axis(m), centered);
  out.w_A = std::max(fit.width, 1.0);
  out.strength = w_q / out.w_A;
  return out;
}

/// Measured strength for a (segments, seed) choice; helper for the solver and
/// the calibration table.
inline double measured_strength(const GridSpec& grid, std::size_t segments, double w_q,
                                std::uint64_t seed, std::size_t realizations) {
  ScreenParams p{segments, realizations, seed};
  return characterize_screens(generate_screens(grid, p), w_q).strength;
}

/// Calibration row: segment count against the measured autocorrelation width.
struct CalibrationRow {
  std::size_t segments = 0;
  double w_A = 0.0;
  double strength = 0.0;
};

inline std::vector<CalibrationRow> calibrate_screens(const GridSpec& grid, double w_q,
                                                     std::uint64_t seed,
                                                     std::size_t realizations = 200) {
  std::vector<CalibrationRow> table;
  for (std::size_t s = 2; s <= grid.size;) {
    ScreenParams p{s, realizations, seed};
    const ScatterCharacterization c = characterize_screens(generate_screens(grid, p), w_q);
    table.push_back({s, c.w_A, c.strength});
    const std::size_t next = std::max(s + 1, static_cast<std::size_t>(std::llround(s * 1.4)));
    if (s == grid.size) break;
    s = std::min(next, grid.size);
  }
  return table;
}

/// Finds the segment count whose measured w_q/w_A is closest to the target.
/// Strength grows with the segment count, so a geometric bracket plus local
/// integer refinement is enough.
inline std::size_t solve_segments_for_strength(const GridSpec& grid, double w_q,
                                               double target_strength, std::uint64_t seed,
                                               std::size_t realizations = 64) {
  if (!(target_strength > 0.0)) throw ConfigError("target scattering strength must be positive");
  const std::size_t m = grid.size;
  std::size_t lo = 2, hi = m;
  double lo_val = measured_strength(grid, lo, w_q, seed, realizations);
  if (target_strength <= lo_val) return lo;
  double hi_val = measured_strength(grid, hi, w_q, seed, realizations);
  if (target_strength >= hi_val) return hi;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double v = measured_strength(grid, mid, w_q, seed, realizations);
    if (v < target_strength) {
      lo = mid;
      lo_val = v;
    } else {
      hi = mid;
      hi_val = v;
    }
  }
  // Refine around the bracket; measurement noise makes the map only
  // approximately monotone.
  std::size_t best = lo;
  double best_err = std::abs(lo_val - target_strength);
  const long long span = 3;
  for (long long s = static_cast<long long>(lo) - span; s <= static_cast<long long>(hi) + span;
       ++s) {
    if (s < 2 || s > static_cast<long long>(m)) continue;
    const double v = measured_strength(grid, static_cast<std::size_t>(s), w_q, seed, realizations);
    const double err = std::abs(v - target_strength);
    if (err < best_err) {
      best_err = err;
      best = static_cast<std::size_t>(s);
    }
  }
  return best;
}

}  // namespace bpsim
