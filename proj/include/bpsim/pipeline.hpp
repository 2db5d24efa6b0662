#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bpsim/coincidence.hpp"
#include "bpsim/grid.hpp"
#include "bpsim/screens.hpp"
#include "bpsim/source.hpp"

namespace bpsim {

enum class ObjectShape { ApertureArray, Lines, FromFile, Uniform };

/// Amplitude object: per-pixel transmission in [0, 1].
struct ObjectMask {
  GridSpec grid;
  std::vector<double> transmission;
  ObjectShape shape = ObjectShape::Uniform;
  std::string descriptor;
};

inline ObjectMask make_uniform_object(const GridSpec& grid) {
  return ObjectMask{grid, std::vector<double>(grid.size, 1.0), ObjectShape::Uniform, "uniform"};
}

/// Periodic array of open apertures: transmission 1 on the open fraction
/// (duty) of each period, 0 elsewhere. Gives a spectrum with one dominant
/// nonzero frequency at M/period.
inline ObjectMask make_aperture_array(const GridSpec& grid, std::size_t period, double duty) {
  if (period < 2 || period > grid.size) throw ConfigError("aperture period must be in [2, M]");
  if (!(duty > 0.0) || !(duty < 1.0)) throw ConfigError("aperture duty must be in (0, 1)");
  ObjectMask o{grid, std::vector<double>(grid.size, 0.0), ObjectShape::ApertureArray,
               "aperture_array period=" + std::to_string(period) + " duty=" + std::to_string(duty)};
  const double open = duty * static_cast<double>(period);
  for (std::size_t x = 0; x < grid.size; ++x)
    if (static_cast<double>(x % period) < open) o.transmission[x] = 1.0;
  return o;
}

/// Opaque lines on a transparent background, centered on the grid.
inline ObjectMask make_dark_lines(const GridSpec& grid, std::size_t count, std::size_t width,
                                  std::size_t gap) {
  if (count < 1) throw ConfigError("line count must be >= 1");
  const std::size_t span = count * width + (count - 1) * gap;
  if (span >= grid.size) throw ConfigError("line pattern does not fit on the grid");
  ObjectMask o{grid, std::vector<double>(grid.size, 1.0), ObjectShape::Lines,
               "dark_lines count=" + std::to_string(count) + " width=" + std::to_string(width) +
                   " gap=" + std::to_string(gap)};
  std::size_t start = (grid.size - span) / 2;
  for (std::size_t line = 0; line < count; ++line) {
    for (std::size_t k = 0; k < width; ++k) o.transmission[start + k] = 0.0;
    start += width + gap;
  }
  return o;
}

inline ObjectMask make_object_from_values(const GridSpec& grid, std::vector<double> values,
                                          std::size_t* clamped_count = nullptr) {
  if (values.size() != grid.size)
    throw ConfigError("object file must provide exactly M=" + std::to_string(grid.size) +
                      " values, got " + std::to_string(values.size()));
  std::size_t clamped = 0;
  for (double& v : values) {
    const double c = std::clamp(v, 0.0, 1.0);
    if (c != v) ++clamped;
    v = c;
  }
  if (clamped_count) *clamped_count = clamped;
  return ObjectMask{grid, std::move(values), ObjectShape::FromFile, "from_file"};
}

enum class Configuration { BothPhotons, OneArmScattered, StaticAfterObject };

inline const char* to_string(Configuration c) {
  switch (c) {
    case Configuration::BothPhotons: return "both-photons";
    case Configuration::OneArmScattered: return "one-arm-scattered";
    case Configuration::StaticAfterObject: return "static-after-object";
  }
  return "?";
}

/// Full imaging chain description: source -> S1 -> object -> S2 -> detection.
/// In OneArmScattered only the scattered arm sees the screens and the object;
/// StaticAfterObject is the single fixed mask between object and detector.
struct PipelineConfig {
  Configuration configuration = Configuration::BothPhotons;
  bool screens_before = true;
  bool screens_after = true;
  std::size_t realizations = 1;
  SourceParams source;
  ScreenParams screen;
  ObjectMask object;
  Arm scattered_arm = Arm::Signal;
  bool weight_by_throughput = true;
  bool strict_sampling = true;
};

inline void validate(const PipelineConfig& c) {
  if (c.configuration == Configuration::StaticAfterObject) {
    if (c.screens_before)
      throw ConfigError("static-after-object forbids screens before the object");
    if (c.realizations != 1)
      throw ConfigError("static-after-object is a single-realization configuration (R = 1)");
  }
  if (c.realizations < 1) throw ConfigError("realization count must be >= 1");
  if (c.object.transmission.size() != c.object.grid.size)
    throw ConfigError("object mask length does not match its grid");
}

namespace detail {

// S2 draws from a derived seed so the two planes are statistically
// independent within one realization.
inline constexpr std::uint64_t kSecondScreenSalt = 0x5332504C414E45ull;

inline ScreenParams second_screen_params(const ScreenParams& p) {
  ScreenParams q = p;
  q.base_seed = detail::mix_key(p.base_seed, kSecondScreenSalt);
  return q;
}

inline BiphotonState apply_configured_screen(const BiphotonState& state, const PhaseScreen& s,
                                             const PipelineConfig& c) {
  if (c.configuration == Configuration::OneArmScattered)
    return apply_screen_one(state, s, c.scattered_arm);
  return apply_screen_both(state, s);
}

inline void apply_object(BiphotonState& state, const PipelineConfig& c, double* throughput) {
  const std::size_t m = state.grid.size;
  const std::vector<double>& t = c.object.transmission;
  const bool both = c.configuration != Configuration::OneArmScattered;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double f = both ? t[i] * t[j] : (c.scattered_arm == Arm::Idler ? t[i] : t[j]);
      state.at(i, j) *= f;
    }
  }
  *throughput = state.norm_squared();
}

}  // namespace detail

struct RealizationResult {
  BiphotonState state;    // position domain, detection plane, renormalized
  double throughput = 1.0;  // object transmission probability for this realization
};

/// One scattering realization of the chain. The state starts in momentum
/// (source far field); S1 acts there; an inverse transform reaches the object
/// plane; the object multiplies the amplitude; a forward transform reaches
/// the S2 plane; the final inverse transform lands on the detection plane.
inline RealizationResult propagate_realization(const GridSpec& grid, const PipelineConfig& config,
                                               std::size_t r) {
  validate(config);
  if (config.object.grid != grid) throw ConfigError("object grid does not match source grid");

  BiphotonState state = make_source(grid, config.source, config.strict_sampling);
  if (config.screens_before) {
    const PhaseScreen s1 = generate_screen(grid, config.screen, r);
    state = detail::apply_configured_screen(state, s1, config);
  }
  state = fourier_2d(state, FourierDirection::Inverse);  // object / image plane

  double throughput = 1.0;
  detail::apply_object(state, config, &throughput);
  if (!(throughput > 0.0))
    throw InvariantError("realization " + std::to_string(r) +
                         ": object absorbed the entire state");
  state.normalize();

  if (config.screens_after) {
    state = fourier_2d(state, FourierDirection::Forward);  // object far field
    const PhaseScreen s2 =
        generate_screen(grid, detail::second_screen_params(config.screen), r);
    state = detail::apply_configured_screen(state, s2, config);
    state = fourier_2d(state, FourierDirection::Inverse);  // detection plane
  }
  return RealizationResult{std::move(state), throughput};
}

/// Ensemble coincidence matrix: intensities averaged over realizations
/// (dynamic scattering averages probabilities, never amplitudes). With
/// throughput weighting each realization enters with its object transmission
/// T_r; the result is normalized to a probability matrix either way.
inline CoincidenceMatrix ensemble_coincidences(const GridSpec& grid,
                                               const PipelineConfig& config) {
  validate(config);
  CoincidenceMatrix acc = make_coincidence_matrix(grid);
  for (std::size_t r = 0; r < config.realizations; ++r) {
    RealizationResult res = propagate_realization(grid, config, r);
    const double w = config.weight_by_throughput ? res.throughput : 1.0;
    for (std::size_t k = 0; k < acc.counts.size(); ++k)
      acc.counts[k] += w * std::norm(res.state.amplitude[k]);
  }
  const double total = acc.total();
  if (!(total > 0.0)) throw InvariantError("ensemble produced an empty coincidence matrix");
  for (double& v : acc.counts) v /= total;
  return acc;
}

}  // namespace bpsim
