#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bpsim/coincidence.hpp"
#include "bpsim/grid.hpp"
#include "bpsim/numerics.hpp"
#include "bpsim/pipeline.hpp"

namespace bpsim {

/// Image-quality summary for one reconstruction.
struct MetricsReport {
  double mtf = 0.0;               // in [0, 1]
  double rms = 0.0;               // in [0, 1]
  long long k0 = 0;               // dominant nonzero frequency bin of the ground truth
  double w_minus = 0.0;           // correlation width with scattering, px
  double w_minus_0 = 0.0;         // correlation width without scattering, px
  double strength_estimate = 0.0; // w_q / w_A inferred from the widths
  int mtf_band_halfwidth = 2;     // half-width of the "k ~ k0" band, bins
};

inline constexpr int kMtfBandHalfWidth = 2;
inline constexpr int kMtfDcHalfWidth = 1;

namespace detail {

inline std::vector<double> spectrum_magnitudes_1d(const std::vector<double>& values) {
  Field1D f{GridSpec{values.size(), 1.0}, std::vector<cplx>(values.size()), Domain::Position};
  for (std::size_t i = 0; i < values.size(); ++i) f.values[i] = cplx(values[i], 0.0);
  const Field1D spec = fourier_1d(f, FourierDirection::Forward);
  std::vector<double> mag(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mag[i] = std::abs(spec.values[i]);
  return mag;  // centered: bin k corresponds to frequency k - M/2
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace detail

/// Locates the dominant nonzero spatial frequency of a profile; throws when
/// its spectrum has no clear peak above the noise floor.
inline long long dominant_frequency_1d(const std::vector<double>& ground_truth) {
  const std::size_t m = ground_truth.size();
  if (!is_power_of_two(m)) throw ConfigError("profile length must be a power of two");
  const std::vector<double> mag = detail::spectrum_magnitudes_1d(ground_truth);
  const long long half = static_cast<long long>(m) / 2;

  long long k0 = 0;
  double peak = -1.0;
  for (long long k = 2; k < half; ++k) {
    const double v = mag[static_cast<std::size_t>(k + half)];
    if (v > peak) {
      peak = v;
      k0 = k;
    }
  }
  std::vector<double> floor_bins;
  for (long long k = 2; k < half; ++k)
    if (std::llabs(k - k0) > 3) floor_bins.push_back(mag[static_cast<std::size_t>(k + half)]);
  const double floor = detail::median(std::move(floor_bins));
  if (!(peak > 0.0) || peak < 3.0 * floor)
    throw FitError("ground truth has no dominant nonzero frequency (peak " +
                   std::to_string(peak) + " vs noise floor " + std::to_string(floor) + ")");
  return k0;
}

struct MtfResult {
  double mtf = 0.0;
  long long k0 = 0;
};

/// MTF = max |FT(I)| over the band |k - k0| <= 2 divided by max |FT(I)| over
/// the DC bin and its immediate neighbors. k0 comes from the ground truth.
inline MtfResult mtf(const std::vector<double>& image, const std::vector<double>& ground_truth) {
  if (image.size() != ground_truth.size()) throw ConfigError("mtf: shape mismatch");
  const long long k0 = dominant_frequency_1d(ground_truth);
  const std::vector<double> mag = detail::spectrum_magnitudes_1d(image);
  const long long half = static_cast<long long>(image.size()) / 2;

  double band = 0.0, dc = 0.0;
  for (long long k = -half; k < half; ++k) {
    const double v = mag[static_cast<std::size_t>(k + half)];
    if (std::llabs(std::llabs(k) - k0) <= kMtfBandHalfWidth) band = std::max(band, v);
    if (std::llabs(k) <= kMtfDcHalfWidth) dc = std::max(dc, v);
  }
  if (!(dc > 0.0)) throw FitError("mtf: zero DC component");
  return MtfResult{band / dc, k0};
}

inline MtfResult mtf(const ImageProfile& image, const ImageProfile& ground_truth) {
  return mtf(image.values, ground_truth.values);
}

struct MtfResult2D {
  double mtf = 0.0;
  long long k0x = 0;
  long long k0y = 0;
  double radius = 0.0;
};

namespace detail {

inline std::vector<double> spectrum_magnitudes_2d(const Image2D& img) {
  if (!is_power_of_two(img.width) || !is_power_of_two(img.height))
    throw ConfigError("2D spectra require power-of-two image dimensions");
  std::vector<cplx> a(img.values.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = cplx(img.values[i], 0.0);
  detail::Fft fx(img.width), fy(img.height);
  for (std::size_t y = 0; y < img.height; ++y)
    detail::centered_unitary_transform(fx, a.data() + y * img.width, FourierDirection::Forward);
  // Columns via gather/scatter; image sizes here are modest.
  std::vector<cplx> col(img.height);
  for (std::size_t x = 0; x < img.width; ++x) {
    for (std::size_t y = 0; y < img.height; ++y) col[y] = a[y * img.width + x];
    detail::centered_unitary_transform(fy, col.data(), FourierDirection::Forward);
    for (std::size_t y = 0; y < img.height; ++y) a[y * img.width + x] = col[y];
  }
  std::vector<double> mag(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mag[i] = std::abs(a[i]);
  return mag;
}

}  // namespace detail

/// 2D MTF: the band is an annulus of radius |k0| +- 2 bins, DC is the disc of
/// radius 1, and k0 is located from the ground truth's 2D spectrum.
inline MtfResult2D mtf_2d(const Image2D& image, const Image2D& ground_truth) {
  if (image.width != ground_truth.width || image.height != ground_truth.height)
    throw ConfigError("mtf_2d: shape mismatch");
  const std::vector<double> gt_mag = detail::spectrum_magnitudes_2d(ground_truth);
  const long long hw = static_cast<long long>(image.width) / 2;
  const long long hh = static_cast<long long>(image.height) / 2;

  MtfResult2D res;
  double peak = -1.0;
  std::vector<double> floor_bins;
  for (long long ky = -hh; ky < hh; ++ky) {
    for (long long kx = -hw; kx < hw; ++kx) {
      const double r = std::sqrt(static_cast<double>(kx * kx + ky * ky));
      if (r < 2.0) continue;
      const double v = gt_mag[static_cast<std::size_t>((ky + hh) * 2 * hw + (kx + hw))];
      if (v > peak) {
        peak = v;
        res.k0x = kx;
        res.k0y = ky;
      }
    }
  }
  res.radius = std::sqrt(static_cast<double>(res.k0x * res.k0x + res.k0y * res.k0y));
  for (long long ky = -hh; ky < hh; ++ky) {
    for (long long kx = -hw; kx < hw; ++kx) {
      const double r = std::sqrt(static_cast<double>(kx * kx + ky * ky));
      if (r < 2.0 || std::abs(r - res.radius) <= 3.0) continue;
      floor_bins.push_back(gt_mag[static_cast<std::size_t>((ky + hh) * 2 * hw + (kx + hw))]);
    }
  }
  const double floor = detail::median(std::move(floor_bins));
  if (!(peak > 0.0) || peak < 3.0 * floor)
    throw FitError("2D ground truth has no dominant nonzero frequency");

  const std::vector<double> mag = detail::spectrum_magnitudes_2d(image);
  double band = 0.0, dc = 0.0;
  for (long long ky = -hh; ky < hh; ++ky) {
    for (long long kx = -hw; kx < hw; ++kx) {
      const double r = std::sqrt(static_cast<double>(kx * kx + ky * ky));
      const double v = mag[static_cast<std::size_t>((ky + hh) * 2 * hw + (kx + hw))];
      if (std::abs(r - res.radius) <= static_cast<double>(kMtfBandHalfWidth))
        band = std::max(band, v);
      if (r <= static_cast<double>(kMtfDcHalfWidth)) dc = std::max(dc, v);
    }
  }
  if (!(dc > 0.0)) throw FitError("mtf_2d: zero DC component");
  res.mtf = band / dc;
  return res;
}

/// Normalized absolute difference: both inputs are scaled to unit sum, then
/// RMS = sum |a - b| / sum (a + b). Zero iff the normalized images coincide;
/// one for disjoint supports.
inline double rms_difference(const std::vector<double>& ground_truth,
                             const std::vector<double>& reconstruction) {
  if (ground_truth.size() != reconstruction.size()) throw ConfigError("rms: shape mismatch");
  double sg = 0.0, sr = 0.0;
  for (double v : ground_truth) {
    if (v < 0.0) throw ConfigError("rms: negative ground-truth value");
    sg += v;
  }
  for (double v : reconstruction) {
    if (v < 0.0) throw ConfigError("rms: negative reconstruction value");
    sr += v;
  }
  if (!(sg > 0.0) || !(sr > 0.0)) throw ConfigError("rms: zero-sum image");
  double num = 0.0;
  for (std::size_t i = 0; i < ground_truth.size(); ++i)
    num += std::abs(ground_truth[i] / sg - reconstruction[i] / sr);
  return num / 2.0;
}

inline double rms_difference(const ImageProfile& ground_truth, const ImageProfile& recon) {
  return rms_difference(ground_truth.values, recon.values);
}

inline double rms_difference(const Image2D& ground_truth, const Image2D& recon) {
  return rms_difference(ground_truth.values, recon.values);
}

enum class BroadeningConfig { BothPhotons, OneArm };

/// Semi-empirical correlation-broadening laws:
///   both photons scattered: w-/w-,0 = sqrt(1 + 3 s^2)
///   one arm scattered:      w-/w-,0 = sqrt((1 + 3 s^2) / 2)
inline double predict_broadening_ratio(double strength, BroadeningConfig config) {
  if (strength < 0.0) throw ConfigError("scattering strength must be nonnegative");
  const double v = 1.0 + 3.0 * strength * strength;
  return config == BroadeningConfig::BothPhotons ? std::sqrt(v) : std::sqrt(v / 2.0);
}

/// Inverts the broadening law. Ratios at or below the zero-scattering minimum
/// report "no measurable scattering" as strength 0.
inline double estimate_strength(double w_minus, double w_minus_0, BroadeningConfig config) {
  if (!(w_minus > 0.0) || !(w_minus_0 > 0.0))
    throw ConfigError("estimate_strength needs positive widths");
  const double r2 = (w_minus / w_minus_0) * (w_minus / w_minus_0);
  const double arg =
      config == BroadeningConfig::BothPhotons ? (r2 - 1.0) / 3.0 : (2.0 * r2 - 1.0) / 3.0;
  if (arg <= 0.0) return 0.0;  // no measurable scattering
  return std::sqrt(arg);
}

/// Measured difference-coordinate width of an ensemble coincidence matrix.
inline double coincidence_correlation_width(const CoincidenceMatrix& g) {
  const std::vector<double> profile = difference_projection(g.counts, g.grid.size);
  return fit_intensity_width(centered_axis(g.grid.size), profile).width;
}

struct BroadeningRow {
  double target_strength = 0.0;
  double measured_strength = 0.0;  // from characterize_screens on the actual ensemble
  double measured_ratio = 0.0;     // w- / w-,0 from the simulated coincidences
  double predicted_ratio = 0.0;    // broadening law at the measured strength
  std::size_t segments = 0;
};

struct BroadeningLawParams {
  GridSpec grid{128, 1.0};
  double w_q = 0.2 * 128.0;
  double w_0 = 0.2 * 128.0 / 15.0;
  std::size_t realizations = 40;
  std::vector<double> strengths{1.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  BroadeningConfig config = BroadeningConfig::BothPhotons;
  std::uint64_t seed = 1;
  std::size_t calibration_realizations = 64;
};

/// Runs the object-free pipeline over a strength sweep and tabulates measured
/// against predicted broadening ratios.
inline std::vector<BroadeningRow> validate_broadening_law(const BroadeningLawParams& p) {
  PipelineConfig base;
  base.configuration = p.config == BroadeningConfig::BothPhotons
                           ? Configuration::BothPhotons
                           : Configuration::OneArmScattered;
  base.source = SourceParams{p.w_q, p.w_0};
  base.object = make_uniform_object(p.grid);
  base.realizations = p.realizations;
  base.strict_sampling = false;  // reference sweep runs under-resolved on purpose

  PipelineConfig clean = base;
  clean.screens_before = false;
  clean.screens_after = false;
  clean.realizations = 1;
  clean.screen = ScreenParams{2, 1, p.seed};
  const double w_minus_0 =
      coincidence_correlation_width(ensemble_coincidences(p.grid, clean));

  std::vector<BroadeningRow> rows;
  for (std::size_t idx = 0; idx < p.strengths.size(); ++idx) {
    const double target = p.strengths[idx];
    const std::uint64_t seed = detail::mix_key(p.seed, 1000 + idx);
    const std::size_t segments = solve_segments_for_strength(p.grid, p.w_q, target, seed,
                                                             p.calibration_realizations);
    PipelineConfig cfg = base;
    cfg.screen = ScreenParams{segments, p.realizations, seed};

    // Strength as actually realized by this ensemble (screens S1 and S2 share
    // the segment count; characterize the S1 draw).
    const ScatterCharacterization ch =
        characterize_screens(generate_screens(p.grid, cfg.screen), p.w_q);

    const double w_minus = coincidence_correlation_width(ensemble_coincidences(p.grid, cfg));
    BroadeningRow row;
    row.target_strength = target;
    row.measured_strength = ch.strength;
    row.measured_ratio = w_minus / w_minus_0;
    row.predicted_ratio = predict_broadening_ratio(ch.strength, p.config);
    row.segments = segments;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bpsim
