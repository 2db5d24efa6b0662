#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bpsim/grid.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

enum class MatrixKind { Probability, Sampled };

/// Joint detection distribution Gamma(x_i, x_s), row-major over (idler,
/// signal). Probability matrices sum to one; sampled matrices hold integer
/// counts summing to pair_count.
struct CoincidenceMatrix {
  GridSpec grid;
  std::vector<double> counts;
  MatrixKind kind = MatrixKind::Probability;
  double pair_count = 0.0;

  double& at(std::size_t idler, std::size_t signal) { return counts[idler * grid.size + signal]; }
  const double& at(std::size_t idler, std::size_t signal) const {
    return counts[idler * grid.size + signal];
  }
  double total() const {
    double acc = 0.0;
    for (double v : counts) acc += v;
    return acc;
  }
};

inline CoincidenceMatrix make_coincidence_matrix(const GridSpec& grid,
                                                 MatrixKind kind = MatrixKind::Probability) {
  return CoincidenceMatrix{grid, std::vector<double>(grid.size * grid.size, 0.0), kind, 0.0};
}

/// Coincidence matrix of a position-domain state: Gamma = |psi|^2.
inline CoincidenceMatrix coincidences_from_state(const BiphotonState& state) {
  CoincidenceMatrix g = make_coincidence_matrix(state.grid);
  for (std::size_t k = 0; k < state.amplitude.size(); ++k)
    g.counts[k] = std::norm(state.amplitude[k]);
  return g;
}

enum class ProfileLabel { Singles, Marginal, PostSelected, PostSelectedSum };

struct ImageProfile {
  GridSpec grid;
  std::vector<double> values;
  ProfileLabel label = ProfileLabel::Marginal;
  long long offset = 0;    // PostSelected: the diagonal offset xi
  std::size_t window = 0;  // PostSelectedSum: the window size n

  double total() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
};

enum class MarginalAxis { OverIdler, OverSignal };

/// Sum over one coordinate. OverIdler yields the usual coincidence image
/// Gamma_s(x_s); totals are preserved.
inline ImageProfile marginal(const CoincidenceMatrix& g, MarginalAxis axis) {
  const std::size_t m = g.grid.size;
  ImageProfile p{g.grid, std::vector<double>(m, 0.0), ProfileLabel::Marginal};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      p.values[axis == MarginalAxis::OverIdler ? j : i] += g.at(i, j);
  return p;
}

/// Single-photon image of the signal arm. For a probability matrix at unit
/// detection efficiency this coincides with the marginal over the idler.
inline ImageProfile singles(const CoincidenceMatrix& g) {
  ImageProfile p = marginal(g, MarginalAxis::OverIdler);
  p.label = ProfileLabel::Singles;
  return p;
}

inline ImageProfile singles(const BiphotonState& state) {
  return singles(coincidences_from_state(state));
}

/// Gamma_post(x; xi) = Gamma(x + xi, x). Out-of-range rows are dropped, the
/// profile keeps zeros at the clipped edge.
inline ImageProfile postselect(const CoincidenceMatrix& g, long long xi) {
  const long long m = static_cast<long long>(g.grid.size);
  if (xi <= -m || xi >= m)
    throw ConfigError("postselect offset |xi| must be < M, got " + std::to_string(xi));
  ImageProfile p{g.grid, std::vector<double>(g.grid.size, 0.0), ProfileLabel::PostSelected};
  p.offset = xi;
  for (long long x = 0; x < m; ++x) {
    const long long row = x + xi;
    if (row < 0 || row >= m) continue;
    p.values[static_cast<std::size_t>(x)] =
        g.at(static_cast<std::size_t>(row), static_cast<std::size_t>(x));
  }
  return p;
}

/// The n consecutive offsets containing 0 used by the shifted post-selection
/// sum: {-floor((n-1)/2), ..., +ceil((n-1)/2)}.
inline std::vector<long long> window_offsets(std::size_t n) {
  std::vector<long long> xs(n);
  const long long lo = -static_cast<long long>((n - 1) / 2);
  for (std::size_t k = 0; k < n; ++k) xs[k] = lo + static_cast<long long>(k);
  return xs;
}

/// Shifted sum of n post-selected profiles,
///   Gamma_post^(n)(x) = sum_xi Gamma_post(x - xi; xi) = sum_xi Gamma(x, x - xi);
/// each window is translated so the correlated features align before summing.
inline ImageProfile postselect_sum(const CoincidenceMatrix& g, std::size_t n) {
  const std::size_t m = g.grid.size;
  if (n < 1 || n > m / 8)
    throw ConfigError("postselect_sum window n must be in [1, M/8], got " + std::to_string(n));
  ImageProfile p{g.grid, std::vector<double>(m, 0.0), ProfileLabel::PostSelectedSum};
  p.window = n;
  for (const long long xi : window_offsets(n)) {
    for (long long x = 0; x < static_cast<long long>(m); ++x) {
      const long long col = x - xi;
      if (col < 0 || col >= static_cast<long long>(m)) continue;
      p.values[static_cast<std::size_t>(x)] +=
          g.at(static_cast<std::size_t>(x), static_cast<std::size_t>(col));
    }
  }
  return p;
}

/// Draws N independent pairs from a probability matrix. Deterministic per seed.
inline CoincidenceMatrix sample_pairs(const CoincidenceMatrix& g, std::uint64_t n,
                                      std::uint64_t seed) {
  if (g.kind != MatrixKind::Probability)
    throw ConfigError("sample_pairs requires a probability matrix");
  if (n < 1) throw ConfigError("sample_pairs needs a positive pair budget");
  CategoricalSampler sampler(g.counts);
  if (!(sampler.total() > 0.0)) throw ConfigError("sample_pairs: empty distribution");
  CoincidenceMatrix out = make_coincidence_matrix(g.grid, MatrixKind::Sampled);
  CounterRng rng(seed, 0x70617273ull);
  for (std::uint64_t k = 0; k < n; ++k) out.counts[sampler.draw(rng)] += 1.0;
  out.pair_count = static_cast<double>(n);
  return out;
}

/// Finite-efficiency detection model for sampled acquisitions. Accidental
/// coincidences (uncorrelated background that happens to fall in the timing
/// window) are uniform over the coordinate plane.
struct DetectionModel {
  double efficiency = 1.0;       // per arm
  double accidental_mean = 0.0;  // Poisson mean of accidental coincidences
};

struct DetectionSample {
  CoincidenceMatrix coincidences;  // true + accidental, kind Sampled
  CoincidenceMatrix accidentals;   // accidental part only
  ImageProfile singles_idler;      // detected idler photons, partner lost or not
  ImageProfile singles_signal;
  std::uint64_t pairs_emitted = 0;
  std::uint64_t true_coincidences = 0;
  std::uint64_t accidental_coincidences = 0;
};

inline DetectionSample sample_detection(const CoincidenceMatrix& g, std::uint64_t pairs,
                                        const DetectionModel& model, std::uint64_t seed) {
  if (g.kind != MatrixKind::Probability)
    throw ConfigError("sample_detection requires a probability matrix");
  if (model.efficiency < 0.0 || model.efficiency > 1.0)
    throw ConfigError("detection efficiency must lie in [0, 1]");
  const std::size_t m = g.grid.size;
  CategoricalSampler sampler(g.counts);
  if (!(sampler.total() > 0.0)) throw ConfigError("sample_detection: empty distribution");

  DetectionSample out{make_coincidence_matrix(g.grid, MatrixKind::Sampled),
                      make_coincidence_matrix(g.grid, MatrixKind::Sampled),
                      ImageProfile{g.grid, std::vector<double>(m, 0.0), ProfileLabel::Singles},
                      ImageProfile{g.grid, std::vector<double>(m, 0.0), ProfileLabel::Singles}};
  out.pairs_emitted = pairs;

  CounterRng rng(seed, 0x64657431ull);
  for (std::uint64_t k = 0; k < pairs; ++k) {
    const std::size_t bin = sampler.draw(rng);
    const std::size_t i = bin / m, j = bin % m;
    const bool got_i = rng.uniform() < model.efficiency;
    const bool got_j = rng.uniform() < model.efficiency;
    if (got_i) out.singles_idler.values[i] += 1.0;
    if (got_j) out.singles_signal.values[j] += 1.0;
    if (got_i && got_j) {
      out.coincidences.counts[bin] += 1.0;
      ++out.true_coincidences;
    }
  }

  CounterRng acc_rng(seed, 0x64657432ull);
  const std::uint64_t n_acc = acc_rng.poisson(model.accidental_mean);
  for (std::uint64_t k = 0; k < n_acc; ++k) {
    const std::size_t i = static_cast<std::size_t>(acc_rng.uniform_index(m));
    const std::size_t j = static_cast<std::size_t>(acc_rng.uniform_index(m));
    out.coincidences.at(i, j) += 1.0;
    out.accidentals.at(i, j) += 1.0;
    out.singles_idler.values[i] += 1.0;
    out.singles_signal.values[j] += 1.0;
  }
  out.accidental_coincidences = n_acc;
  out.coincidences.pair_count = static_cast<double>(out.true_coincidences + n_acc);
  out.accidentals.pair_count = static_cast<double>(n_acc);
  return out;
}

/// Plain 2D image, row-major with y as the slow axis.
struct Image2D {
  std::size_t width = 0, height = 0;
  std::vector<double> values;

  double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  const double& at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
  double total() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
};

inline Image2D make_image(std::size_t width, std::size_t height) {
  return Image2D{width, height, std::vector<double>(width * height, 0.0)};
}

/// Laplacian-of-Gaussian convolution with kernel radius ceil(3 sigma) and
/// zero-padded borders. The kernel is shifted to zero sum, so constants map
/// to zero away from the borders.
inline Image2D laplacian_gaussian_filter(const Image2D& img, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("LoG filter needs sigma > 0");
  const long long radius = static_cast<long long>(std::ceil(3.0 * sigma));
  const long long k = 2 * radius + 1;
  std::vector<double> kernel(static_cast<std::size_t>(k * k));
  const double s2 = sigma * sigma;
  double mean = 0.0;
  for (long long dy = -radius; dy <= radius; ++dy) {
    for (long long dx = -radius; dx <= radius; ++dx) {
      const double r2 = static_cast<double>(dx * dx + dy * dy);
      const double v = (r2 - 2.0 * s2) / (s2 * s2) * std::exp(-r2 / (2.0 * s2));
      kernel[static_cast<std::size_t>((dy + radius) * k + (dx + radius))] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(kernel.size());
  for (double& v : kernel) v -= mean;

  Image2D out = make_image(img.width, img.height);
  for (long long y = 0; y < static_cast<long long>(img.height); ++y) {
    for (long long x = 0; x < static_cast<long long>(img.width); ++x) {
      double acc = 0.0;
      for (long long dy = -radius; dy <= radius; ++dy) {
        const long long sy = y + dy;
        if (sy < 0 || sy >= static_cast<long long>(img.height)) continue;
        for (long long dx = -radius; dx <= radius; ++dx) {
          const long long sx = x + dx;
          if (sx < 0 || sx >= static_cast<long long>(img.width)) continue;
          acc += kernel[static_cast<std::size_t>((dy + radius) * k + (dx + radius))] *
                 img.values[static_cast<std::size_t>(sy * static_cast<long long>(img.width) + sx)];
        }
      }
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  }
  return out;
}

/// 1D variant used on profiles: second derivative of a Gaussian, zero-sum
/// shifted, radius ceil(3 sigma), zero-padded borders.
inline std::vector<double> laplacian_gaussian_filter_1d(const std::vector<double>& values,
                                                        double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("LoG filter needs sigma > 0");
  const long long radius = static_cast<long long>(std::ceil(3.0 * sigma));
  const double s2 = sigma * sigma;
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double mean = 0.0;
  for (long long dx = -radius; dx <= radius; ++dx) {
    const double v = (static_cast<double>(dx * dx) - s2) / (s2 * s2) *
                     std::exp(-static_cast<double>(dx * dx) / (2.0 * s2));
    kernel[static_cast<std::size_t>(dx + radius)] = v;
    mean += v;
  }
  mean /= static_cast<double>(kernel.size());
  for (double& v : kernel) v -= mean;

  std::vector<double> out(values.size(), 0.0);
  for (long long x = 0; x < static_cast<long long>(values.size()); ++x) {
    double acc = 0.0;
    for (long long dx = -radius; dx <= radius; ++dx) {
      const long long sx = x + dx;
      if (sx < 0 || sx >= static_cast<long long>(values.size())) continue;
      acc += kernel[static_cast<std::size_t>(dx + radius)] * values[static_cast<std::size_t>(sx)];
    }
    out[static_cast<std::size_t>(x)] = acc;
  }
  return out;
}

}  // namespace bpsim
