#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bpsim/errors.hpp"

namespace bpsim {

// Width convention: a Gaussian written exp(-u^2/w^2) has width w. For
// amplitude-like curves (wavefunctions, screen autocorrelations) w is read
// off directly; for intensity-like profiles exp(-2u^2/w^2) the same w marks
// the 1/e^2 point. fit_gaussian() below always fits y = A exp(-(x-c)^2/s^2)
// and callers convert: direct curves take w = s, intensity profiles w = s*sqrt(2).

struct GaussianFit {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 0.0;  // s in A*exp(-(x-c)^2/s^2)
  double rms_residual = 0.0;  // RMS misfit relative to the peak value
  bool used_moment_fallback = false;
};

namespace detail {

struct MomentEstimate {
  double mean = 0.0;
  double sigma = 0.0;
  double mass = 0.0;
};

inline MomentEstimate weighted_moments(const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
  MomentEstimate est;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = std::max(ys[i], 0.0);
    est.mass += w;
    est.mean += w * xs[i];
  }
  if (est.mass > 0.0) {
    est.mean /= est.mass;
    double var = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double w = std::max(ys[i], 0.0);
      var += w * (xs[i] - est.mean) * (xs[i] - est.mean);
    }
    est.sigma = std::sqrt(var / est.mass);
  }
  return est;
}

}  // namespace detail

/// Least-squares Gaussian fit restricted to samples above 1% of the peak,
/// with a second-moment fallback when the fit residual exceeds 10% of the
/// peak (speckled or otherwise non-Gaussian profiles).
inline GaussianFit fit_gaussian(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3) throw FitError("gaussian fit needs >= 3 samples");

  std::size_t peak_idx = 0;
  for (std::size_t i = 1; i < ys.size(); ++i)
    if (ys[i] > ys[peak_idx]) peak_idx = i;
  const double peak = ys[peak_idx];
  if (!(peak > 0.0)) throw FitError("gaussian fit: profile has no positive peak");

  // Contiguous region around the peak above 1% of it; isolated noise-floor
  // samples far from the peak must not enter the fit or the moments.
  std::size_t lo = peak_idx, hi = peak_idx;
  while (lo > 0 && ys[lo - 1] >= 0.01 * peak) --lo;
  while (hi + 1 < ys.size() && ys[hi + 1] >= 0.01 * peak) ++hi;
  std::vector<double> fx, fy;
  for (std::size_t i = lo; i <= hi; ++i) {
    fx.push_back(xs[i]);
    fy.push_back(ys[i]);
  }

  const detail::MomentEstimate moments = detail::weighted_moments(fx, fy);
  if (!(moments.mass > 0.0)) throw FitError("gaussian fit: zero mass above threshold");

  GaussianFit fit;
  fit.amplitude = peak;
  fit.center = moments.mean;
  fit.width = std::max(moments.sigma * std::sqrt(2.0), 1e-6);

  auto residual_rms = [&](double a, double c, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < fx.size(); ++i) {
      const double d = fy[i] - a * std::exp(-(fx[i] - c) * (fx[i] - c) / (s * s));
      acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(fx.size())) / peak;
  };

  if (fx.size() >= 4) {
    // Damped Gauss-Newton on (A, c, s).
    double a = fit.amplitude, c = fit.center, s = fit.width;
    double best = residual_rms(a, c, s);
    for (int iter = 0; iter < 80; ++iter) {
      double jtj[3][3] = {};
      double jtr[3] = {};
      for (std::size_t i = 0; i < fx.size(); ++i) {
        const double dx = fx[i] - c;
        const double e = std::exp(-dx * dx / (s * s));
        const double model = a * e;
        const double r = fy[i] - model;
        const double j[3] = {e, model * 2.0 * dx / (s * s), model * 2.0 * dx * dx / (s * s * s)};
        for (int p = 0; p < 3; ++p) {
          jtr[p] += j[p] * r;
          for (int q = 0; q < 3; ++q) jtj[p][q] += j[p] * j[q];
        }
      }
      for (int p = 0; p < 3; ++p) jtj[p][p] += 1e-12 + 1e-6 * jtj[p][p];
      // Solve the 3x3 normal equations by Gaussian elimination.
      double m[3][4];
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) m[p][q] = jtj[p][q];
        m[p][3] = jtr[p];
      }
      bool singular = false;
      for (int p = 0; p < 3 && !singular; ++p) {
        int pivot = p;
        for (int q = p + 1; q < 3; ++q)
          if (std::abs(m[q][p]) > std::abs(m[pivot][p])) pivot = q;
        if (std::abs(m[pivot][p]) < 1e-30) {
          singular = true;
          break;
        }
        std::swap(m[p], m[pivot]);
        for (int q = p + 1; q < 3; ++q) {
          const double f = m[q][p] / m[p][p];
          for (int k = p; k < 4; ++k) m[q][k] -= f * m[p][k];
        }
      }
      if (singular) break;
      double step[3];
      for (int p = 2; p >= 0; --p) {
        double acc = m[p][3];
        for (int q = p + 1; q < 3; ++q) acc -= m[p][q] * step[q];
        step[p] = acc / m[p][p];
      }
      double damp = 1.0;
      bool improved = false;
      for (int halving = 0; halving < 8; ++halving, damp *= 0.5) {
        const double na = a + damp * step[0];
        const double nc = c + damp * step[1];
        const double ns = s + damp * step[2];
        if (!(na > 0.0) || !(ns > 1e-9)) continue;
        const double r = residual_rms(na, nc, ns);
        if (r < best) {
          a = na;
          c = nc;
          s = ns;
          best = r;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (best <= 0.10) {
      fit.amplitude = a;
      fit.center = c;
      fit.width = std::abs(s);
      fit.rms_residual = best;
      return fit;
    }
  }

  fit.used_moment_fallback = true;
  fit.rms_residual = residual_rms(fit.amplitude, fit.center, fit.width);
  return fit;
}

/// Rejects profiles with a secondary peak comparable to the main one and well
/// separated from it; used where a width is meaningless without unimodality.
inline void require_unimodal(const std::vector<double>& ys, double secondary_fraction = 0.5) {
  std::size_t peak_idx = 0;
  for (std::size_t i = 1; i < ys.size(); ++i)
    if (ys[i] > ys[peak_idx]) peak_idx = i;
  const double peak = ys[peak_idx];
  if (!(peak > 0.0)) throw FitError("profile has no positive peak");

  // Walk outward from the main peak; a rebound above secondary_fraction after
  // the profile has fallen below half of it flags a distinct second mode.
  auto scan = [&](int dir) {
    double running_min = peak;
    for (std::size_t step = 1;; ++step) {
      const long long idx = static_cast<long long>(peak_idx) + dir * static_cast<long long>(step);
      if (idx < 0 || idx >= static_cast<long long>(ys.size())) return;
      const double v = ys[static_cast<std::size_t>(idx)];
      running_min = std::min(running_min, v);
      if (v > secondary_fraction * peak && running_min < 0.5 * secondary_fraction * peak)
        throw FitError("profile is non-unimodal beyond tolerance");
    }
  };
  scan(-1);
  scan(+1);
}

/// Width of an intensity-like profile under the exp(-2u^2/w^2) convention.
inline GaussianFit fit_intensity_width(const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
  GaussianFit fit = fit_gaussian(xs, ys);
  fit.width *= std::sqrt(2.0);
  return fit;
}

/// Centered integer axis -M/2 .. M/2-1 as doubles.
inline std::vector<double> centered_axis(std::size_t m) {
  std::vector<double> xs(m);
  for (std::size_t i = 0; i < m; ++i)
    xs[i] = static_cast<double>(i) - static_cast<double>(m) / 2.0;
  return xs;
}

/// Projection of an MxM nonnegative matrix onto the difference coordinate
/// d = row - col, with circular wraparound: P[d] = sum_s m[(s+d) mod M, s].
/// Output is indexed by the centered axis.
inline std::vector<double> difference_projection(const std::vector<double>& matrix,
                                                 std::size_t m) {
  std::vector<double> profile(m, 0.0);
  const long long half = static_cast<long long>(m) / 2;
  for (std::size_t s = 0; s < m; ++s) {
    for (long long d = -half; d < half; ++d) {
      const std::size_t row = static_cast<std::size_t>(
          (static_cast<long long>(s) + d + static_cast<long long>(m)) % static_cast<long long>(m));
      profile[static_cast<std::size_t>(d + half)] += matrix[row * m + s];
    }
  }
  return profile;
}

}  // namespace bpsim
