#pragma once

// Shared test utilities: independent oracles and statistics helpers. Nothing
// here may call into the implementation paths it is used to check.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bpsim/coincidence.hpp"
#include "bpsim/grid.hpp"
#include "bpsim/rng.hpp"

namespace bpsim::test {

/// Quadratic-cost centered unitary DFT along one axis; the reference for the
/// fast transform.
inline std::vector<cplx> naive_centered_dft(const std::vector<cplx>& in, bool inverse) {
  const std::size_t m = in.size();
  const double half = static_cast<double>(m) / 2.0;
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    cplx acc(0.0, 0.0);
    for (std::size_t n = 0; n < m; ++n) {
      const double phase = sign * 2.0 * std::numbers::pi *
                           (static_cast<double>(k) - half) * (static_cast<double>(n) - half) /
                           static_cast<double>(m);
      acc += in[n] * cplx(std::cos(phase), std::sin(phase));
    }
    out[k] = acc / std::sqrt(static_cast<double>(m));
  }
  return out;
}

/// Naive centered 2D DFT of a joint amplitude (rows then columns).
inline std::vector<cplx> naive_centered_dft_2d(const std::vector<cplx>& in, std::size_t m,
                                               bool inverse) {
  std::vector<cplx> tmp(m * m), out(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<cplx> row(in.begin() + static_cast<long>(i * m),
                          in.begin() + static_cast<long>((i + 1) * m));
    const std::vector<cplx> t = naive_centered_dft(row, inverse);
    for (std::size_t j = 0; j < m; ++j) tmp[i * m + j] = t[j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<cplx> col(m);
    for (std::size_t i = 0; i < m; ++i) col[i] = tmp[i * m + j];
    const std::vector<cplx> t = naive_centered_dft(col, inverse);
    for (std::size_t i = 0; i < m; ++i) out[i * m + j] = t[i];
  }
  return out;
}

inline BiphotonState random_normalized_state(const GridSpec& grid, std::uint64_t seed,
                                             Domain domain = Domain::Momentum) {
  BiphotonState s = make_state(grid, domain);
  CounterRng rng(seed, 0xABCDEF);
  for (cplx& a : s.amplitude) a = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  s.normalize();
  return s;
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// Upper-tail p-value of a chi-squared variable via the Wilson-Hilferty
/// cube-root normal approximation; ample for the large dof used here.
inline double chi_squared_pvalue(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  const double z = (std::cbrt(statistic / dof) - (1.0 - 2.0 / (9.0 * dof))) /
                   std::sqrt(2.0 / (9.0 * dof));
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// Pearson goodness-of-fit with pooling of low-expectation bins (< 5 counts
/// expected). Returns the p-value.
inline double chi_squared_gof_pvalue(const std::vector<double>& observed,
                                     const std::vector<double>& probabilities, double n_total) {
  double stat = 0.0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  std::size_t bins = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = probabilities[i] * n_total;
    if (expected < 5.0) {
      pooled_obs += observed[i];
      pooled_exp += expected;
      continue;
    }
    stat += (observed[i] - expected) * (observed[i] - expected) / expected;
    ++bins;
  }
  if (pooled_exp > 0.0) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++bins;
  }
  return chi_squared_pvalue(stat, static_cast<double>(bins) - 1.0);
}

/// Total-variation distance between a probability vector and a normalized
/// count vector.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& counts,
                              double n_total) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - counts[i] / n_total);
  return acc / 2.0;
}

}  // namespace bpsim::test
