#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "bpsim/errors.hpp"

namespace bpsim {

using cplx = std::complex<double>;

enum class Domain { Position, Momentum };
enum class FourierDirection { Forward, Inverse };

inline const char* to_string(Domain d) { return d == Domain::Position ? "position" : "momentum"; }

/// Discrete transverse grid. Coordinates are centered: x_k = (k - M/2) * pitch.
/// All widths elsewhere in the library are expressed in these pixel units.
struct GridSpec {
  std::size_t size = 0;
  double pitch = 1.0;

  double coordinate(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(size) / 2.0) * pitch;
  }
  bool operator==(const GridSpec&) const = default;
};

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline GridSpec make_grid(std::size_t size, double pitch) {
  if (!is_power_of_two(size) || size < 2)
    throw ConfigError("grid size must be a power of two >= 2, got " + std::to_string(size));
  if (!(pitch > 0.0)) throw ConfigError("grid pitch must be positive");
  return GridSpec{size, pitch};
}

/// One-photon complex field on a grid, tagged with its current domain.
struct Field1D {
  GridSpec grid;
  std::vector<cplx> values;
  Domain domain = Domain::Position;
};

inline Field1D make_field(const GridSpec& grid, Domain domain) {
  return Field1D{grid, std::vector<cplx>(grid.size), domain};
}

/// Joint two-photon amplitude over (idler, signal) coordinates, row-major:
/// amplitude[i * M + j] corresponds to (x_i = i-th pixel, x_s = j-th pixel).
/// Normalized to unit total probability after construction and after every
/// unitary step.
struct BiphotonState {
  GridSpec grid;
  std::vector<cplx> amplitude;
  Domain domain = Domain::Momentum;

  cplx& at(std::size_t idler, std::size_t signal) { return amplitude[idler * grid.size + signal]; }
  const cplx& at(std::size_t idler, std::size_t signal) const {
    return amplitude[idler * grid.size + signal];
  }

  double norm_squared() const {
    double acc = 0.0;
    for (const cplx& a : amplitude) acc += std::norm(a);
    return acc;
  }

  void normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw InvariantError("cannot normalize a zero-amplitude state");
    const double inv = 1.0 / std::sqrt(n2);
    for (cplx& a : amplitude) a *= inv;
  }
};

inline BiphotonState make_state(const GridSpec& grid, Domain domain) {
  return BiphotonState{grid, std::vector<cplx>(grid.size * grid.size), domain};
}

namespace detail {

/// Radix-2 Cooley-Tukey with a per-call twiddle table. Grid sizes are powers
/// of two by construction, so no other radix is needed.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n), twiddle_(n / 2) {
    if (!is_power_of_two(n)) throw InvariantError("FFT length must be a power of two");
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      twiddle_[j] = cplx(std::cos(ang), std::sin(ang));
    }
  }

  std::size_t size() const { return n_; }

  void transform(cplx* a, bool inverse) const {
    bit_reverse(a);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t stride = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          cplx w = twiddle_[j * stride];
          if (inverse) w = std::conj(w);
          const cplx u = a[i + j];
          const cplx v = a[i + j + len / 2] * w;
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
        }
      }
    }
  }

 private:
  void bit_reverse(cplx* a) const {
    for (std::size_t i = 1, j = 0; i < n_; ++i) {
      std::size_t bit = n_ >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
  }

  std::size_t n_;
  std::vector<cplx> twiddle_;
};

inline void rotate_half(cplx* a, std::size_t n) {
  const std::size_t h = n / 2;
  for (std::size_t i = 0; i < h; ++i) std::swap(a[i], a[i + h]);
}

/// Unitary centered DFT along one axis:
///   F[k] = (1/sqrt(M)) * sum_n f[n] exp(-+ 2*pi*i (k - M/2)(n - M/2) / M).
/// Implemented as swap-halves / FFT / swap-halves, which realizes the centered
/// kernel exactly for even M.
inline void centered_unitary_transform(const Fft& fft, cplx* a, FourierDirection dir) {
  const std::size_t n = fft.size();
  rotate_half(a, n);
  fft.transform(a, dir == FourierDirection::Inverse);
  rotate_half(a, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) a[i] *= scale;
}

inline void transpose_square(cplx* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) std::swap(a[i * n + j], a[j * n + i]);
}

}  // namespace detail

/// Centered unitary DFT of a one-photon field; flips the domain tag.
inline Field1D fourier_1d(const Field1D& field, FourierDirection dir) {
  Field1D out = field;
  detail::Fft fft(out.grid.size);
  detail::centered_unitary_transform(fft, out.values.data(), dir);
  out.domain = field.domain == Domain::Position ? Domain::Momentum : Domain::Position;
  return out;
}

inline void check_normalized(const BiphotonState& state, const char* where);

/// Centered unitary DFT applied independently along both coordinates of the
/// joint amplitude. Unitary: preserves the norm; Inverse(Forward(s)) == s.
inline BiphotonState fourier_2d(const BiphotonState& state, FourierDirection dir) {
  check_normalized(state, "fourier_2d");
  const std::size_t m = state.grid.size;
  BiphotonState out = state;
  detail::Fft fft(m);
  for (std::size_t i = 0; i < m; ++i)
    detail::centered_unitary_transform(fft, out.amplitude.data() + i * m, dir);
  detail::transpose_square(out.amplitude.data(), m);
  for (std::size_t i = 0; i < m; ++i)
    detail::centered_unitary_transform(fft, out.amplitude.data() + i * m, dir);
  detail::transpose_square(out.amplitude.data(), m);
  out.domain = state.domain == Domain::Position ? Domain::Momentum : Domain::Position;
  return out;
}

/// Norm tolerance contract shared by every unitary step.
inline constexpr double kNormTolerance = 1e-9;

inline void check_normalized(const BiphotonState& state, const char* where) {
  const double n2 = state.norm_squared();
  if (std::abs(n2 - 1.0) > 1e-6)
    throw InvariantError(std::string(where) + ": state norm^2 = " + std::to_string(n2) +
                         ", expected 1");
}

}  // namespace bpsim
