#pragma once

// Discrete Floquet-Bloch transforms over a uniformly sampled Brillouin zone.
//
// Zone convention: alpha in (-Lambda*/2, Lambda*/2], Lambda* = 2 pi / Lambda,
// samples alpha_m = -Lambda*/2 + m Lambda*/N for m = 1..N (right endpoint
// included), trapezoid weight Lambda*/N.

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <map>
#include <numeric>
#include <numbers>
#include <span>
#include <vector>

#include "floquet/errors.hpp"

namespace floquet::bloch {

using cplx = std::complex<double>;

/// Reduced fraction p/q with alpha = Lambda* (p/q - 1/2); identifies a
/// Brillouin sample independently of N.
struct SampleKey {
  long p = 0;
  long q = 1;
  auto operator<=>(const SampleKey&) const = default;
};

struct BrillouinGrid {
  double period = 0.0;
  double dual = 0.0;
  int n = 0;
  std::vector<double> alphas;
  double weight = 0.0;

  SampleKey key(int m) const {
    const long g = std::gcd(static_cast<long>(m), static_cast<long>(n));
    return {m / g, n / g};
  }
};

/// alpha for a reduced sample key; identical bits for every N sharing the key.
inline double sample_alpha(double dual, SampleKey key) {
  return dual * (static_cast<double>(2 * key.p - key.q) / static_cast<double>(2 * key.q));
}

inline BrillouinGrid brillouin_samples(double period, int n) {
  if (n < 1) throw ArgumentError("Brillouin grid needs at least one sample");
  if (!(period > 0.0)) throw ArgumentError("period must be positive");
  BrillouinGrid g;
  g.period = period;
  g.dual = 2.0 * std::numbers::pi / period;
  g.n = n;
  g.weight = g.dual / n;
  g.alphas.reserve(n);
  for (int m = 1; m <= n; ++m) g.alphas.push_back(sample_alpha(g.dual, g.key(m)));
  return g;
}

/// Finitely supported sequence of cell samples, keyed by cell shift j.
struct CellSequence {
  std::map<int, std::vector<cplx>> values;

  int support_radius() const {
    int r = 0;
    for (const auto& [j, v] : values) r = std::max(r, std::abs(j));
    return r;
  }
  std::size_t grid_size() const { return values.empty() ? 0 : values.begin()->second.size(); }
};

struct BlochFamily {
  BrillouinGrid grid;
  std::vector<std::vector<cplx>> fields;  // fields[m-1] belongs to alphas[m-1]

  void validate() const {
    if (static_cast<int>(fields.size()) != grid.n) throw ArgumentError("Bloch family size differs from grid");
    for (const auto& f : fields) {
      if (f.size() != fields.front().size()) throw ArgumentError("Bloch family fields on different grids");
    }
  }
};

namespace detail {

// e^{i Lambda j alpha_m} with Lambda alpha_m = pi (2m - N) / N, reduced in
// integer arithmetic so the phase is exact for large shifts.
inline cplx shift_phase(long j, int m, int n) {
  const long two_n = 2L * n;
  long r = (j * (2L * m - n)) % two_n;
  if (r < 0) r += two_n;
  const double angle = std::numbers::pi * static_cast<double>(r) / n;
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace detail

/// w(alpha_m, x) = (Lambda/2pi)^{1/2} sum_j seq(j, x) e^{-i Lambda j alpha_m}.
inline BlochFamily forward_bloch(const CellSequence& seq, const BrillouinGrid& grid) {
  const std::size_t size = seq.grid_size();
  for (const auto& [j, v] : seq.values) {
    if (v.size() != size) throw ArgumentError("cell sequence samples on different grids");
  }
  const double scale = std::sqrt(grid.period / (2.0 * std::numbers::pi));
  BlochFamily fam;
  fam.grid = grid;
  fam.fields.assign(grid.n, std::vector<cplx>(size, cplx(0.0)));
  for (int m = 1; m <= grid.n; ++m) {
    auto& out = fam.fields[m - 1];
    for (const auto& [j, v] : seq.values) {
      const cplx phase = scale * std::conj(detail::shift_phase(j, m, grid.n));
      for (std::size_t i = 0; i < size; ++i) out[i] += v[i] * phase;
    }
  }
  return fam;
}

/// Trapezoid inverse on the cell shifted by `shift` periods:
/// (Lambda/2pi)^{1/2} (Lambda*/N) sum_m w(alpha_m, x) e^{i Lambda shift alpha_m}.
/// The sum runs in ascending m regardless of how the family was produced.
inline std::vector<cplx> inverse_bloch_discrete(const BlochFamily& family, int shift = 0) {
  family.validate();
  const auto& grid = family.grid;
  const std::size_t size = family.fields.empty() ? 0 : family.fields.front().size();
  const double factor = std::sqrt(grid.period / (2.0 * std::numbers::pi)) * grid.weight;
  std::vector<cplx> out(size, cplx(0.0));
  for (int m = 1; m <= grid.n; ++m) {
    const cplx phase = detail::shift_phase(shift, m, grid.n);
    const auto& w = family.fields[m - 1];
    if (shift == 0) {
      for (std::size_t i = 0; i < size; ++i) out[i] += w[i];
    } else {
      for (std::size_t i = 0; i < size; ++i) out[i] += w[i] * phase;
    }
  }
  for (auto& v : out) v *= factor;
  return out;
}

struct RoundTrip {
  double deviation = 0.0;
  bool aliased = false;  // N <= 2J: deviation measures aliasing, not an error
};

inline RoundTrip roundtrip_check(const CellSequence& seq, double period, int n) {
  RoundTrip result;
  if (seq.values.empty()) return result;
  result.aliased = n <= 2 * seq.support_radius();
  const auto family = forward_bloch(seq, brillouin_samples(period, n));
  for (const auto& [j, v] : seq.values) {
    const auto back = inverse_bloch_discrete(family, j);
    for (std::size_t i = 0; i < v.size(); ++i) {
      result.deviation = std::max(result.deviation, std::abs(back[i] - v[i]));
    }
  }
  return result;
}

}  // namespace floquet::bloch
