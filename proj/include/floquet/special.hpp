#pragma once

// Bessel/Hankel functions of orders 0 and 1, sinc, and Gauss-Legendre rules.
//
// Small arguments use the ascending series in extended precision, large
// arguments the Hankel asymptotic expansion truncated at its smallest term.
// The switchover at z = 12 keeps both branches below ~5e-11 relative error.

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "floquet/errors.hpp"

namespace floquet::special {

using cplx = std::complex<double>;

inline constexpr double kSeriesSwitch = 12.0;
inline constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;

namespace detail {

struct BesselPair {
  long double j;
  long double y;
};

inline BesselPair series_order0(long double z) {
  const long double q = z * z / 4.0L;
  long double term = 1.0L;  // (-1)^k q^k / (k!)^2
  long double j0 = 1.0L;
  long double harmonic = 0.0L;
  long double ysum = 0.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    harmonic += 1.0L / k;
    j0 += term;
    ysum -= harmonic * term;
    if (std::fabs(term) * (1.0L + harmonic) < 1e-22L * std::fabs(j0) && k > 2) break;
  }
  const long double y0 = (2.0L / kPiL) * ((std::log(z / 2.0L) + kEulerGamma) * j0 + ysum);
  return {j0, y0};
}

inline BesselPair series_order1(long double z) {
  const long double half = z / 2.0L;
  const long double q = half * half;
  // term_k = (-1)^k (z/2)^(2k+1) / (k! (k+1)!)
  long double term = half;
  long double j1 = term;
  // psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
  long double harmonic = 0.0L;
  long double psisum = (harmonic * 2.0L + 1.0L - 2.0L * kEulerGamma) * term;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * (k + 1));
    harmonic += 1.0L / k;
    j1 += term;
    psisum += (2.0L * harmonic + 1.0L / (k + 1) - 2.0L * kEulerGamma) * term;
    if (std::fabs(term) * (2.0L + 2.0L * harmonic) < 1e-22L * std::fabs(j1) && k > 2) break;
  }
  const long double y1 =
      -2.0L / (kPiL * z) + (2.0L / kPiL) * std::log(half) * j1 - psisum / kPiL;
  return {j1, y1};
}

// H_nu^(1)(z) ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / z^k
inline cplx hankel_asymptotic(int nu, long double z) {
  const long double mu = 4.0L * nu * nu;
  std::complex<long double> sum(1.0L, 0.0L);
  std::complex<long double> term(1.0L, 0.0L);
  long double prev = 1.0L;
  for (int k = 1; k < 100; ++k) {
    const long double odd = 2.0L * k - 1.0L;
    const long double factor = (mu - odd * odd) / (8.0L * k * z);
    const std::complex<long double> next = term * std::complex<long double>(0.0L, 1.0L) * factor;
    const long double mag = std::abs(next);
    if (mag >= prev) break;  // asymptotic series: stop at the smallest term
    term = next;
    sum += term;
    prev = mag;
    if (mag < 1e-20L) break;
  }
  const long double phase = z - nu * kPiL / 2.0L - kPiL / 4.0L;
  const std::complex<long double> carrier(std::cos(phase), std::sin(phase));
  const std::complex<long double> r = std::sqrt(2.0L / (kPiL * z)) * carrier * sum;
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

inline void require_positive(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw DomainError("Hankel function evaluated at non-positive argument");
  }
}

}  // namespace detail

/// J0(z) + i Y0(z) for z > 0.
inline cplx hankel1_0(double z) {
  detail::require_positive(z);
  if (z <= kSeriesSwitch) {
    const auto p = detail::series_order0(z);
    return {static_cast<double>(p.j), static_cast<double>(p.y)};
  }
  return detail::hankel_asymptotic(0, z);
}

/// J1(z) + i Y1(z) for z > 0.
inline cplx hankel1_1(double z) {
  detail::require_positive(z);
  if (z <= kSeriesSwitch) {
    const auto p = detail::series_order1(z);
    return {static_cast<double>(p.j), static_cast<double>(p.y)};
  }
  return detail::hankel_asymptotic(1, z);
}

/// H0(a) - H0(b) for nearly equal a, b > 0, given d2 = a^2 - b^2 computed
/// without cancellation by the caller.
inline cplx hankel1_0_difference(double a, double b, double d2) {
  detail::require_positive(a);
  detail::require_positive(b);
  if (d2 == 0.0) return {0.0, 0.0};
  const double m = 0.5 * (a + b);
  if (m > kSeriesSwitch) {
    // Symmetric difference around the midpoint; the cubic term is below
    // (delta/m)^2 relative and dropped.
    const double delta = d2 / (a + b);
    return -hankel1_1(m) * delta;
  }
  const long double u = static_cast<long double>(a) * a / 4.0L;
  const long double v = static_cast<long double>(b) * b / 4.0L;
  const long double d = static_cast<long double>(d2) / 4.0L;
  long double coeff = 1.0L;  // (-1)^k / (k!)^2
  long double upow = 1.0L;   // u^(k-1)
  long double vpow = 1.0L;   // v^(k-1)
  long double diff = 0.0L;   // u^k - v^k
  long double harmonic = 0.0L;
  long double dj = 0.0L;
  long double dsum = 0.0L;
  for (int k = 1; k < 200; ++k) {
    diff = u * diff + d * vpow;
    upow *= u;
    vpow *= v;
    coeff *= -1.0L / (static_cast<long double>(k) * k);
    harmonic += 1.0L / k;
    const long double t = coeff * diff;
    dj += t;
    dsum -= harmonic * t;
    if (std::fabs(t) * (1.0L + harmonic) < 1e-22L * std::fabs(dj) && k > 2) break;
  }
  const auto pa = detail::series_order0(a);
  const long double log_ratio = 0.5L * std::log1p(static_cast<long double>(d2) /
                                                  (static_cast<long double>(b) * b));
  const long double dy =
      (2.0L / kPiL) *
      ((std::log(static_cast<long double>(b) / 2.0L) + kEulerGamma) * dj + log_ratio * pa.j + dsum);
  return {static_cast<double>(dj), static_cast<double>(dy)};
}

/// sin(t)/t with sinc(0) = 1.
inline double sinc(double t) {
  if (std::fabs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0);
  }
  return std::sin(t) / t;
}

/// Complex sinc; entire in t^2, so purely imaginary arguments are fine.
inline cplx sinc(cplx t) {
  if (std::abs(t) < 1e-4) {
    const cplx t2 = t * t;
    return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0);
  }
  return std::sin(t) / t;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw ArgumentError("Gauss-Legendre order must be positive");
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = z;
        p0 = 1.0;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    if (n == 1) {
      x[0] = 0.0;
      w[0] = 2.0;
      break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace floquet::special
