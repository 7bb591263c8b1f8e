#pragma once

// Green's functions, Rayleigh wavenumbers and incident-field models for
// scattering from Lambda-periodic surfaces in the upper half-plane.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>

#include "floquet/errors.hpp"
#include "floquet/special.hpp"

namespace floquet {

using cplx = std::complex<double>;

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Wavenumber k, period Lambda and dual period 2 pi / Lambda.
class WaveParams {
 public:
  WaveParams(double k, double period) : k_(k), period_(period), dual_(2.0 * std::numbers::pi / period) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("wavenumber must be positive");
    if (!(period > 0.0) || !std::isfinite(period)) throw ArgumentError("period must be positive");
  }

  double k() const { return k_; }
  double period() const { return period_; }
  double dual_period() const { return dual_; }
  /// (Lambda / 2 pi)^{1/2}, the Bloch transform normalisation.
  double bloch_scale() const { return std::sqrt(period_ / (2.0 * std::numbers::pi)); }

 private:
  double k_;
  double period_;
  double dual_;
};

/// Source point strictly above {x2 = 0} together with its mirror image.
class SourcePoint {
 public:
  SourcePoint(double y1, double y2) : y_{y1, y2}, mirror_{y1, -y2} {
    if (!(y2 > 0.0)) throw DomainError("source point must satisfy y2 > 0");
  }
  const Point& y() const { return y_; }
  const Point& mirror() const { return mirror_; }

 private:
  Point y_;
  Point mirror_;
};

struct RayleighIndex {
  int j = 0;
  double xi = 0.0;
  cplx beta;
  bool anomaly = false;

  bool propagating() const { return beta.imag() == 0.0; }
};

inline constexpr double kAnomalyTolerance = 1e-12;

/// beta(j) = sqrt(k^2 - xi^2) with Im beta >= 0; xi = Lambda* j + alpha.
inline RayleighIndex beta(const WaveParams& p, double alpha, int j) {
  RayleighIndex r;
  r.j = j;
  r.xi = p.dual_period() * j + alpha;
  const double ax = std::fabs(r.xi);
  const double k = p.k();
  const double d = (k - ax) * (k + ax);
  if (ax <= k) {
    r.beta = {std::sqrt(d), 0.0};
  } else {
    r.beta = {0.0, std::sqrt(-d)};
  }
  r.anomaly = std::fabs(ax - k) <= kAnomalyTolerance * k;
  return r;
}

/// Dirichlet Green's function of the upper half-plane,
/// (i/4)[H0(k|x-y|) - H0(k|x-y'|)].
inline cplx halfspace_green(const WaveParams& p, const Point& x, const SourcePoint& src) {
  const Point& y = src.y();
  const double dx = x.x1 - y.x1;
  const double dm = x.x2 - y.x2;
  const double dp = x.x2 + y.x2;
  const double a = p.k() * std::hypot(dx, dm);
  const double b = p.k() * std::hypot(dx, dp);
  if (a == 0.0 || b == 0.0) throw DomainError("halfspace_green evaluated at the source or its image");
  const cplx quarter_i(0.0, 0.25);
  if (std::fabs(a - b) <= 1e-6 * b) {
    // a^2 - b^2 = -4 k^2 x2 y2 exactly.
    const double d2 = -4.0 * p.k() * p.k() * x.x2 * y.x2;
    return quarter_i * special::hankel1_0_difference(a, b, d2);
  }
  return quarter_i * (special::hankel1_0(a) - special::hankel1_0(b));
}

namespace detail {

// Sums term(j) over j = 0, +-1, +-2, ... for a Rayleigh series whose
// evanescent terms decay like exp(-|beta| * decay_length).
template <typename Term>
cplx rayleigh_sum(const WaveParams& p, double alpha, double decay_length, double tol, Term&& term) {
  const double dual = p.dual_period();
  const double cap_d =
      10.0 * (p.k() / dual + std::log(1.0 / tol) / (dual * decay_length)) + 10.0;
  const int cap = static_cast<int>(std::min(cap_d, 5e6));
  const double ratio = std::exp(-dual * decay_length);
  const double tail_factor = 1.0 / (1.0 - ratio);
  cplx acc = term(0);
  for (int j = 1; j <= cap; ++j) {
    const cplx plus = term(j);
    const cplx minus = term(-j);
    acc += plus;
    acc += minus;
    const double xi_min = std::min(std::fabs(dual * j + alpha), std::fabs(-dual * j + alpha));
    if (xi_min > p.k()) {
      const double block = std::max(std::abs(plus), std::abs(minus)) * tail_factor;
      if (block < tol * std::abs(acc)) break;
      if (acc == cplx(0.0) && block == 0.0) break;
    }
  }
  return acc;
}

inline void require_no_anomaly(const WaveParams& p, double alpha) {
  const double dual = p.dual_period();
  const int jlo = static_cast<int>(std::floor((-p.k() - alpha) / dual)) - 1;
  const int jhi = static_cast<int>(std::ceil((p.k() - alpha) / dual)) + 1;
  for (int j = jlo; j <= jhi; ++j) {
    if (std::abs(beta(p, alpha, j).beta) < kAnomalyTolerance * p.k()) {
      throw AnomalyError("Rayleigh order at a Wood anomaly; use the sinc representation");
    }
  }
}

}  // namespace detail

inline constexpr double kDefaultSeparation = 1e-3;

/// alpha-quasiperiodic Green's function from its Rayleigh (eigenfunction)
/// expansion, (i / 2 Lambda) sum_j e^{i xi_j (x1-y1) + i beta_j |x2-y2|} / beta_j.
inline cplx qp_green_spectral(const WaveParams& p, double alpha, const Point& x, const Point& y,
                              double tol = 1e-14, double min_separation = kDefaultSeparation) {
  const double sep = std::fabs(x.x2 - y.x2);
  if (sep < min_separation) throw SeparationError("qp_green_spectral: |x2 - y2| below minimum separation");
  detail::require_no_anomaly(p, alpha);
  const double dx = x.x1 - y.x1;
  const cplx sum = detail::rayleigh_sum(p, alpha, sep, tol, [&](int j) {
    const RayleighIndex r = beta(p, alpha, j);
    return std::exp(cplx(0.0, r.xi * dx) + cplx(0.0, 1.0) * r.beta * sep) / r.beta;
  });
  return cplx(0.0, 1.0 / (2.0 * p.period())) * sum;
}

/// Partial image sum (i/4) sum_{|j|<=jmax} H0(k|x - y - (Lambda j, 0)|) e^{i Lambda j alpha}.
/// Conditionally convergent; for cross-checks only.
inline cplx qp_green_spatial(const WaveParams& p, double alpha, const Point& x, const Point& y, int jmax) {
  cplx sum(0.0);
  const double dm = x.x2 - y.x2;
  for (int j = -jmax; j <= jmax; ++j) {
    const double dx = x.x1 - y.x1 - p.period() * j;
    const double r = std::hypot(dx, dm);
    if (r == 0.0) throw DomainError("qp_green_spatial: x on the translated source lattice");
    sum += special::hankel1_0(p.k() * r) * std::exp(cplx(0.0, p.period() * j * alpha));
  }
  return cplx(0.0, 0.25) * sum;
}

/// Bloch transform of the half-space point source G(., y), evaluated with
/// the sinc form so that it stays finite at Wood anomalies:
/// (Lambda/2pi)^{1/2} / Lambda * sum_j e^{i xi_j (x1-y1) + i beta_j x2} sinc(beta_j y2) y2.
/// Requires x2 > y2 (the Rayleigh region above the source).
inline cplx bloch_incident_point_source(const WaveParams& p, double alpha, const Point& x,
                                        const SourcePoint& src, double tol = 1e-15,
                                        double min_separation = kDefaultSeparation) {
  if (!(x.x2 > 0.0)) throw DomainError("bloch_incident_point_source requires x2 > 0");
  const Point& y = src.y();
  const double sep = x.x2 - y.x2;
  if (sep < min_separation) throw SeparationError("bloch_incident_point_source requires x2 > y2");
  const double dx = x.x1 - y.x1;
  const cplx i(0.0, 1.0);
  const cplx sum = detail::rayleigh_sum(p, alpha, sep, tol, [&](int j) {
    const RayleighIndex r = beta(p, alpha, j);
    cplx vertical;
    if (std::abs(r.beta) * y.x2 < 1.0) {
      vertical = std::exp(i * r.beta * x.x2) * special::sinc(r.beta * y.x2) * y.x2;
    } else {
      // Same quantity without the overflow of sinh(|beta| y2) for large |beta|.
      vertical = (std::exp(i * r.beta * (x.x2 + y.x2)) - std::exp(i * r.beta * sep)) / (2.0 * i * r.beta);
    }
    return std::exp(cplx(0.0, r.xi * dx)) * vertical;
  });
  return p.bloch_scale() / p.period() * sum;
}

/// Angular density for a downward Herglotz wave. The support
/// [theta_min, theta_max] must stay grazing_margin away from +-pi/2.
struct HerglotzKernel {
  std::function<cplx(double)> density;
  double theta_min = -0.5;
  double theta_max = 0.5;
  double grazing_margin = 0.1;
  int order = 64;

  void validate() const {
    const double limit = std::numbers::pi / 2.0 - grazing_margin;
    if (!(grazing_margin > 0.0)) throw ArgumentError("Herglotz grazing margin must be positive");
    if (!(theta_min < theta_max)) throw ArgumentError("Herglotz support is empty");
    if (theta_min < -limit || theta_max > limit) {
      throw GrazingError("Herglotz support reaches into the grazing margin");
    }
    if (!density) throw ArgumentError("Herglotz density is not set");
  }
};

/// Smooth compactly supported bump amplitude * exp(1 - 1/(1 - s^2)),
/// s = (theta - center) / half_width.
inline HerglotzKernel herglotz_bump(double center, double half_width, cplx amplitude = 1.0,
                                    double grazing_margin = 0.1) {
  HerglotzKernel kernel;
  kernel.theta_min = center - half_width;
  kernel.theta_max = center + half_width;
  kernel.grazing_margin = grazing_margin;
  kernel.density = [=](double theta) -> cplx {
    const double s = (theta - center) / half_width;
    if (std::fabs(s) >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
  };
  kernel.validate();
  return kernel;
}

/// v_g(x) = int e^{ik(sin t x1 - cos t x2)} g(t) dt by composite Gauss-Legendre;
/// the panel count grows with k|x| so the oscillation stays resolved.
inline cplx herglotz_eval(const HerglotzKernel& kernel, const WaveParams& p, const Point& x) {
  kernel.validate();
  const auto [nodes, weights] = special::gauss_legendre(kernel.order);
  const double span = kernel.theta_max - kernel.theta_min;
  const double oscillations = p.k() * std::hypot(x.x1, x.x2) * span / (2.0 * std::numbers::pi);
  const int panels = 4 + static_cast<int>(std::ceil(oscillations * 8.0 / kernel.order));
  const double width = span / panels;
  cplx sum(0.0);
  for (int q = 0; q < panels; ++q) {
    const double a = kernel.theta_min + q * width;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const double t = a + 0.5 * width * (nodes[n] + 1.0);
      const cplx g = kernel.density(t);
      if (g == cplx(0.0)) continue;
      const double phase = p.k() * (std::sin(t) * x.x1 - std::cos(t) * x.x2);
      sum += 0.5 * width * weights[n] * g * std::exp(cplx(0.0, phase));
    }
  }
  return sum;
}

/// Downward Bloch coefficients d(j) of a Herglotz wave at quasimomentum
/// alpha, so that (J v_g)(alpha, x) = sum_j d(j) e^{i xi_j x1 - i beta_j x2}.
/// Only propagating orders appear; map holds every propagating order.
inline std::map<int, cplx> herglotz_bloch_modes(const HerglotzKernel& kernel, const WaveParams& p,
                                                double alpha) {
  kernel.validate();
  std::map<int, cplx> modes;
  const double dual = p.dual_period();
  const double k = p.k();
  const int jlo = static_cast<int>(std::floor((-k - alpha) / dual));
  const int jhi = static_cast<int>(std::ceil((k - alpha) / dual));
  const double limit = std::numbers::pi / 2.0 - kernel.grazing_margin;
  for (int j = jlo; j <= jhi; ++j) {
    const double xi = dual * j + alpha;
    if (std::fabs(xi) >= k) continue;
    const double theta = std::asin(xi / k);
    const cplx g = (theta >= kernel.theta_min && theta <= kernel.theta_max) ? kernel.density(theta) : cplx(0.0);
    if (std::fabs(theta) >= limit && g != cplx(0.0)) {
      throw GrazingError("propagating order inside the Herglotz grazing margin");
    }
    modes[j] = std::sqrt(2.0 * std::numbers::pi / p.period()) * g / (k * std::cos(theta));
  }
  return modes;
}

}  // namespace floquet
