#pragma once

// Norms, errors against reference fields, Bloch synthesis of per-alpha
// solutions and log-log rate fits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "floquet/bloch.hpp"
#include "floquet/errors.hpp"
#include "floquet/geometry.hpp"
#include "floquet/qpfem.hpp"

namespace floquet::postproc {

using geometry::UnitCellMesh;

/// ||v||_{L2} of the P1 interpolant; the edge-midpoint rule is exact for |v|^2.
inline double l2_norm(const UnitCellMesh& mesh, std::span<const cplx> values) {
  if (values.size() != mesh.num_nodes()) throw ArgumentError("l2_norm: value count differs from node count");
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& [a, b, c] = mesh.triangles[t];
    const double mids = std::norm(0.5 * (values[a] + values[b])) + std::norm(0.5 * (values[b] + values[c])) +
                        std::norm(0.5 * (values[c] + values[a]));
    sum += mesh.triangle_area(t) / 3.0 * mids;
  }
  return std::sqrt(sum);
}

/// ||grad v||_{L2} of the P1 interpolant (gradients are constant per triangle).
inline double h1_seminorm(const UnitCellMesh& mesh, std::span<const cplx> values) {
  if (values.size() != mesh.num_nodes()) throw ArgumentError("h1_seminorm: value count differs from node count");
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    cplx gx(0.0);
    cplx gy(0.0);
    for (int i = 0; i < 3; ++i) {
      const Point& p1 = mesh.nodes[tri[(i + 1) % 3]];
      const Point& p2 = mesh.nodes[tri[(i + 2) % 3]];
      gx += values[tri[i]] * ((p1.x2 - p2.x2) / (2.0 * area));
      gy += values[tri[i]] * ((p2.x1 - p1.x1) / (2.0 * area));
    }
    sum += area * (std::norm(gx) + std::norm(gy));
  }
  return std::sqrt(sum);
}

struct RelativeError {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Relative L2 and H1-seminorm errors against nodal reference values.
/// Both norms act on P1 interpolants; on structured meshes the gradient part
/// then superconverges, so prefer the sampled-reference overload for H1 rates.
inline RelativeError relative_error(const UnitCellMesh& mesh, std::span<const cplx> numeric,
                                    std::span<const cplx> reference) {
  if (numeric.size() != reference.size()) throw ArgumentError("relative_error: size mismatch");
  std::vector<cplx> diff(numeric.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = numeric[i] - reference[i];
  const double l2ref = l2_norm(mesh, reference);
  const double h1ref = h1_seminorm(mesh, reference);
  if (!(l2ref > 0.0) || !(h1ref > 0.0)) throw DomainError("relative_error: reference has zero norm");
  return {l2_norm(mesh, diff) / l2ref, h1_seminorm(mesh, diff) / h1ref};
}

inline std::vector<cplx> interpolate(const UnitCellMesh& mesh, const std::function<cplx(const Point&)>& field) {
  std::vector<cplx> out(mesh.num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = field(mesh.nodes[i]);
  return out;
}

/// Reference field sampled once per mesh: nodal values plus gradients at
/// the three edge midpoints of every triangle (central differences).
struct ReferenceSample {
  std::vector<cplx> nodal;
  std::vector<std::array<cplx, 6>> midpoint_gradients;  // (gx, gy) per edge
};

inline ReferenceSample sample_reference(const UnitCellMesh& mesh, const std::function<cplx(const Point&)>& field,
                                        double fd_step = 1e-5) {
  ReferenceSample ref;
  ref.nodal = interpolate(mesh, field);
  std::map<std::pair<int, int>, std::array<cplx, 2>> cache;
  auto gradient = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const Point m{0.5 * (mesh.nodes[a].x1 + mesh.nodes[b].x1), 0.5 * (mesh.nodes[a].x2 + mesh.nodes[b].x2)};
    const cplx gx = (field({m.x1 + fd_step, m.x2}) - field({m.x1 - fd_step, m.x2})) / (2.0 * fd_step);
    const cplx gy = (field({m.x1, m.x2 + fd_step}) - field({m.x1, m.x2 - fd_step})) / (2.0 * fd_step);
    const std::array<cplx, 2> g{gx, gy};
    cache.emplace(key, g);
    return g;
  };
  ref.midpoint_gradients.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const auto g = gradient(tri[e], tri[(e + 1) % 3]);
      ref.midpoint_gradients[t][2 * e] = g[0];
      ref.midpoint_gradients[t][2 * e + 1] = g[1];
    }
  }
  return ref;
}

/// Relative errors against a sampled reference: L2 on the nodal interpolant,
/// H1 seminorm against the reference gradient at edge midpoints.
inline RelativeError relative_error(const UnitCellMesh& mesh, std::span<const cplx> numeric,
                                    const ReferenceSample& ref) {
  if (numeric.size() != ref.nodal.size()) throw ArgumentError("relative_error: size mismatch");
  std::vector<cplx> diff(numeric.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = numeric[i] - ref.nodal[i];
  const double l2ref = l2_norm(mesh, ref.nodal);
  double err = 0.0;
  double norm = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    cplx gx(0.0);
    cplx gy(0.0);
    for (int i = 0; i < 3; ++i) {
      const Point& p1 = mesh.nodes[tri[(i + 1) % 3]];
      const Point& p2 = mesh.nodes[tri[(i + 2) % 3]];
      gx += numeric[tri[i]] * ((p1.x2 - p2.x2) / (2.0 * area));
      gy += numeric[tri[i]] * ((p2.x1 - p1.x1) / (2.0 * area));
    }
    const auto& g = ref.midpoint_gradients[t];
    for (int e = 0; e < 3; ++e) {
      err += area / 3.0 * (std::norm(gx - g[2 * e]) + std::norm(gy - g[2 * e + 1]));
      norm += area / 3.0 * (std::norm(g[2 * e]) + std::norm(g[2 * e + 1]));
    }
  }
  if (!(l2ref > 0.0) || !(norm > 0.0)) throw DomainError("relative_error: reference has zero norm");
  return {l2_norm(mesh, diff) / l2ref, std::sqrt(err / norm)};
}

/// Reference given as an evaluator.
inline RelativeError relative_error(const UnitCellMesh& mesh, std::span<const cplx> numeric,
                                    const std::function<cplx(const Point&)>& reference) {
  return relative_error(mesh, numeric, sample_reference(mesh, reference));
}

/// Least-squares slope of log(error) against log(n).
inline double fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw ArgumentError("fit_rate needs at least two points");
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0)) throw DomainError("fit_rate needs positive entries");
    sx += std::log(n);
    sy += std::log(e);
  }
  const double mx = sx / points.size();
  const double my = sy / points.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [n, e] : points) {
    const double dx = std::log(n) - mx;
    sxy += dx * (std::log(e) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("fit_rate needs distinct abscissae");
  return sxy / sxx;
}

/// Cell-by-cell synthesis u_{N,h} on shifts [-J, J].
struct SynthesizedField {
  const UnitCellMesh* mesh = nullptr;
  bloch::BrillouinGrid grid;
  int radius = 0;
  std::vector<std::vector<cplx>> cells;  // cells[j + J]

  const std::vector<cplx>& cell(int shift) const { return cells.at(shift + radius); }
};

inline bloch::BlochFamily family_from(const bloch::BrillouinGrid& grid, std::span<const qpfem::QPSolution> sols) {
  if (static_cast<int>(sols.size()) != grid.n) throw ArgumentError("one solution per Brillouin sample required");
  bloch::BlochFamily fam;
  fam.grid = grid;
  fam.fields.reserve(sols.size());
  for (const auto& s : sols) fam.fields.push_back(s.values);
  return fam;
}

inline SynthesizedField synthesize(const UnitCellMesh& mesh, const bloch::BrillouinGrid& grid,
                                   std::span<const qpfem::QPSolution> sols, int radius = 0) {
  const auto fam = family_from(grid, sols);
  SynthesizedField out;
  out.mesh = &mesh;
  out.grid = grid;
  out.radius = radius;
  for (int j = -radius; j <= radius; ++j) out.cells.push_back(bloch::inverse_bloch_discrete(fam, j));
  return out;
}

/// Evaluates a P1 field of one mesh at arbitrary points via a bucket grid.
/// Points outside every triangle (curved boundaries of a coarser mesh) use
/// the nearest triangle with clamped barycentric coordinates.
class P1Interpolator {
 public:
  P1Interpolator(const UnitCellMesh& mesh, std::span<const cplx> values)
      : mesh_(mesh), values_(values.begin(), values.end()) {
    xmin_ = ymin_ = std::numeric_limits<double>::max();
    double xmax = -xmin_;
    double ymax = -ymin_;
    for (const auto& p : mesh.nodes) {
      xmin_ = std::min(xmin_, p.x1);
      ymin_ = std::min(ymin_, p.x2);
      xmax = std::max(xmax, p.x1);
      ymax = std::max(ymax, p.x2);
    }
    cell_ = std::max(mesh.h, 1e-12);
    nx_ = std::max(1, static_cast<int>(std::ceil((xmax - xmin_) / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil((ymax - ymin_) / cell_)) + 1);
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
      for (int v : mesh.triangles[t]) {
        bx0 = std::min(bx0, mesh.nodes[v].x1);
        bx1 = std::max(bx1, mesh.nodes[v].x1);
        by0 = std::min(by0, mesh.nodes[v].x2);
        by1 = std::max(by1, mesh.nodes[v].x2);
      }
      for (int i = index_x(bx0); i <= index_x(bx1); ++i) {
        for (int r = index_y(by0); r <= index_y(by1); ++r) buckets_[i * ny_ + r].push_back(static_cast<int>(t));
      }
    }
  }

  cplx operator()(const Point& x) const {
    const int bi = index_x(x.x1);
    const int br = index_y(x.x2);
    double best = -1e300;
    int best_t = -1;
    std::array<double, 3> best_l{};
    for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
      for (int i = bi - ring; i <= bi + ring; ++i) {
        for (int r = br - ring; r <= br + ring; ++r) {
          if (i < 0 || r < 0 || i >= nx_ || r >= ny_) continue;
          if (std::max(std::abs(i - bi), std::abs(r - br)) != ring) continue;
          for (int t : buckets_[i * ny_ + r]) {
            const auto l = barycentric(t, x);
            const double worst = std::min({l[0], l[1], l[2]});
            if (worst > best) {
              best = worst;
              best_t = t;
              best_l = l;
            }
          }
        }
      }
      if (best >= -1e-12 || (best_t >= 0 && ring >= 1)) break;
    }
    if (best_t < 0) throw DomainError("P1Interpolator: point far outside the mesh");
    for (auto& v : best_l) v = std::max(v, 0.0);
    const double s = best_l[0] + best_l[1] + best_l[2];
    const auto& tri = mesh_.triangles[best_t];
    return (best_l[0] * values_[tri[0]] + best_l[1] * values_[tri[1]] + best_l[2] * values_[tri[2]]) / s;
  }

 private:
  int index_x(double x) const { return std::clamp(static_cast<int>((x - xmin_) / cell_), 0, nx_ - 1); }
  int index_y(double y) const { return std::clamp(static_cast<int>((y - ymin_) / cell_), 0, ny_ - 1); }

  std::array<double, 3> barycentric(int t, const Point& x) const {
    const auto& tri = mesh_.triangles[t];
    const Point& a = mesh_.nodes[tri[0]];
    const Point& b = mesh_.nodes[tri[1]];
    const Point& c = mesh_.nodes[tri[2]];
    const double det = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
    const double l1 = ((x.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (x.x2 - a.x2)) / det;
    const double l2 = ((b.x1 - a.x1) * (x.x2 - a.x2) - (x.x1 - a.x1) * (b.x2 - a.x2)) / det;
    return {1.0 - l1 - l2, l1, l2};
  }

  const UnitCellMesh& mesh_;
  std::vector<cplx> values_;
  double xmin_ = 0.0;
  double ymin_ = 0.0;
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// One (N, h) experiment cell.
struct ErrorRecord {
  std::string surface;
  double k = 0.0;
  int n = 0;
  double h = 0.0;       // nominal mesh width
  double h_mesh = 0.0;  // max edge length of the mesh actually used
  int order = 0;        // DtN truncation M
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;
  double runtime = 0.0;  // seconds
  std::string status = "ok";
};

}  // namespace floquet::postproc
