#pragma once

// Periodic surface profiles and triangulations of one periodicity cell
// {-Lambda/2 <= x1 <= Lambda/2, profile(x1) <= x2 <= H}.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "floquet/errors.hpp"
#include "floquet/fields.hpp"

namespace floquet::geometry {

/// c1 sin(L* t) + c2 cos(2 L* t) + c0 with L* = 2 pi / Lambda.
struct Sinusoidal {
  double c1 = 0.0;
  double c2 = 0.0;
  double c0 = 0.0;
};

/// Continuous piecewise-linear graph through (t, value) knots covering
/// [-Lambda/2, Lambda/2]; the end values must agree.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;
};

/// Step function: levels[i] on (breaks[i-1], breaks[i]); levels.size() ==
/// breaks.size() + 1 and the outer levels agree. At a jump the profile takes
/// the larger adjacent level (closed upper piece).
struct PiecewiseConstant {
  std::vector<double> breaks;
  std::vector<double> levels;
};

/// Equispaced periodic samples at t_i = -Lambda/2 + i Lambda/n, linear in between.
struct Tabulated {
  std::vector<double> samples;
};

class SurfaceProfile {
 public:
  using Kind = std::variant<Sinusoidal, PiecewiseLinear, PiecewiseConstant, Tabulated>;

  SurfaceProfile(Kind kind, double period) : kind_(std::move(kind)), period_(period) { validate(); }

  const Kind& kind() const { return kind_; }
  double period() const { return period_; }
  bool is_step() const { return std::holds_alternative<PiecewiseConstant>(kind_); }
  /// Smooth profiles get new boundary vertices projected onto the curve.
  bool is_curved() const {
    return std::holds_alternative<Sinusoidal>(kind_) || std::holds_alternative<Tabulated>(kind_);
  }

  /// Height at t, periodically extended.
  double operator()(double t) const { return eval(wrap(t)); }

  /// Kinks and jumps inside (-Lambda/2, Lambda/2), sorted; these must be mesh columns.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (const auto* pl = std::get_if<PiecewiseLinear>(&kind_)) {
      for (const auto& [t, v] : pl->knots) {
        if (t > -period_ / 2.0 && t < period_ / 2.0) out.push_back(t);
      }
    } else if (const auto* pc = std::get_if<PiecewiseConstant>(&kind_)) {
      out = pc->breaks;
    }
    return out;
  }

  double min_height() const { return extreme(false); }
  double max_height() const { return extreme(true); }

  /// Wrap t into (-Lambda/2, Lambda/2].
  double wrap(double t) const {
    const double half = period_ / 2.0;
    if (t > -half && t <= half) return t;
    double s = std::fmod(t + half, period_);
    if (s <= 0.0) s += period_;
    return s - half;
  }

 private:
  double eval(double t) const {
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Sinusoidal>) {
            const double w = 2.0 * std::numbers::pi / period_;
            return k.c1 * std::sin(w * t) + k.c2 * std::cos(2.0 * w * t) + k.c0;
          } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
            const auto& kn = k.knots;
            if (t <= kn.front().first) return kn.front().second;
            for (std::size_t i = 1; i < kn.size(); ++i) {
              if (t <= kn[i].first) {
                const auto [t0, v0] = kn[i - 1];
                const auto [t1, v1] = kn[i];
                if (t == t1) return v1;
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
              }
            }
            return kn.back().second;
          } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
            for (std::size_t i = 0; i < k.breaks.size(); ++i) {
              if (t == k.breaks[i]) return std::max(k.levels[i], k.levels[i + 1]);
              if (t < k.breaks[i]) return k.levels[i];
            }
            return k.levels.back();
          } else {
            const auto& s = k.samples;
            const double n = static_cast<double>(s.size());
            const double u = (t + period_ / 2.0) / period_ * n;
            const double fl = std::floor(u);
            const auto i0 = static_cast<std::size_t>(fl) % s.size();
            const auto i1 = (i0 + 1) % s.size();
            return s[i0] + (s[i1] - s[i0]) * (u - fl);
          }
        },
        kind_);
  }

  double extreme(bool want_max) const {
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          std::vector<double> vals;
          if constexpr (std::is_same_v<T, Sinusoidal>) {
            // Dense sampling plus Newton polish is overkill for two harmonics.
            const int n = 20000;
            for (int i = 0; i < n; ++i) vals.push_back(eval(-period_ / 2.0 + period_ * i / n));
          } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
            for (const auto& kv : k.knots) vals.push_back(kv.second);
          } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
            vals = k.levels;
          } else {
            vals = k.samples;
          }
          return want_max ? *std::max_element(vals.begin(), vals.end())
                          : *std::min_element(vals.begin(), vals.end());
        },
        kind_);
  }

  void validate() const {
    if (!(period_ > 0.0)) throw ArgumentError("profile period must be positive");
    const double half = period_ / 2.0;
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, PiecewiseLinear>) {
            if (k.knots.size() < 2) throw ArgumentError("piecewise-linear profile needs two knots");
            if (std::fabs(k.knots.front().first + half) > 1e-12 || std::fabs(k.knots.back().first - half) > 1e-12) {
              throw ArgumentError("piecewise-linear knots must span one period");
            }
            if (k.knots.front().second != k.knots.back().second) {
              throw ArgumentError("piecewise-linear profile is not periodic");
            }
            for (std::size_t i = 1; i < k.knots.size(); ++i) {
              if (!(k.knots[i].first > k.knots[i - 1].first)) throw ArgumentError("knots must increase");
            }
          } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
            if (k.levels.size() != k.breaks.size() + 1) throw ArgumentError("step profile: levels != breaks + 1");
            if (k.levels.front() != k.levels.back()) throw ArgumentError("step profile is not periodic");
            for (std::size_t i = 0; i < k.breaks.size(); ++i) {
              if (!(k.breaks[i] > -half && k.breaks[i] < half)) throw ArgumentError("step break outside the cell");
              if (i > 0 && !(k.breaks[i] > k.breaks[i - 1])) throw ArgumentError("step breaks must increase");
            }
          } else if constexpr (std::is_same_v<T, Tabulated>) {
            if (k.samples.size() < 2) throw ArgumentError("tabulated profile needs two samples");
          }
        },
        kind_);
  }

  Kind kind_;
  double period_;
};

inline double profile_eval(const SurfaceProfile& p, double t) { return p(t); }

/// sin(t)/3 - cos(2t)/4 + 1.9 on period 2 pi.
inline SurfaceProfile gamma1() { return {Sinusoidal{1.0 / 3.0, -0.25, 1.9}, 2.0 * std::numbers::pi}; }

/// Lipschitz polygonal surface on period 2 pi.
inline SurfaceProfile gamma2() {
  const double pi = std::numbers::pi;
  PiecewiseLinear pl;
  pl.knots = {{-pi, 2.0},        {-0.6 * pi, 2.0}, {-0.4 * pi, 2.4}, {-0.2 * pi, 2.0}, {0.0, 2.0},
              {0.2 * pi, 2.6}, {0.6 * pi, 2.6},  {0.8 * pi, 2.0},  {pi, 2.0}};
  return {pl, 2.0 * pi};
}

/// 2.5 on [-pi/2, pi/2], 2 elsewhere, period 2 pi.
inline SurfaceProfile gamma3() {
  const double pi = std::numbers::pi;
  return {PiecewiseConstant{{-0.5 * pi, 0.5 * pi}, {2.0, 2.5, 2.0}}, 2.0 * pi};
}

inline SurfaceProfile flat(double height, double period = 2.0 * std::numbers::pi) {
  return {Sinusoidal{0.0, 0.0, height}, period};
}

enum class Tag { Surface, Top, Left, Right };

inline const char* tag_name(Tag t) {
  switch (t) {
    case Tag::Surface: return "surface";
    case Tag::Top: return "top";
    case Tag::Left: return "left";
    case Tag::Right: return "right";
  }
  return "?";
}

inline Tag parse_tag(const std::string& s) {
  if (s == "surface") return Tag::Surface;
  if (s == "top") return Tag::Top;
  if (s == "left") return Tag::Left;
  if (s == "right") return Tag::Right;
  throw IoError("unknown boundary tag '" + s + "'");
}

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  Tag tag = Tag::Surface;
};

// Quality floor enforced by build_unit_cell_mesh.
inline constexpr double kMinAngleFloorDeg = 12.0;
inline constexpr double kMaxEdgeRatio = 5.0;

struct MeshQuality {
  double min_angle_deg = 0.0;
  double edge_ratio = 0.0;  // max edge / min edge
  double min_area = 0.0;
};

/// Conforming P1 triangulation of one cell; immutable once built.
struct UnitCellMesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  std::vector<std::pair<int, int>> periodic_pairs;  // (left node, right node)
  double period = 0.0;
  double height = 0.0;  // H
  double h = 0.0;       // max edge length
  SurfaceProfile profile = flat(1.0);
  std::vector<std::string> warnings;

  std::size_t num_nodes() const { return nodes.size(); }

  /// Nodes touching an edge with the given tag.
  std::vector<char> node_mask(Tag tag) const {
    std::vector<char> mask(nodes.size(), 0);
    for (const auto& e : boundary) {
      if (e.tag == tag) mask[e.a] = mask[e.b] = 1;
    }
    return mask;
  }

  /// Top-boundary nodes sorted by x1.
  std::vector<int> top_nodes() const {
    const auto mask = node_mask(Tag::Top);
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
      if (mask[i]) out.push_back(i);
    }
    std::sort(out.begin(), out.end(), [&](int a, int b) { return nodes[a].x1 < nodes[b].x1; });
    return out;
  }

  double triangle_area(std::size_t t) const {
    const auto& [a, b, c] = triangles[t];
    const Point& p = nodes[a];
    const Point& q = nodes[b];
    const Point& r = nodes[c];
    return 0.5 * ((q.x1 - p.x1) * (r.x2 - p.x2) - (r.x1 - p.x1) * (q.x2 - p.x2));
  }

  MeshQuality quality() const {
    MeshQuality q{180.0, 0.0, 1e300};
    double emin = 1e300;
    double emax = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const auto& tri = triangles[t];
      std::array<double, 3> len{};
      for (int e = 0; e < 3; ++e) {
        const Point& p = nodes[tri[e]];
        const Point& r = nodes[tri[(e + 1) % 3]];
        len[e] = std::hypot(r.x1 - p.x1, r.x2 - p.x2);
        emin = std::min(emin, len[e]);
        emax = std::max(emax, len[e]);
      }
      for (int e = 0; e < 3; ++e) {
        const double a = len[e];
        const double b = len[(e + 1) % 3];
        const double c = len[(e + 2) % 3];
        const double cosang = std::clamp((b * b + c * c - a * a) / (2.0 * b * c), -1.0, 1.0);
        q.min_angle_deg = std::min(q.min_angle_deg, std::acos(cosang) * 180.0 / std::numbers::pi);
      }
      q.min_area = std::min(q.min_area, triangle_area(t));
    }
    q.edge_ratio = emax / emin;
    return q;
  }
};

namespace detail {

inline double max_edge_length(const UnitCellMesh& m) {
  double h = 0.0;
  for (const auto& tri : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Point& p = m.nodes[tri[e]];
      const Point& q = m.nodes[tri[(e + 1) % 3]];
      h = std::max(h, std::hypot(q.x1 - p.x1, q.x2 - p.x2));
    }
  }
  return h;
}

// Subdivide each [b_i, b_{i+1}] into pieces of length <= h.
inline std::vector<double> subdivide(const std::vector<double>& breaks, double h, std::vector<std::string>& warnings) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double len = breaks[i + 1] - breaks[i];
    const int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    if (len < h * (1.0 - 1e-9)) {
      std::ostringstream os;
      os << "feature of width " << len << " below target h " << h << "; refined locally";
      warnings.push_back(os.str());
    }
    for (int s = 0; s < n; ++s) out.push_back(breaks[i] + len * s / n);
  }
  out.push_back(breaks.back());
  return out;
}

inline void add_cell(std::vector<std::array<int, 3>>& tris, const std::vector<Point>& nodes, int sw, int se,
                     int ne, int nw) {
  // Split along the shorter diagonal; both choices are counterclockwise.
  const double d1 = std::hypot(nodes[ne].x1 - nodes[sw].x1, nodes[ne].x2 - nodes[sw].x2);
  const double d2 = std::hypot(nodes[nw].x1 - nodes[se].x1, nodes[nw].x2 - nodes[se].x2);
  if (d1 <= d2) {
    tris.push_back({sw, se, ne});
    tris.push_back({sw, ne, nw});
  } else {
    tris.push_back({sw, se, nw});
    tris.push_back({se, ne, nw});
  }
}

inline void pair_sides(UnitCellMesh& m) {
  std::vector<int> left;
  std::vector<int> right;
  const auto lmask = m.node_mask(Tag::Left);
  const auto rmask = m.node_mask(Tag::Right);
  for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
    if (lmask[i]) left.push_back(i);
    if (rmask[i]) right.push_back(i);
  }
  auto by_height = [&](int a, int b) { return m.nodes[a].x2 < m.nodes[b].x2; };
  std::sort(left.begin(), left.end(), by_height);
  std::sort(right.begin(), right.end(), by_height);
  if (left.size() != right.size()) throw DomainError("periodic sides carry different node counts");
  m.periodic_pairs.clear();
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (std::fabs(m.nodes[left[i]].x2 - m.nodes[right[i]].x2) > 1e-12) {
      throw DomainError("periodic side nodes do not match in x2");
    }
    m.periodic_pairs.emplace_back(left[i], right[i]);
  }
}

inline UnitCellMesh build_graph_mesh(const SurfaceProfile& p, double H, double h) {
  UnitCellMesh m;
  const double half = p.period() / 2.0;
  std::vector<double> breaks{-half};
  for (double b : p.breakpoints()) breaks.push_back(b);
  breaks.push_back(half);
  const auto xs = subdivide(breaks, h, m.warnings);
  const int ncol = static_cast<int>(xs.size()) - 1;
  const int nrow = std::max(1, static_cast<int>(std::ceil((H - p.min_height()) / h - 1e-9)));
  const double base_left = p(-half);
  for (int i = 0; i <= ncol; ++i) {
    // Reuse the left value on the right edge so paired nodes match bitwise.
    const double x = (i == ncol) ? half : xs[i];
    const double base = (i == 0 || i == ncol) ? base_left : p(x);
    for (int r = 0; r <= nrow; ++r) {
      const double y = (r == nrow) ? H : base + (H - base) * r / nrow;
      m.nodes.push_back({x, y});
    }
  }
  auto id = [nrow](int i, int r) { return i * (nrow + 1) + r; };
  for (int i = 0; i < ncol; ++i) {
    for (int r = 0; r < nrow; ++r) {
      add_cell(m.triangles, m.nodes, id(i, r), id(i + 1, r), id(i + 1, r + 1), id(i, r + 1));
    }
    m.boundary.push_back({id(i, 0), id(i + 1, 0), Tag::Surface});
    m.boundary.push_back({id(i, nrow), id(i + 1, nrow), Tag::Top});
  }
  for (int r = 0; r < nrow; ++r) {
    m.boundary.push_back({id(0, r), id(0, r + 1), Tag::Left});
    m.boundary.push_back({id(ncol, r), id(ncol, r + 1), Tag::Right});
  }
  return m;
}

inline UnitCellMesh build_step_mesh(const SurfaceProfile& p, double H, double h) {
  UnitCellMesh m;
  const auto& pc = std::get<PiecewiseConstant>(p.kind());
  const double half = p.period() / 2.0;
  std::vector<double> xb{-half};
  for (double b : pc.breaks) xb.push_back(b);
  xb.push_back(half);
  std::vector<double> yb = pc.levels;
  yb.push_back(H);
  std::sort(yb.begin(), yb.end());
  yb.erase(std::unique(yb.begin(), yb.end()), yb.end());
  const auto xs = subdivide(xb, h, m.warnings);
  const auto ys = subdivide(yb, h, m.warnings);
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;

  std::vector<char> keep(static_cast<std::size_t>(nx) * ny, 0);
  for (int i = 0; i < nx; ++i) {
    const double level = p(0.5 * (xs[i] + xs[i + 1]));
    for (int r = 0; r < ny; ++r) keep[i * ny + r] = ys[r] >= level - 1e-12 ? 1 : 0;
  }
  auto kept = [&](int i, int r) { return i >= 0 && i < nx && r >= 0 && r < ny && keep[i * ny + r]; };

  std::vector<int> index(static_cast<std::size_t>(nx + 1) * (ny + 1), -1);
  auto node = [&](int i, int r) {
    int& slot = index[i * (ny + 1) + r];
    if (slot < 0) {
      slot = static_cast<int>(m.nodes.size());
      m.nodes.push_back({xs[i], ys[r]});
    }
    return slot;
  };
  for (int i = 0; i <= nx; ++i) {
    for (int r = 0; r <= ny; ++r) {
      if (kept(i - 1, r - 1) || kept(i, r - 1) || kept(i - 1, r) || kept(i, r)) node(i, r);
    }
  }
  for (int i = 0; i < nx; ++i) {
    for (int r = 0; r < ny; ++r) {
      if (!kept(i, r)) continue;
      add_cell(m.triangles, m.nodes, node(i, r), node(i + 1, r), node(i + 1, r + 1), node(i, r + 1));
      // Horizontal edges: bottom of a kept cell with nothing kept below.
      if (!kept(i, r - 1)) m.boundary.push_back({node(i, r), node(i + 1, r), Tag::Surface});
      if (r == ny - 1) m.boundary.push_back({node(i, r + 1), node(i + 1, r + 1), Tag::Top});
      // Vertical edges.
      if (i == 0) {
        m.boundary.push_back({node(0, r), node(0, r + 1), Tag::Left});
      } else if (!kept(i - 1, r)) {
        m.boundary.push_back({node(i, r), node(i, r + 1), Tag::Surface});
      }
      if (i == nx - 1) {
        m.boundary.push_back({node(nx, r), node(nx, r + 1), Tag::Right});
      } else if (!kept(i + 1, r)) {
        m.boundary.push_back({node(i + 1, r), node(i + 1, r + 1), Tag::Surface});
      }
    }
  }
  return m;
}

}  // namespace detail

/// Mapped structured triangulation of the cell between the profile and
/// x2 = H. Kinks and jumps of the profile become mesh vertices; step
/// profiles get vertical walls tagged as surface.
inline UnitCellMesh build_unit_cell_mesh(const SurfaceProfile& p, double H, double h) {
  if (!(h > 0.0)) throw ArgumentError("mesh width must be positive");
  if (!(p.max_height() < H)) throw DomainError("truncation height must exceed the profile");
  UnitCellMesh m = p.is_step() ? detail::build_step_mesh(p, H, h) : detail::build_graph_mesh(p, H, h);
  m.period = p.period();
  m.height = H;
  m.profile = p;
  m.h = detail::max_edge_length(m);
  detail::pair_sides(m);
  const auto q = m.quality();
  if (q.min_angle_deg < kMinAngleFloorDeg || q.edge_ratio > kMaxEdgeRatio) {
    throw DomainError("mesh quality below the floor: min angle " + std::to_string(q.min_angle_deg) +
                      " deg, edge ratio " + std::to_string(q.edge_ratio));
  }
  return m;
}

/// Red refinement: every triangle into four similar children. New surface
/// vertices on curved profiles are moved vertically onto the profile.
inline UnitCellMesh refine(const UnitCellMesh& in) {
  UnitCellMesh out;
  out.nodes = in.nodes;
  out.period = in.period;
  out.height = in.height;
  out.profile = in.profile;
  out.warnings = in.warnings;
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    const Point& p = in.nodes[a];
    const Point& q = in.nodes[b];
    const int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back({0.5 * (p.x1 + q.x1), 0.5 * (p.x2 + q.x2)});
    mid.emplace(key, id);
    return id;
  };
  for (const auto& [a, b, c] : in.triangles) {
    const int ab = midpoint(a, b);
    const int bc = midpoint(b, c);
    const int ca = midpoint(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  for (const auto& e : in.boundary) {
    const int m = midpoint(e.a, e.b);
    out.boundary.push_back({e.a, m, e.tag});
    out.boundary.push_back({m, e.b, e.tag});
    if (e.tag == Tag::Surface && in.profile.is_curved()) {
      Point& p = out.nodes[m];
      p.x2 = (std::fabs(p.x1) == in.period / 2.0) ? in.profile(-in.period / 2.0) : in.profile(p.x1);
    }
  }
  out.h = detail::max_edge_length(out);
  detail::pair_sides(out);
  return out;
}

// ---------------------------------------------------------------------------
// Plain-text mesh format:
//
//   floquet-mesh 1
//   period <Lambda>
//   height <H>
//   nodes <n>
//   <x1> <x2>                     (n lines)
//   triangles <m>
//   <a> <b> <c>                   (m lines, counterclockwise, 0-based)
//   boundary <e>
//   <a> <b> <surface|top|left|right>
//   pairs <p>
//   <left> <right>
//
// The profile is not serialised; imported meshes carry a flat placeholder
// profile at the minimum surface-node height.

inline void write_mesh(std::ostream& os, const UnitCellMesh& m) {
  os << std::setprecision(17);
  os << "floquet-mesh 1\n";
  os << "period " << m.period << "\n";
  os << "height " << m.height << "\n";
  os << "nodes " << m.nodes.size() << "\n";
  for (const auto& p : m.nodes) os << p.x1 << ' ' << p.x2 << '\n';
  os << "triangles " << m.triangles.size() << "\n";
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary " << m.boundary.size() << "\n";
  for (const auto& e : m.boundary) os << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
  os << "pairs " << m.periodic_pairs.size() << "\n";
  for (const auto& [l, r] : m.periodic_pairs) os << l << ' ' << r << '\n';
  if (!os) throw IoError("failed writing mesh");
}

inline UnitCellMesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw IoError("mesh file: expected '" + word + "'");
  };
  UnitCellMesh m;
  expect("floquet-mesh");
  int version = 0;
  is >> version;
  if (version != 1) throw IoError("mesh file: unsupported version");
  expect("period");
  is >> m.period;
  expect("height");
  is >> m.height;
  std::size_t n = 0;
  expect("nodes");
  is >> n;
  m.nodes.resize(n);
  for (auto& p : m.nodes) is >> p.x1 >> p.x2;
  expect("triangles");
  is >> n;
  m.triangles.resize(n);
  for (auto& t : m.triangles) is >> t[0] >> t[1] >> t[2];
  expect("boundary");
  is >> n;
  m.boundary.resize(n);
  for (auto& e : m.boundary) {
    std::string tag;
    is >> e.a >> e.b >> tag;
    e.tag = parse_tag(tag);
  }
  expect("pairs");
  is >> n;
  m.periodic_pairs.resize(n);
  for (auto& pr : m.periodic_pairs) is >> pr.first >> pr.second;
  if (!is) throw IoError("mesh file truncated or malformed");
  double base = m.height;
  const auto smask = m.node_mask(Tag::Surface);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (smask[i]) base = std::min(base, m.nodes[i].x2);
  }
  m.profile = flat(base, m.period);
  m.h = detail::max_edge_length(m);
  return m;
}

inline void save_mesh(const std::string& path, const UnitCellMesh& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_mesh(os, m);
}

inline UnitCellMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_mesh(is);
}

}  // namespace floquet::geometry
