#pragma once

// Quasiperiodic P1 finite elements on one periodicity cell with a truncated
// periodic Dirichlet-to-Neumann condition on the top boundary x2 = H.
//
// Unknowns: every node that is neither on the surface (Dirichlet) nor on the
// right side. A right-side node carries e^{i Lambda alpha} times the value
// of its left partner. The discrete sesquilinear form is
//
//   a(w, v) = int grad w . conj(grad v) - k^2 w conj(v)
//             - sum_{|j|<=M} i beta_j w^(j) conj(v^(j)),
//
// where v^(j) are the orthonormal Fourier coefficients of the top trace,
// v^(j) = Lambda^{-1/2} int v(x1) e^{-i xi_j x1} dx1. In matrix form
// A = K - k^2 M - B^H diag(i beta) B, with A(p, q) = a(psi_q, psi_p).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "floquet/errors.hpp"
#include "floquet/fields.hpp"
#include "floquet/geometry.hpp"

namespace floquet::qpfem {

using geometry::Tag;
using geometry::UnitCellMesh;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

enum class Mode { A, B };

inline const char* mode_name(Mode m) { return m == Mode::A ? "A" : "B"; }

/// Rayleigh modes |j| <= M of the truncated periodic DtN map at one alpha.
struct DtNOperator {
  double alpha = 0.0;
  int order = 0;  // M
  double period = 0.0;
  std::vector<RayleighIndex> modes;  // modes[j + M]

  const RayleighIndex& mode(int j) const { return modes[j + order]; }

  /// Largest |j| of a propagating order.
  static int propagating_extent(const WaveParams& p, double alpha) {
    const double dual = p.dual_period();
    const int lo = static_cast<int>(std::ceil((-p.k() - alpha) / dual - 1e-12));
    const int hi = static_cast<int>(std::floor((p.k() - alpha) / dual + 1e-12));
    return std::max(std::abs(lo), std::abs(hi));
  }

  static DtNOperator make(const WaveParams& p, double alpha, int order) {
    if (order < propagating_extent(p, alpha) + 10) {
      throw ConfigError("DtN truncation M=" + std::to_string(order) +
                        " must exceed the propagating range by at least 10 evanescent orders");
    }
    DtNOperator d;
    d.alpha = alpha;
    d.order = order;
    d.period = p.period();
    d.modes.reserve(2 * order + 1);
    for (int j = -order; j <= order; ++j) d.modes.push_back(beta(p, alpha, j));
    return d;
  }
};

namespace detail {

// int_0^1 (1-u) e^{-isu} du and int_0^1 u e^{-isu} du.
inline std::pair<cplx, cplx> hat_moments(double s) {
  const cplx mis(0.0, -s);
  if (std::fabs(s) < 1.0) {
    cplx i0(0.0);
    cplx i1(0.0);
    cplx pw(1.0);  // (-is)^n / n!
    for (int n = 0; n < 30; ++n) {
      i0 += pw / static_cast<double>((n + 1) * (n + 2));
      i1 += pw / static_cast<double>(n + 2);
      pw *= mis / static_cast<double>(n + 1);
    }
    return {i0, i1};
  }
  const cplx e = std::exp(mis);
  const cplx i(0.0, 1.0);
  const cplx whole = (1.0 - e) / (i * s);
  const cplx i1 = e * (i / s + 1.0 / (s * s)) - 1.0 / (s * s);
  return {whole - i1, i1};
}

// Integrals of the two hat functions of segment [x0, x1] against e^{-i xi x}.
inline std::pair<cplx, cplx> edge_weights(double x0, double x1, double xi) {
  const double len = x1 - x0;
  const auto [m0, m1] = hat_moments(xi * len);
  const cplx carrier = std::exp(cplx(0.0, -xi * x0)) * len;
  return {carrier * m0, carrier * m1};
}

}  // namespace detail

/// Orthonormal Fourier coefficients c(-M..M) of the P1 trace with nodal
/// values `values` at mesh.top_nodes() (sorted by x1), exact per edge.
inline std::vector<cplx> trace_fourier_coeffs(const UnitCellMesh& mesh, std::span<const cplx> values, double alpha,
                                              int order) {
  const auto top = mesh.top_nodes();
  if (values.size() != top.size()) throw ArgumentError("trace values do not match top nodes");
  const double dual = 2.0 * std::numbers::pi / mesh.period;
  const double norm = 1.0 / std::sqrt(mesh.period);
  std::vector<cplx> c(2 * order + 1, cplx(0.0));
  for (int j = -order; j <= order; ++j) {
    const double xi = dual * j + alpha;
    cplx acc(0.0);
    for (std::size_t e = 0; e + 1 < top.size(); ++e) {
      const auto [w0, w1] = detail::edge_weights(mesh.nodes[top[e]].x1, mesh.nodes[top[e + 1]].x1, xi);
      acc += values[e] * w0 + values[e + 1] * w1;
    }
    c[j + order] = norm * acc;
  }
  return c;
}

/// Half-space point source strictly below the surface (Mode B data).
struct PointSourceBelow {
  SourcePoint source;
};

/// Downward Herglotz wave (Mode A).
struct HerglotzIncident {
  HerglotzKernel kernel;
};

/// Single downward Rayleigh order with orthonormal amplitude referenced at
/// x2 = H (Mode A).
struct PlaneWaveDown {
  int order = 0;
  cplx amplitude = 1.0;
};

struct IncidentSpec {
  std::variant<PointSourceBelow, HerglotzIncident, PlaneWaveDown> kind;

  Mode mode() const { return std::holds_alternative<PointSourceBelow>(kind) ? Mode::B : Mode::A; }

  void validate(const geometry::SurfaceProfile& profile) const {
    if (const auto* ps = std::get_if<PointSourceBelow>(&kind)) {
      if (!(ps->source.y().x2 < profile.min_height())) {
        throw ConfigError("point source must lie strictly below the surface");
      }
    } else if (const auto* hg = std::get_if<HerglotzIncident>(&kind)) {
      hg->kernel.validate();
    }
  }

  /// Orthonormal downward coefficients at x2 = H:
  /// u_inc(alpha, x) = Lambda^{-1/2} sum_j d_j e^{i xi_j x1 - i beta_j (x2 - H)}.
  std::map<int, cplx> downward(const WaveParams& p, double alpha, double H) const {
    std::map<int, cplx> out;
    if (const auto* hg = std::get_if<HerglotzIncident>(&kind)) {
      for (const auto& [j, d] : herglotz_bloch_modes(hg->kernel, p, alpha)) {
        const cplx b = beta(p, alpha, j).beta;
        out[j] = std::sqrt(p.period()) * d * std::exp(cplx(0.0, -1.0) * b * H);
      }
    } else if (const auto* pw = std::get_if<PlaneWaveDown>(&kind)) {
      out[pw->order] = pw->amplitude;
    }
    return out;
  }

  /// Bloch transform of the incident field at x (Mode B Dirichlet data).
  cplx bloch_trace(const WaveParams& p, double alpha, const Point& x) const {
    const auto& ps = std::get<PointSourceBelow>(kind);
    return bloch_incident_point_source(p, alpha, x, ps.source);
  }
};

/// Assembled per-alpha problem.
struct QPSystem {
  const UnitCellMesh* mesh = nullptr;
  WaveParams params{1.0, 1.0};
  double alpha = 0.0;
  Mode mode = Mode::B;
  DtNOperator dtn;
  std::vector<int> dof_of_node;       // -1 on Dirichlet nodes
  std::vector<cplx> node_factor;      // node value = factor * dof value
  std::vector<cplx> dirichlet_values; // prescribed node values (zero in Mode A)
  int num_dofs = 0;
  SparseMatrix interior;              // K - k^2 M on the dofs
  Eigen::MatrixXcd trace_map;         // B: (2M+1) x top_dofs.size()
  std::vector<int> top_dofs;          // dof index of each column of B
  Eigen::VectorXcd load;
  std::map<int, cplx> incident_down;  // Mode A downward coefficients at H

  /// Fourier coefficients v^(j) of the top trace of a dof vector.
  Eigen::VectorXcd trace_coefficients(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd top(static_cast<Eigen::Index>(top_dofs.size()));
    for (std::size_t c = 0; c < top_dofs.size(); ++c) top[c] = v[top_dofs[c]];
    return trace_map * top;
  }

  Eigen::VectorXcd dtn_symbol() const {
    Eigen::VectorXcd d(static_cast<Eigen::Index>(dtn.modes.size()));
    for (std::size_t j = 0; j < dtn.modes.size(); ++j) d[j] = cplx(0.0, 1.0) * dtn.modes[j].beta;
    return d;
  }

  /// A v, applying the DtN block in factored form.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd out = interior * v;
    const Eigen::VectorXcd coeffs = dtn_symbol().cwiseProduct(trace_coefficients(v));
    const Eigen::VectorXcd back = trace_map.adjoint() * coeffs;
    for (std::size_t c = 0; c < top_dofs.size(); ++c) out[top_dofs[c]] -= back[c];
    return out;
  }

  /// a(w, v) = v^H A w.
  cplx form(const Eigen::VectorXcd& w, const Eigen::VectorXcd& v) const { return v.dot(apply(w)); }

  /// Sparse matrix including the (dense) top-top DtN block, for factorisation.
  SparseMatrix assembled_matrix() const {
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(interior.nonZeros() + top_dofs.size() * top_dofs.size());
    for (int col = 0; col < interior.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(interior, col); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
    }
    const Eigen::VectorXcd d = dtn_symbol();
    const Eigen::MatrixXcd block = trace_map.adjoint() * d.asDiagonal() * trace_map;
    for (std::size_t p = 0; p < top_dofs.size(); ++p) {
      for (std::size_t q = 0; q < top_dofs.size(); ++q) {
        trips.emplace_back(top_dofs[p], top_dofs[q], -block(p, q));
      }
    }
    SparseMatrix a(num_dofs, num_dofs);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
  }
};

/// Assemble the alpha-quasiperiodic system. Mode A takes the incident
/// downward Rayleigh data at H and imposes zero surface values; Mode B takes
/// the Bloch-transformed point source as surface Dirichlet data with no
/// top-boundary functional.
inline QPSystem assemble(const UnitCellMesh& mesh, const WaveParams& params, double alpha, int order, Mode mode,
                         const IncidentSpec& incident) {
  if (incident.mode() != mode) throw ConfigError("incident field does not match the requested mode");
  incident.validate(mesh.profile);
  QPSystem sys;
  sys.mesh = &mesh;
  sys.params = params;
  sys.alpha = alpha;
  sys.mode = mode;
  sys.dtn = DtNOperator::make(params, alpha, order);

  const std::size_t nn = mesh.num_nodes();
  const auto surface = mesh.node_mask(Tag::Surface);
  const cplx quasi = std::exp(cplx(0.0, params.period() * alpha));
  sys.dof_of_node.assign(nn, -2);
  sys.node_factor.assign(nn, cplx(1.0));
  sys.dirichlet_values.assign(nn, cplx(0.0));
  std::vector<int> partner(nn, -1);
  for (const auto& [l, r] : mesh.periodic_pairs) partner[r] = l;
  int next = 0;
  for (std::size_t n = 0; n < nn; ++n) {
    if (surface[n]) {
      sys.dof_of_node[n] = -1;
    } else if (partner[n] < 0) {
      sys.dof_of_node[n] = next++;
    }
  }
  for (std::size_t n = 0; n < nn; ++n) {
    if (partner[n] >= 0 && !surface[n]) {
      sys.dof_of_node[n] = sys.dof_of_node[partner[n]];
      sys.node_factor[n] = quasi;
    }
  }
  sys.num_dofs = next;

  if (mode == Mode::B) {
    for (std::size_t n = 0; n < nn; ++n) {
      if (surface[n]) sys.dirichlet_values[n] = incident.bloch_trace(params, alpha, mesh.nodes[n]);
    }
  }

  const double k2 = params.k() * params.k();
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(mesh.triangles.size() * 9);
  sys.load = Eigen::VectorXcd::Zero(sys.num_dofs);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.triangle_area(t);
    std::array<double, 3> gx{};
    std::array<double, 3> gy{};
    for (int i = 0; i < 3; ++i) {
      const Point& p1 = mesh.nodes[tri[(i + 1) % 3]];
      const Point& p2 = mesh.nodes[tri[(i + 2) % 3]];
      gx[i] = (p1.x2 - p2.x2) / (2.0 * area);
      gy[i] = (p2.x1 - p1.x1) / (2.0 * area);
    }
    for (int a = 0; a < 3; ++a) {
      const int na = tri[a];
      const int row = sys.dof_of_node[na];
      if (row < 0) continue;
      const cplx ca = std::conj(sys.node_factor[na]);
      for (int b = 0; b < 3; ++b) {
        const int nb = tri[b];
        const double stiff = area * (gx[a] * gx[b] + gy[a] * gy[b]);
        const double mass = area / 12.0 * (a == b ? 2.0 : 1.0);
        const double local = stiff - k2 * mass;
        const int col = sys.dof_of_node[nb];
        if (col >= 0) {
          trips.emplace_back(row, col, ca * sys.node_factor[nb] * local);
        } else if (mode == Mode::B) {
          sys.load[row] -= ca * local * sys.dirichlet_values[nb];
        }
      }
    }
  }
  sys.interior.resize(sys.num_dofs, sys.num_dofs);
  sys.interior.setFromTriplets(trips.begin(), trips.end());
  sys.interior.makeCompressed();

  // Trace map B over the distinct top dofs.
  const auto top = mesh.top_nodes();
  std::map<int, int> column_of_dof;
  for (int n : top) {
    const int d = sys.dof_of_node[n];
    if (d < 0) throw DomainError("surface node on the top boundary");
    if (!column_of_dof.count(d)) {
      column_of_dof[d] = static_cast<int>(sys.top_dofs.size());
      sys.top_dofs.push_back(d);
    }
  }
  const int modes = 2 * order + 1;
  sys.trace_map = Eigen::MatrixXcd::Zero(modes, static_cast<Eigen::Index>(sys.top_dofs.size()));
  const double norm = 1.0 / std::sqrt(mesh.period);
  for (int j = -order; j <= order; ++j) {
    const double xi = sys.dtn.mode(j).xi;
    for (std::size_t e = 0; e + 1 < top.size(); ++e) {
      const int n0 = top[e];
      const int n1 = top[e + 1];
      const auto [w0, w1] = detail::edge_weights(mesh.nodes[n0].x1, mesh.nodes[n1].x1, xi);
      sys.trace_map(j + order, column_of_dof[sys.dof_of_node[n0]]) += norm * sys.node_factor[n0] * w0;
      sys.trace_map(j + order, column_of_dof[sys.dof_of_node[n1]]) += norm * sys.node_factor[n1] * w1;
    }
  }

  if (mode == Mode::A) {
    sys.incident_down = incident.downward(params, alpha, mesh.height);
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(modes);
    for (const auto& [j, d] : sys.incident_down) {
      if (std::abs(j) > order) throw ConfigError("incident order outside the DtN truncation");
      f[j + order] = cplx(0.0, -2.0) * sys.dtn.mode(j).beta * d;
    }
    const Eigen::VectorXcd b = sys.trace_map.adjoint() * f;
    for (std::size_t c = 0; c < sys.top_dofs.size(); ++c) sys.load[sys.top_dofs[c]] += b[c];
  }
  return sys;
}

/// One quasiperiodic solution: nodal values on every mesh node plus the
/// Rayleigh coefficients w^(j), |j| <= M, of its top trace.
struct QPSolution {
  double alpha = 0.0;
  Mode mode = Mode::B;
  double k = 0.0;
  double period = 0.0;
  double height = 0.0;
  int order = 0;
  std::vector<cplx> values;
  std::vector<cplx> rayleigh;         // index j + M
  std::map<int, cplx> incident_down;  // Mode A only
  double residual = 0.0;

  cplx coefficient(int j) const { return rayleigh[j + order]; }
};

inline constexpr double kResidualTolerance = 1e-10;

/// Direct sparse LU with iterative refinement on the assembled matrix.
inline QPSolution solve_qp(const QPSystem& sys, double tolerance = kResidualTolerance) {
  const UnitCellMesh& mesh = *sys.mesh;
  QPSolution sol;
  sol.alpha = sys.alpha;
  sol.mode = sys.mode;
  sol.k = sys.params.k();
  sol.period = sys.params.period();
  sol.height = mesh.height;
  sol.order = sys.dtn.order;
  sol.incident_down = sys.incident_down;

  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(sys.num_dofs);
  const double bnorm = sys.load.norm();
  if (bnorm > 0.0) {
    const SparseMatrix a = sys.assembled_matrix();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    auto fail = [&](const std::string& what) {
      std::ostringstream os;
      os << what << " at alpha=" << sys.alpha << ", k=" << sys.params.k();
      return os.str();
    };
    if (lu.info() != Eigen::Success) throw SingularSystemError(fail("sparse LU factorisation failed"));
    x = lu.solve(sys.load);
    Eigen::VectorXcd r = sys.load - a * x;
    for (int it = 0; it < 4 && r.norm() > 0.1 * tolerance * bnorm; ++it) {
      x += lu.solve(r);
      r = sys.load - a * x;
    }
    sol.residual = r.norm() / bnorm;
    if (!std::isfinite(sol.residual)) throw SingularSystemError(fail("non-finite solution"));
    if (sol.residual > tolerance) {
      throw SolverQualityError(fail("residual " + std::to_string(sol.residual) + " above tolerance"));
    }
  }

  sol.values.resize(mesh.num_nodes());
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    const int d = sys.dof_of_node[n];
    sol.values[n] = d >= 0 ? sys.node_factor[n] * x[d] : sys.dirichlet_values[n];
  }
  const Eigen::VectorXcd c = sys.trace_coefficients(x);
  sol.rayleigh.assign(c.data(), c.data() + c.size());
  return sol;
}

/// Rayleigh extension above H; incident (Mode A) orders travel downward,
/// everything else upward:
/// Lambda^{-1/2} sum_j e^{i xi_j x1} [(w_j - d_j) e^{i beta_j (x2-H)} + d_j e^{-i beta_j (x2-H)}].
inline cplx extend_above(const QPSolution& sol, const Point& x) {
  if (x.x2 < sol.height) throw DomainError("extend_above requires x2 >= H");
  const WaveParams p(sol.k, sol.period);
  const double dz = x.x2 - sol.height;
  const cplx i(0.0, 1.0);
  cplx sum(0.0);
  for (int j = -sol.order; j <= sol.order; ++j) {
    const RayleighIndex r = beta(p, sol.alpha, j);
    cplx up = sol.coefficient(j);
    cplx down(0.0);
    if (auto it = sol.incident_down.find(j); it != sol.incident_down.end()) {
      up -= it->second;
      down = it->second * std::exp(-i * r.beta * dz);
    }
    sum += std::exp(i * r.xi * x.x1) * (up * std::exp(i * r.beta * dz) + down);
  }
  return sum / std::sqrt(sol.period);
}

/// Relative flux defect |sum_prop beta |R_j|^2 - sum_prop beta |d_j|^2| /
/// sum_prop beta |d_j|^2 with outgoing R_j = w_j - d_j. Empty when no
/// propagating incident energy is present.
inline std::optional<double> energy_balance(const QPSolution& sol, const std::map<int, cplx>& incident) {
  const WaveParams p(sol.k, sol.period);
  double in = 0.0;
  double out = 0.0;
  for (int j = -sol.order; j <= sol.order; ++j) {
    const RayleighIndex r = beta(p, sol.alpha, j);
    if (!r.propagating()) continue;
    cplx d(0.0);
    if (auto it = incident.find(j); it != incident.end()) d = it->second;
    const cplx refl = sol.coefficient(j) - d;
    in += r.beta.real() * std::norm(d);
    out += r.beta.real() * std::norm(refl);
  }
  if (!(in > 0.0)) return std::nullopt;
  return std::fabs(out - in) / in;
}

inline std::optional<double> energy_balance(const QPSolution& sol) { return energy_balance(sol, sol.incident_down); }

// ---------------------------------------------------------------------------
// Solution dump (plain text, 17 significant digits so values round-trip):
//
//   floquet-qpsolution 1
//   alpha <a>  mode <A|B>  k <k>  period <L>  height <H>  order <M>
//   values <n>
//   <re> <im>                     (one line per mesh node)
//   rayleigh <2M+1>
//   <j> <re> <im>
//   incident <count>
//   <j> <re> <im>

inline void write_solution(std::ostream& os, const QPSolution& s) {
  os << std::setprecision(17);
  os << "floquet-qpsolution 1\n";
  os << "alpha " << s.alpha << " mode " << mode_name(s.mode) << " k " << s.k << " period " << s.period << " height "
     << s.height << " order " << s.order << "\n";
  os << "values " << s.values.size() << "\n";
  for (const auto& v : s.values) os << v.real() << ' ' << v.imag() << '\n';
  os << "rayleigh " << s.rayleigh.size() << "\n";
  for (int j = -s.order; j <= s.order; ++j) {
    os << j << ' ' << s.coefficient(j).real() << ' ' << s.coefficient(j).imag() << '\n';
  }
  os << "incident " << s.incident_down.size() << "\n";
  for (const auto& [j, d] : s.incident_down) os << j << ' ' << d.real() << ' ' << d.imag() << '\n';
  if (!os) throw IoError("failed writing solution");
}

inline QPSolution read_solution(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw IoError("solution file: expected '" + word + "'");
  };
  QPSolution s;
  expect("floquet-qpsolution");
  int version = 0;
  is >> version;
  if (version != 1) throw IoError("solution file: unsupported version");
  std::string mode;
  expect("alpha");
  is >> s.alpha;
  expect("mode");
  is >> mode;
  s.mode = mode == "A" ? Mode::A : Mode::B;
  expect("k");
  is >> s.k;
  expect("period");
  is >> s.period;
  expect("height");
  is >> s.height;
  expect("order");
  is >> s.order;
  std::size_t n = 0;
  expect("values");
  is >> n;
  s.values.resize(n);
  for (auto& v : s.values) {
    double re = 0.0;
    double im = 0.0;
    is >> re >> im;
    v = {re, im};
  }
  expect("rayleigh");
  is >> n;
  s.rayleigh.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int j = 0;
    double re = 0.0;
    double im = 0.0;
    is >> j >> re >> im;
    s.rayleigh[j + s.order] = {re, im};
  }
  expect("incident");
  is >> n;
  for (std::size_t i = 0; i < n; ++i) {
    int j = 0;
    double re = 0.0;
    double im = 0.0;
    is >> j >> re >> im;
    s.incident_down[j] = {re, im};
  }
  if (!is) throw IoError("solution file truncated or malformed");
  return s;
}

}  // namespace floquet::qpfem
