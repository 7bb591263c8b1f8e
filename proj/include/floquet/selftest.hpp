#pragma once

// Quick invariant checks, run by `floquet selftest`. Each check prints one
// line; the whole suite takes a few seconds.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "floquet/bloch.hpp"
#include "floquet/fields.hpp"
#include "floquet/geometry.hpp"
#include "floquet/postproc.hpp"
#include "floquet/qpfem.hpp"

namespace floquet::selftest {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::vector<Check> run_checks() {
  std::vector<Check> out;
  const double two_pi = 2.0 * std::numbers::pi;
  const WaveParams p(1.0, two_pi);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;

  auto check = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      out.push_back({name, ok, detail});
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  auto sci = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };

  check("bloch round trip", [&] {
    bloch::CellSequence seq;
    for (int j = -3; j <= 3; ++j) {
      std::vector<cplx> v(5);
      for (auto& x : v) x = {gauss(rng), gauss(rng)};
      seq.values[j] = v;
    }
    const auto rt = bloch::roundtrip_check(seq, two_pi, 16);
    return std::pair{rt.deviation <= 1e-12, "deviation " + sci(rt.deviation)};
  });

  check("incident field vs image difference", [&] {
    const double alpha = 0.137;
    const SourcePoint src(-1.0, 0.4);
    const Point x{0.7, 2.2};
    const cplx a = bloch_incident_point_source(p, alpha, x, src);
    const cplx b = p.bloch_scale() * (qp_green_spectral(p, alpha, x, src.y()) - qp_green_spectral(p, alpha, x, src.mirror()));
    const double rel = std::abs(a - b) / std::abs(b);
    return std::pair{rel <= 1e-10, "relative difference " + sci(rel)};
  });

  const auto mesh = geometry::build_unit_cell_mesh(geometry::gamma1(), 3.0, 0.3);

  check("mesh pairing and quality", [&] {
    const auto q = mesh.quality();
    const bool ok = !mesh.periodic_pairs.empty() && q.min_angle_deg > 15.0;
    return std::pair{ok, std::to_string(mesh.num_nodes()) + " nodes, min angle " + sci(q.min_angle_deg)};
  });

  check("discrete Garding identity", [&] {
    const qpfem::IncidentSpec inc{qpfem::PointSourceBelow{SourcePoint(-1.0, 0.4)}};
    const auto sys = qpfem::assemble(mesh, p, 0.31, 20, qpfem::Mode::B, inc);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXcd v(sys.num_dofs);
      for (auto& x : v) x = {gauss(rng), gauss(rng)};
      const double im = sys.form(v, v).imag();
      const Eigen::VectorXcd c = sys.trace_coefficients(v);
      double flux = 0.0;
      for (int j = -sys.dtn.order; j <= sys.dtn.order; ++j) {
        const auto& r = sys.dtn.mode(j);
        if (r.propagating()) flux += r.beta.real() * std::norm(c[j + sys.dtn.order]);
      }
      worst = std::max(worst, std::fabs(im + flux) / flux);
    }
    return std::pair{worst <= 1e-10, "relative mismatch " + sci(worst)};
  });

  check("flat plane exact solution", [&] {
    const double c = 2.0;
    const double H = 3.0;
    const auto flat = geometry::build_unit_cell_mesh(geometry::flat(c), H, 0.16);
    const double alpha = 0.2;
    const qpfem::IncidentSpec inc{qpfem::PlaneWaveDown{0, 1.0}};
    const auto sol = qpfem::solve_qp(qpfem::assemble(flat, p, alpha, 20, qpfem::Mode::A, inc));
    const auto r = beta(p, alpha, 0);
    const cplx i(0.0, 1.0);
    const auto exact = [&](const Point& x) {
      return std::exp(i * r.xi * x.x1) / std::sqrt(two_pi) *
             (std::exp(-i * r.beta * (x.x2 - H)) - std::exp(i * r.beta * (x.x2 + H - 2.0 * c)));
    };
    const auto err = postproc::relative_error(flat, sol.values, exact);
    const double defect = qpfem::energy_balance(sol).value_or(1.0);
    return std::pair{err.l2 < 2e-3 && defect < 1e-10, "L2 " + sci(err.l2) + ", energy defect " + sci(defect)};
  });

  return out;
}

inline bool run(std::ostream& os) {
  bool all = true;
  for (const auto& c : run_checks()) {
    os << (c.pass ? "ok   " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    all = all && c.pass;
  }
  return all;
}

}  // namespace floquet::selftest
