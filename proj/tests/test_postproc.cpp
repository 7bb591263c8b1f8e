#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "floquet/errors.hpp"
#include "floquet/geometry.hpp"
#include "floquet/postproc.hpp"
#include "floquet/qpfem.hpp"

using namespace floquet;
using namespace floquet::postproc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kPi = std::numbers::pi;

std::vector<cplx> nodal(const geometry::UnitCellMesh& m, const std::function<cplx(const Point&)>& f) {
  return interpolate(m, f);
}

}  // namespace

TEST_CASE("norms on simple fields", "[postproc]") {
  const auto flat = geometry::build_unit_cell_mesh(geometry::flat(2.0), 3.0, 0.2);
  SECTION("constant") {
    const std::vector<cplx> one(flat.num_nodes(), cplx(1.0));
    CHECK_THAT(l2_norm(flat, one) * l2_norm(flat, one), WithinRel(2.0 * kPi, 1e-12));
    CHECK_THAT(h1_seminorm(flat, one), WithinAbs(0.0, 1e-12));
  }
  SECTION("linear field integrates exactly on a polygonal cell") {
    // Gamma2 cell: int x1^2 and |grad x1|^2 over the polygon between f2 and H.
    const auto f2 = geometry::gamma2();
    const auto m = geometry::build_unit_cell_mesh(f2, 3.0, 0.25);
    const auto v = nodal(m, [](const Point& x) { return cplx(x.x1, 0.0); });
    const auto& knots = std::get<geometry::PiecewiseLinear>(f2.kind()).knots;
    double int_x2 = 0.0;
    double area = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      // exact integrals of x^2 (H - f) and (H - f) on a linear piece
      const double a = knots[i - 1].first;
      const double b = knots[i].first;
      const double fa = 3.0 - knots[i - 1].second;
      const double fb = 3.0 - knots[i].second;
      const double slope = (fb - fa) / (b - a);
      const auto prim = [&](double x) {
        const double c0 = fa - slope * a;
        return c0 * x * x * x / 3.0 + slope * x * x * x * x / 4.0;
      };
      int_x2 += prim(b) - prim(a);
      area += 0.5 * (fa + fb) * (b - a);
    }
    CHECK_THAT(l2_norm(m, v), WithinRel(std::sqrt(int_x2), 1e-10));
    CHECK_THAT(h1_seminorm(m, v), WithinRel(std::sqrt(area), 1e-10));
  }
  SECTION("homogeneity and triangle inequality") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<cplx> a(flat.num_nodes());
    std::vector<cplx> b(flat.num_nodes());
    for (auto& x : a) x = {g(rng), g(rng)};
    for (auto& x : b) x = {g(rng), g(rng)};
    std::vector<cplx> sum(a.size());
    std::vector<cplx> scaled(a.size());
    const cplx c(-1.5, 2.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      sum[i] = a[i] + b[i];
      scaled[i] = c * a[i];
    }
    CHECK_THAT(l2_norm(flat, scaled), WithinRel(std::abs(c) * l2_norm(flat, a), 1e-13));
    CHECK_THAT(h1_seminorm(flat, scaled), WithinRel(std::abs(c) * h1_seminorm(flat, a), 1e-13));
    CHECK(l2_norm(flat, sum) <= l2_norm(flat, a) + l2_norm(flat, b));
    CHECK(h1_seminorm(flat, sum) <= h1_seminorm(flat, a) + h1_seminorm(flat, b));
  }
  SECTION("quadrature of a smooth field converges like h^2") {
    const auto f = [](const Point& x) { return cplx(std::cos(x.x1) * std::exp(-x.x2), 0.0); };
    // int cos^2(x1) dx1 = pi, int_2^3 e^{-2 x2} dx2
    const double exact = std::sqrt(kPi * 0.5 * (std::exp(-4.0) - std::exp(-6.0)));
    double prev = 0.0;
    for (double h : {0.2, 0.1, 0.05}) {
      const auto m = geometry::build_unit_cell_mesh(geometry::flat(2.0), 3.0, h);
      const double err = std::fabs(l2_norm(m, nodal(m, f)) - exact);
      if (prev > 0.0) CHECK(prev / err > 3.0);
      prev = err;
    }
  }
}

TEST_CASE("relative errors", "[postproc]") {
  const auto m = geometry::build_unit_cell_mesh(geometry::gamma1(), 3.0, 0.2);
  const auto f = [](const Point& x) { return std::exp(cplx(0.0, 0.7 * x.x1 - 0.4 * x.x2)); };
  const auto ref = nodal(m, f);

  SECTION("identical fields") {
    const auto e = relative_error(m, ref, std::span<const cplx>(ref));
    CHECK(e.l2 == 0.0);
    CHECK(e.h1 == 0.0);
  }
  SECTION("homogeneous under common scaling") {
    std::vector<cplx> num(ref.size());
    for (std::size_t i = 0; i < num.size(); ++i) num[i] = ref[i] * (1.0 + 0.01 * std::sin(3.0 * i));
    const auto e1 = relative_error(m, num, std::span<const cplx>(ref));
    const cplx c(2.0, -3.0);
    std::vector<cplx> num2(num.size());
    std::vector<cplx> ref2(ref.size());
    for (std::size_t i = 0; i < num.size(); ++i) {
      num2[i] = c * num[i];
      ref2[i] = c * ref[i];
    }
    const auto e2 = relative_error(m, num2, std::span<const cplx>(ref2));
    CHECK_THAT(e2.l2, WithinRel(e1.l2, 1e-12));
    CHECK_THAT(e2.h1, WithinRel(e1.h1, 1e-12));
  }
  SECTION("sampled reference measures the true gradient error") {
    // interpolant of a smooth field: L2 error O(h^2), H1 error O(h)
    std::vector<double> h1;
    for (double h : {0.2, 0.1}) {
      const auto mh = geometry::build_unit_cell_mesh(geometry::gamma1(), 3.0, h);
      const auto e = relative_error(mh, nodal(mh, f), std::function<cplx(const Point&)>(f));
      CHECK(e.l2 < 1e-12);  // reference and numeric agree at the nodes
      h1.push_back(e.h1);
    }
    CHECK_THAT(h1[0] / h1[1], WithinRel(2.0, 0.1));
  }
  SECTION("zero reference is a domain error") {
    const std::vector<cplx> zero(m.num_nodes(), cplx(0.0));
    CHECK_THROWS_AS(relative_error(m, ref, std::span<const cplx>(zero)), DomainError);
  }
}

TEST_CASE("rate fits", "[postproc]") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {20.0, 40.0, 80.0, 160.0}) pts.emplace_back(n, 3.0 / n);
  CHECK_THAT(fit_rate(pts), WithinAbs(-1.0, 1e-12));
  pts.clear();
  for (double n : {20.0, 40.0, 80.0}) pts.emplace_back(n, 0.5 / (n * n));
  CHECK_THAT(fit_rate(pts), WithinAbs(-2.0, 1e-12));

  // balanced ladder read off the published table for the smooth surface
  const std::vector<std::pair<double, double>> ladder{{20, 1.59e-2}, {80, 2.10e-3}, {320, 2.49e-4}};
  CHECK_THAT(fit_rate(ladder), WithinAbs(-1.5, 0.2));

  CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{1.0, 1.0}}), ArgumentError);
  CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 0.0}}), DomainError);
}

TEST_CASE("synthesis of per-alpha solutions", "[postproc]") {
  const WaveParams p(1.0, 2.0 * kPi);
  const auto mesh = geometry::build_unit_cell_mesh(geometry::gamma1(), 3.0, 0.3);
  const SourcePoint src(-1.0, 0.4);
  const qpfem::IncidentSpec inc{qpfem::PointSourceBelow{src}};
  const auto grid = bloch::brillouin_samples(2.0 * kPi, 8);
  std::vector<qpfem::QPSolution> sols;
  for (double a : grid.alphas) sols.push_back(qpfem::solve_qp(qpfem::assemble(mesh, p, a, 80, qpfem::Mode::B, inc)));
  const auto u = synthesize(mesh, grid, sols, 1);
  REQUIRE(u.cells.size() == 3);

  // The synthesis is linear in the family: the Dirichlet nodes hold exactly
  // the discrete inverse transform of the Bloch traces.
  const auto surface = mesh.node_mask(geometry::Tag::Surface);
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    if (!surface[n]) continue;
    cplx expect(0.0);
    for (int m = 0; m < grid.n; ++m) expect += sols[m].values[n];
    expect *= grid.weight;
    CHECK(std::abs(u.cell(0)[n] - expect) <= 1e-15 * (1.0 + std::abs(expect)) * grid.n);
  }
  // u on the shifted cell approximates G on the shifted cell
  const Point x = mesh.nodes[mesh.top_nodes()[5]];
  const cplx g1 = halfspace_green(p, {x.x1 + 2.0 * kPi, x.x2}, src);
  CHECK(std::abs(u.cell(1)[mesh.top_nodes()[5]] - g1) <= 0.1 * std::abs(halfspace_green(p, x, src)));

  CHECK_THROWS_AS(synthesize(mesh, bloch::brillouin_samples(2.0 * kPi, 4), sols), ArgumentError);
}

TEST_CASE("P1 interpolation between meshes", "[postproc]") {
  const auto coarse = geometry::build_unit_cell_mesh(geometry::gamma1(), 3.0, 0.2);
  const auto fine = geometry::build_unit_cell_mesh(geometry::gamma1(), 3.0, 0.1);
  const auto lin = [](const Point& x) { return cplx(2.0 * x.x1 - x.x2, 0.5 * x.x2); };
  const P1Interpolator interp(coarse, nodal(coarse, lin));
  // linear fields are reproduced inside the coarse mesh
  for (std::size_t i = 0; i < fine.num_nodes(); i += 7) {
    const Point& x = fine.nodes[i];
    if (x.x2 < 2.4) continue;  // stay above the curved boundary band
    CHECK(std::abs(interp(x) - lin(x)) <= 1e-12);
  }
  // nodes of the coarse mesh are hit exactly
  for (std::size_t i = 0; i < coarse.num_nodes(); i += 5) {
    CHECK(std::abs(interp(coarse.nodes[i]) - lin(coarse.nodes[i])) <= 1e-12);
  }
}
