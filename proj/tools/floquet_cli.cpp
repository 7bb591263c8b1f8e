// floquet: command line front end for the Floquet-Bloch scattering solver.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "floquet/geometry.hpp"
#include "floquet/harness.hpp"
#include "floquet/selftest.hpp"

namespace {

using namespace floquet;

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

struct Settings {
  std::string config_file;
  std::map<std::string, std::string> given;  // key -> raw value, flags only
  bool herglotz = false;
  bool deterministic = false;
  bool dump = false;
  std::string mesh_file;
};

void add_common(CLI::App& app, Settings& s) {
  auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option(flag, s.given[key], help);
  };
  app.add_option("--config", s.config_file, "key = value config file; flags override it");
  opt("--surface", "surface", "gamma1 | gamma2 | gamma3 | file");
  opt("--surface-file", "surface-file", "tabulated profile, one height per line");
  opt("--k", "k", "wavenumber");
  opt("--period", "period", "period Lambda");
  opt("--H", "H", "height of the artificial boundary");
  opt("--M", "M", "DtN truncation order");
  opt("--source", "source", "point source x,y below the surface");
  opt("--mode", "mode", "A (Herglotz incident) | B (point source trace)");
  opt("--N", "N", "quasimomentum counts, comma separated");
  opt("--h", "h", "mesh widths, comma separated");
  opt("--workers", "workers", "threads for the alpha sweep");
  opt("--out", "out", "output directory");
  opt("--profile", "profile", "ci | full");
  opt("--c0", "c0", "balanced refinement constant");
  opt("--herglotz-center", "herglotz-center", "Herglotz bump centre angle");
  opt("--herglotz-width", "herglotz-width", "Herglotz bump half width");
  opt("--residual-tol", "residual-tol", "relative residual required of each solve");
  app.add_flag("--herglotz", s.herglotz, "Herglotz incident wave (implies mode A)");
  app.add_flag("--deterministic", s.deterministic, "write runtime as 0 so outputs compare bitwise");
  app.add_flag("--dump", s.dump, "keep per-alpha solutions under OUT/solutions and reuse them");
}

harness::ExperimentConfig resolve(const Settings& s, const CLI::App& app) {
  harness::ExperimentConfig cfg;
  if (!s.config_file.empty()) harness::load_config(s.config_file, cfg);
  for (const auto& [key, value] : s.given) {
    const std::string flag = "--" + key;
    if (app.count(flag) > 0) harness::apply_setting(cfg, key, value);
  }
  if (s.herglotz) {
    cfg.incident = "herglotz";
    if (app.count("--mode") == 0) cfg.mode = qpfem::Mode::A;
  }
  if (s.deterministic) cfg.deterministic = true;
  if (s.dump) cfg.dump_solutions = true;
  return cfg;
}

int finish(const std::vector<postproc::ErrorRecord>& records, const harness::ExperimentConfig& cfg,
           std::optional<double> slope = std::nullopt) {
  const auto paths = harness::emit_outputs(records, cfg, slope);
  bool failed = false;
  std::printf("%6s %8s %12s %12s %10s  %s\n", "N", "h", "relL2", "relH1", "runtime", "status");
  for (const auto& r : records) {
    std::printf("%6d %8g %12.3e %12.3e %10.2f  %s\n", r.n, r.h, r.rel_l2, r.rel_h1, r.runtime, r.status.c_str());
    failed = failed || r.status.rfind("failed", 0) == 0;
  }
  if (slope) std::printf("fitted slope %.3f\n", *slope);
  std::printf("wrote %s, %s, %s\n", paths.csv.c_str(), paths.json.c_str(), paths.rate.c_str());
  return failed ? kSolver : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet-Bloch scattering from periodic Dirichlet surfaces"};
  app.set_help_flag("--help", "print this help");
  app.require_subcommand(1);
  Settings s;
  add_common(app, s);

  auto* solve = app.add_subcommand("solve", "single (N, h) run");
  auto* converge = app.add_subcommand("converge", "error matrix over the N and h lists");
  auto* balanced = app.add_subcommand("balanced", "balanced refinement h = c0 N^{-1/2} with fitted slope");
  auto* mesh = app.add_subcommand("mesh", "build and export the unit-cell mesh for one h");
  mesh->add_option("--file", s.mesh_file, "mesh output path (default OUT/mesh.txt)");
  auto* self = app.add_subcommand("selftest", "invariant suite");
  for (auto* sub : {solve, converge, balanced, mesh, self}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (self->parsed()) return selftest::run(std::cout) ? kOk : kSolver;

    auto cfg = resolve(s, app);
    if (solve->parsed() || mesh->parsed()) {
      if (cfg.n_list.size() > 1 || cfg.h_list.size() > 1) throw ConfigError("this command takes a single N and h");
    }
    cfg.resolve();
    if (solve->parsed()) {
      const std::vector<std::pair<int, double>> cell{{cfg.n_list.front(), cfg.h_list.front()}};
      return finish(harness::run_cells(cfg, cell), cfg);
    }
    if (converge->parsed()) return finish(harness::run_convergence(cfg), cfg);
    if (balanced->parsed()) {
      cfg.balanced = true;
      const auto result = harness::run_balanced(cfg);
      return finish(result.records, cfg, result.slope);
    }
    if (mesh->parsed()) {
      const auto m = geometry::build_unit_cell_mesh(harness::make_profile(cfg), cfg.height, cfg.h_list.front());
      std::string path = s.mesh_file;
      if (path.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        path = cfg.out_dir + "/mesh.txt";
      }
      geometry::save_mesh(path, m);
      const auto q = m.quality();
      std::printf("%zu nodes, %zu triangles, max edge %.4f, min angle %.1f deg\n", m.num_nodes(), m.triangles.size(),
                  m.h, q.min_angle_deg);
      for (const auto& w : m.warnings) std::printf("warning: %s\n", w.c_str());
      std::printf("wrote %s\n", path.c_str());
      return kOk;
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const SingularSystemError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const SolverQualityError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
