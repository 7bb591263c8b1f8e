#pragma once

// Experiment configuration, the parallel alpha sweep over an (N, h) matrix,
// balanced refinement and output files (CSV, JSON mirror, rate data).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "floquet/bloch.hpp"
#include "floquet/errors.hpp"
#include "floquet/fields.hpp"
#include "floquet/geometry.hpp"
#include "floquet/postproc.hpp"
#include "floquet/qpfem.hpp"

namespace floquet::harness {

using postproc::ErrorRecord;

struct ExperimentConfig {
  std::string surface = "gamma1";  // gamma1 | gamma2 | gamma3 | file
  std::string surface_file;
  double k = 1.0;
  double period = 2.0 * std::numbers::pi;
  double height = 3.0;  // H
  int order = 80;       // M
  std::string incident = "point";  // point | herglotz
  Point source{-1.0, 0.4};
  double herglotz_center = 0.0;
  double herglotz_width = 0.5;
  qpfem::Mode mode = qpfem::Mode::B;
  std::vector<int> n_list;
  std::vector<double> h_list;
  bool balanced = false;
  double c0 = 2.0 / (5.0 * std::sqrt(5.0));
  std::string out_dir = "out";
  int workers = 1;
  std::string profile = "ci";  // ci | full
  bool deterministic = false;  // runtime column written as 0
  bool dump_solutions = false; // per-alpha dumps under out/solutions, reused on restart
  double residual_tolerance = qpfem::kResidualTolerance;

  /// Fills empty N / h lists from the profile and checks invariants.
  void resolve();
  std::vector<std::pair<std::string, std::string>> echo() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int i = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& v, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_same_v<T, double>) {
      s += fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

}  // namespace detail

/// Applies one key=value setting. Keys mirror the long CLI flags.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v = trim(value);
  if (key == "surface") {
    cfg.surface = v;
  } else if (key == "surface-file") {
    cfg.surface_file = v;
  } else if (key == "k") {
    cfg.k = to_double(key, v);
  } else if (key == "period") {
    cfg.period = to_double(key, v);
  } else if (key == "H") {
    cfg.height = to_double(key, v);
  } else if (key == "M") {
    cfg.order = to_int(key, v);
  } else if (key == "source") {
    const auto parts = split(v);
    if (parts.size() != 2) throw ConfigError("'source' expects x,y");
    cfg.source = {to_double(key, parts[0]), to_double(key, parts[1])};
  } else if (key == "incident") {
    cfg.incident = v;
  } else if (key == "herglotz-center") {
    cfg.herglotz_center = to_double(key, v);
  } else if (key == "herglotz-width") {
    cfg.herglotz_width = to_double(key, v);
  } else if (key == "mode") {
    if (v == "A") {
      cfg.mode = qpfem::Mode::A;
    } else if (v == "B") {
      cfg.mode = qpfem::Mode::B;
    } else {
      throw ConfigError("'mode' expects A or B");
    }
  } else if (key == "N") {
    cfg.n_list.clear();
    for (const auto& s : split(v)) cfg.n_list.push_back(to_int(key, s));
  } else if (key == "h") {
    cfg.h_list.clear();
    for (const auto& s : split(v)) cfg.h_list.push_back(to_double(key, s));
  } else if (key == "balanced") {
    cfg.balanced = to_bool(key, v);
  } else if (key == "c0") {
    cfg.c0 = to_double(key, v);
  } else if (key == "out") {
    cfg.out_dir = v;
  } else if (key == "workers") {
    cfg.workers = to_int(key, v);
  } else if (key == "profile") {
    cfg.profile = v;
  } else if (key == "deterministic") {
    cfg.deterministic = to_bool(key, v);
  } else if (key == "dump") {
    cfg.dump_solutions = to_bool(key, v);
  } else if (key == "residual-tol") {
    cfg.residual_tolerance = to_double(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Config file: one `key = value` per line, '#' starts a comment.
inline void read_config(std::istream& is, ExperimentConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": missing '='");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void load_config(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path);
  read_config(is, cfg);
}

/// Reads a tabulated profile: one height per line over [-L/2, L/2), '#' comments.
inline geometry::SurfaceProfile load_profile_file(const std::string& path, double period) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open surface file " + path);
  std::vector<double> samples;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    samples.push_back(detail::to_double("surface-file", line));
  }
  if (samples.size() < 3) throw ConfigError("surface file needs at least three samples");
  try {
    return geometry::SurfaceProfile{geometry::Tabulated{samples}, period};
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("surface file: ") + e.what());
  }
}

inline geometry::SurfaceProfile make_profile(const ExperimentConfig& cfg) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto named = [&](geometry::SurfaceProfile p) {
    if (std::fabs(cfg.period - two_pi) > 1e-12) throw ConfigError("named surfaces are defined for period 2 pi");
    return p;
  };
  if (cfg.surface == "gamma1") return named(geometry::gamma1());
  if (cfg.surface == "gamma2") return named(geometry::gamma2());
  if (cfg.surface == "gamma3") return named(geometry::gamma3());
  if (cfg.surface == "file") {
    if (cfg.surface_file.empty()) throw ConfigError("surface=file needs surface-file");
    return load_profile_file(cfg.surface_file, cfg.period);
  }
  throw ConfigError("unknown surface '" + cfg.surface + "'");
}

inline qpfem::IncidentSpec make_incident(const ExperimentConfig& cfg) {
  if (cfg.incident == "point") {
    try {
      return {qpfem::PointSourceBelow{SourcePoint(cfg.source.x1, cfg.source.x2)}};
    } catch (const DomainError& e) {
      throw ConfigError(std::string("source: ") + e.what());
    }
  }
  if (cfg.incident == "herglotz") {
    try {
      return {qpfem::HerglotzIncident{herglotz_bump(cfg.herglotz_center, cfg.herglotz_width)}};
    } catch (const Error& e) {
      throw ConfigError(std::string("herglotz kernel: ") + e.what());
    }
  }
  throw ConfigError("unknown incident '" + cfg.incident + "'");
}

inline void ExperimentConfig::resolve() {
  if (profile != "ci" && profile != "full") throw ConfigError("profile must be ci or full");
  if (n_list.empty()) {
    n_list = profile == "full" ? std::vector<int>{20, 40, 80, 160, 320} : std::vector<int>{20, 40, 80};
  }
  if (h_list.empty()) {
    h_list = profile == "full" ? std::vector<double>{0.16, 0.08, 0.04, 0.02, 0.01}
                               : std::vector<double>{0.16, 0.08, 0.04};
    if (k >= 10.0) std::erase(h_list, 0.16);
  }
  for (int n : n_list) {
    if (n < 1) throw ConfigError("N entries must be >= 1");
  }
  for (double h : h_list) {
    if (!(h > 0.0)) throw ConfigError("h entries must be positive");
  }
  if (!(k > 0.0)) throw ConfigError("k must be positive");
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  if (order < 1) throw ConfigError("M must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!(c0 > 0.0)) throw ConfigError("c0 must be positive");
  if (!(residual_tolerance > 0.0)) throw ConfigError("residual-tol must be positive");
  const auto incident_spec = make_incident(*this);
  if (incident_spec.mode() != mode) {
    throw ConfigError(std::string("mode ") + qpfem::mode_name(mode) + " does not match incident '" + incident +
                      "' (point sources are mode B, Herglotz waves mode A)");
  }
  const auto prof = make_profile(*this);
  if (!(height > prof.max_height())) throw ConfigError("H must lie above the surface");
  incident_spec.validate(prof);
}

inline std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  using detail::fmt;
  std::vector<std::pair<std::string, std::string>> e = {
      {"surface", surface},
      {"surface-file", surface_file},
      {"k", fmt(k)},
      {"period", fmt(period)},
      {"H", fmt(height)},
      {"M", std::to_string(order)},
      {"incident", incident},
      {"source", fmt(source.x1) + "," + fmt(source.x2)},
      {"herglotz-center", fmt(herglotz_center)},
      {"herglotz-width", fmt(herglotz_width)},
      {"mode", qpfem::mode_name(mode)},
      {"N", detail::join(n_list)},
      {"h", detail::join(h_list)},
      {"balanced", balanced ? "true" : "false"},
      {"c0", fmt(c0)},
      {"profile", profile},
      {"residual-tol", fmt(residual_tolerance)},
  };
  // out, workers, deterministic and dump do not change the numbers and are
  // left out so outputs of equivalent runs compare equal.
  return e;
}

// ---------------------------------------------------------------------------
// alpha sweep

/// Runs task(i) for i in [0, count) on `workers` threads. Results must be
/// written to slot i by the task; exceptions are rethrown per slot.
inline void parallel_for(int count, int workers, const std::function<void(int)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Per-alpha solutions on one mesh, shared across N through the reduced
/// sample key. Optionally persisted as one dump file per key.
class SolutionCache {
 public:
  SolutionCache(const geometry::UnitCellMesh& mesh, const WaveParams& params, const ExperimentConfig& cfg,
                const qpfem::IncidentSpec& incident, std::string dump_dir)
      : mesh_(mesh), params_(params), cfg_(cfg), incident_(incident), dump_dir_(std::move(dump_dir)) {}

  /// Ensures every key is solved; returns the number of fresh solves.
  int solve(const std::vector<bloch::SampleKey>& keys) {
    std::vector<bloch::SampleKey> todo;
    for (const auto& key : keys) {
      if (!cache_.contains(key) && std::find(todo.begin(), todo.end(), key) == todo.end()) todo.push_back(key);
    }
    std::vector<std::optional<qpfem::QPSolution>> slots(todo.size());
    parallel_for(static_cast<int>(todo.size()), cfg_.workers, [&](int i) {
      const auto key = todo[i];
      if (auto restored = restore(key)) {
        slots[i] = std::move(restored);
        return;
      }
      const double alpha = bloch::sample_alpha(params_.dual_period(), key);
      const auto sys = qpfem::assemble(mesh_, params_, alpha, cfg_.order, cfg_.mode, incident_);
      slots[i] = qpfem::solve_qp(sys, cfg_.residual_tolerance);
      store(key, *slots[i]);
    });
    for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i], std::move(*slots[i]));
    return static_cast<int>(todo.size());
  }

  const qpfem::QPSolution& at(const bloch::SampleKey& key) const { return cache_.at(key); }

 private:
  std::string path(const bloch::SampleKey& key) const {
    return dump_dir_ + "/alpha_" + std::to_string(key.p) + "_" + std::to_string(key.q) + ".txt";
  }

  std::optional<qpfem::QPSolution> restore(const bloch::SampleKey& key) const {
    if (dump_dir_.empty()) return std::nullopt;
    std::ifstream is(path(key));
    if (!is) return std::nullopt;
    try {
      auto s = qpfem::read_solution(is);
      const double alpha = bloch::sample_alpha(params_.dual_period(), key);
      if (s.values.size() != mesh_.num_nodes() || s.alpha != alpha || s.order != cfg_.order || s.k != params_.k() ||
          s.mode != cfg_.mode || s.height != mesh_.height) {
        return std::nullopt;
      }
      return s;
    } catch (const IoError&) {
      return std::nullopt;
    }
  }

  void store(const bloch::SampleKey& key, const qpfem::QPSolution& s) const {
    if (dump_dir_.empty()) return;
    const std::string target = path(key);
    const std::string tmp = target + ".tmp";
    {
      std::ofstream os(tmp);
      if (!os) throw IoError("cannot write " + tmp);
      qpfem::write_solution(os, s);
    }
    std::filesystem::rename(tmp, target);
  }

  const geometry::UnitCellMesh& mesh_;
  WaveParams params_;
  const ExperimentConfig& cfg_;
  const qpfem::IncidentSpec& incident_;
  std::string dump_dir_;
  std::map<bloch::SampleKey, qpfem::QPSolution> cache_;
};

inline std::string solution_dir(const ExperimentConfig& cfg, double h) {
  if (!cfg.dump_solutions) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "/solutions/h%.6g", h);
  const std::string dir = cfg.out_dir + buf;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  return dir;
}

struct CellField {
  int n = 0;
  double h = 0.0;
  std::shared_ptr<const geometry::UnitCellMesh> mesh;
  std::vector<cplx> values;  // u_{N,h} on the shift-0 cell
};

/// Solves every requested (N, h) cell. Mode B errors are measured against
/// the half-space Green's function; Mode A cells are compared with the
/// finest cell of the run (self-convergence).
inline std::vector<ErrorRecord> run_cells(const ExperimentConfig& cfg,
                                          const std::vector<std::pair<int, double>>& cells) {
  using clock = std::chrono::steady_clock;
  const auto profile = make_profile(cfg);
  const auto incident = make_incident(cfg);
  const WaveParams params(cfg.k, cfg.period);
  std::vector<ErrorRecord> records;
  std::vector<CellField> fields;

  std::vector<double> hs;
  for (const auto& [n, h] : cells) {
    if (std::find(hs.begin(), hs.end(), h) == hs.end()) hs.push_back(h);
  }
  for (double h : hs) {
    std::shared_ptr<const geometry::UnitCellMesh> mesh;
    std::optional<postproc::ReferenceSample> reference;
    std::unique_ptr<SolutionCache> cache;
    std::string setup_error;
    const auto t0 = clock::now();
    try {
      mesh = std::make_shared<const geometry::UnitCellMesh>(geometry::build_unit_cell_mesh(profile, cfg.height, h));
      if (cfg.mode == qpfem::Mode::B) {
        const SourcePoint src = std::get<qpfem::PointSourceBelow>(incident.kind).source;
        reference = postproc::sample_reference(*mesh, [&](const Point& x) { return halfspace_green(params, x, src); });
      }
      cache = std::make_unique<SolutionCache>(*mesh, params, cfg, incident, solution_dir(cfg, h));
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      setup_error = e.what();
    }
    const double setup_time = std::chrono::duration<double>(clock::now() - t0).count();
    bool first = true;
    for (const auto& [n, hh] : cells) {
      if (hh != h) continue;
      ErrorRecord rec;
      rec.surface = cfg.surface;
      rec.k = cfg.k;
      rec.n = n;
      rec.h = h;
      rec.order = cfg.order;
      if (mesh) rec.h_mesh = mesh->h;
      const auto t1 = clock::now();
      if (!setup_error.empty()) {
        rec.status = "failed: " + setup_error;
      } else {
        try {
          const auto grid = bloch::brillouin_samples(cfg.period, n);
          std::vector<bloch::SampleKey> keys;
          for (int m = 1; m <= n; ++m) keys.push_back(grid.key(m));
          cache->solve(keys);
          std::vector<qpfem::QPSolution> sols;
          sols.reserve(n);
          for (const auto& key : keys) sols.push_back(cache->at(key));
          const auto u = postproc::synthesize(*mesh, grid, sols, 0);
          if (reference) {
            const auto err = postproc::relative_error(*mesh, u.cell(0), *reference);
            rec.rel_l2 = err.l2;
            rec.rel_h1 = err.h1;
          }
          fields.push_back({n, h, mesh, u.cell(0)});
        } catch (const IoError&) {
          throw;
        } catch (const Error& e) {
          rec.status = std::string("failed: ") + e.what();
        }
      }
      double elapsed = std::chrono::duration<double>(clock::now() - t1).count();
      if (first) elapsed += setup_time;
      first = false;
      rec.runtime = cfg.deterministic ? 0.0 : elapsed;
      records.push_back(rec);
    }
  }

  if (cfg.mode == qpfem::Mode::A && !fields.empty()) {
    // Finest cell: largest N, then smallest h.
    const auto finest = std::max_element(fields.begin(), fields.end(), [](const CellField& a, const CellField& b) {
      return a.n != b.n ? a.n < b.n : a.h > b.h;
    });
    const postproc::P1Interpolator ref(*finest->mesh, finest->values);
    for (const auto& f : fields) {
      auto rec = std::find_if(records.begin(), records.end(), [&](const ErrorRecord& r) {
        return r.n == f.n && r.h == f.h && r.status == "ok";
      });
      if (rec == records.end()) continue;
      if (f.n == finest->n && f.h == finest->h) {
        rec->status = "reference";
        continue;
      }
      try {
        const auto err = postproc::relative_error(*f.mesh, f.values, postproc::interpolate(*f.mesh, std::cref(ref)));
        rec->rel_l2 = err.l2;
        rec->rel_h1 = err.h1;
      } catch (const Error& e) {
        rec->status = std::string("failed: ") + e.what();
      }
    }
  }
  // Table order: h outer as given, N inner as given.
  std::vector<ErrorRecord> ordered;
  for (const auto& [n, h] : cells) {
    for (const auto& r : records) {
      if (r.n == n && r.h == h) {
        ordered.push_back(r);
        break;
      }
    }
  }
  return ordered;
}

inline std::vector<ErrorRecord> run_convergence(const ExperimentConfig& cfg) {
  std::vector<std::pair<int, double>> cells;
  for (double h : cfg.h_list) {
    for (int n : cfg.n_list) cells.emplace_back(n, h);
  }
  return run_cells(cfg, cells);
}

/// (h, N) pairs with h = c0 N^{-1/2}, rounded to the nominal mesh widths.
inline std::vector<std::pair<int, double>> balanced_pairs(const ExperimentConfig& cfg) {
  std::vector<int> ns{20, 80};
  if (cfg.profile == "full") ns.push_back(320);
  std::vector<std::pair<int, double>> pairs;
  for (int n : ns) {
    const double h = cfg.c0 / std::sqrt(static_cast<double>(n));
    pairs.emplace_back(n, std::round(h * 1e4) / 1e4);
  }
  return pairs;
}

struct BalancedResult {
  std::vector<ErrorRecord> records;
  std::optional<double> slope;  // d log(relL2) / d log(N)
};

inline BalancedResult run_balanced(const ExperimentConfig& cfg) {
  BalancedResult out;
  out.records = run_cells(cfg, balanced_pairs(cfg));
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : out.records) {
    if (r.status == "ok" && r.rel_l2 > 0.0) pts.emplace_back(r.n, r.rel_l2);
  }
  if (pts.size() >= 2) out.slope = postproc::fit_rate(pts);
  return out;
}

// ---------------------------------------------------------------------------
// outputs

inline const char* kCsvHeader = "surface,k,N,h,M,relL2,relH1,runtime,status";

inline void write_csv(std::ostream& os, const std::vector<ErrorRecord>& records, const ExperimentConfig& cfg) {
  for (const auto& [key, value] : cfg.echo()) os << "# " << key << "=" << value << "\n";
  os << kCsvHeader << "\n";
  using detail::fmt;
  for (const auto& r : records) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << r.surface << ',' << fmt(r.k) << ',' << r.n << ',' << fmt(r.h) << ',' << r.order << ',' << fmt(r.rel_l2)
       << ',' << fmt(r.rel_h1) << ',' << fmt(r.runtime) << ',' << status << "\n";
  }
}

inline std::vector<ErrorRecord> read_csv(std::istream& is) {
  std::vector<ErrorRecord> out;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw IoError("unexpected CSV header: " + line);
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 9) throw IoError("malformed CSV row: " + line);
    ErrorRecord r;
    try {
      r.surface = f[0];
      r.k = std::stod(f[1]);
      r.n = std::stoi(f[2]);
      r.h = std::stod(f[3]);
      r.order = std::stoi(f[4]);
      r.rel_l2 = std::stod(f[5]);
      r.rel_h1 = std::stod(f[6]);
      r.runtime = std::stod(f[7]);
      r.status = f[8];
    } catch (const std::exception&) {
      throw IoError("malformed CSV row: " + line);
    }
    out.push_back(r);
  }
  if (!header) throw IoError("CSV header missing");
  return out;
}

inline nlohmann::json to_json(const std::vector<ErrorRecord>& records, const ExperimentConfig& cfg,
                              std::optional<double> slope = std::nullopt) {
  nlohmann::json j;
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& [key, value] : cfg.echo()) conf[key] = value;
  j["config"] = conf;
  j["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    j["records"].push_back({{"surface", r.surface},
                            {"k", r.k},
                            {"N", r.n},
                            {"h", r.h},
                            {"h_mesh", r.h_mesh},
                            {"M", r.order},
                            {"relL2", r.rel_l2},
                            {"relH1", r.rel_h1},
                            {"runtime", r.runtime},
                            {"status", r.status}});
  }
  if (slope) j["slope"] = *slope;
  return j;
}

struct OutputPaths {
  std::string csv;
  std::string json;
  std::string rate;
};

/// Writes errors.csv, errors.json and rate.dat into cfg.out_dir.
inline OutputPaths emit_outputs(const std::vector<ErrorRecord>& records, const ExperimentConfig& cfg,
                                std::optional<double> slope = std::nullopt) {
  if (records.empty()) throw ArgumentError("no records to write");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir + ": " + ec.message());
  OutputPaths paths{cfg.out_dir + "/errors.csv", cfg.out_dir + "/errors.json", cfg.out_dir + "/rate.dat"};
  auto open = [](const std::string& p) {
    std::ofstream os(p);
    if (!os) throw IoError("cannot write " + p);
    return os;
  };
  {
    auto os = open(paths.csv);
    write_csv(os, records, cfg);
    if (!os) throw IoError("failed writing " + paths.csv);
  }
  {
    auto os = open(paths.json);
    os << to_json(records, cfg, slope).dump(2) << "\n";
    if (!os) throw IoError("failed writing " + paths.json);
  }
  {
    auto os = open(paths.rate);
    for (const auto& [key, value] : cfg.echo()) os << "# " << key << "=" << value << "\n";
    if (slope) os << "# slope=" << detail::fmt(*slope) << "\n";
    os << "# N h relL2 relH1\n";
    for (const auto& r : records) {
      if (r.status != "ok") continue;
      os << r.n << ' ' << detail::fmt(r.h) << ' ' << detail::fmt(r.rel_l2) << ' ' << detail::fmt(r.rel_h1) << "\n";
    }
    if (!os) throw IoError("failed writing " + paths.rate);
  }
  return paths;
}

}  // namespace floquet::harness
