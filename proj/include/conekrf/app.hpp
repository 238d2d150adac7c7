#pragma once

// Command orchestration behind the conekrf tool. Every command writes into
// <out>/<command>-<hash>/, where the hash covers the canonical config, the
// command and the seed; an existing directory is reused, never rewritten.
//
// Exit status: 0 all verdicts pass, 3 finished with a failing verdict or an
// aborted run, 2 configuration error, 1 any other error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "conekrf/compare.hpp"
#include "conekrf/config.hpp"
#include "conekrf/errors.hpp"
#include "conekrf/estimates.hpp"
#include "conekrf/flow.hpp"
#include "conekrf/initial_data.hpp"
#include "conekrf/io.hpp"
#include "conekrf/sweeps.hpp"

namespace conekrf {

namespace fs = std::filesystem;

enum class Command { Run, SweepGamma, SweepEps, Validate, Mms, Compare, Report };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::Run: return "run";
    case Command::SweepGamma: return "sweep-gamma";
    case Command::SweepEps: return "sweep-eps";
    case Command::Validate: return "validate";
    case Command::Mms: return "mms";
    case Command::Compare: return "compare";
    case Command::Report: return "report";
  }
  return "unknown";
}

struct RunManifest {
  std::string config_path;  ///< empty: all defaults
  fs::path out_dir;
  Command command = Command::Run;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct ExecResult {
  int status = 0;
  fs::path dir;
  bool reused = false;
};

/// $CONEKRF_OUT_DIR, else ./conekrf-out.
inline fs::path default_out_dir() {
  if (const char* env = std::getenv("CONEKRF_OUT_DIR"); env && *env) return env;
  return "conekrf-out";
}

/// {"error": {"type", "message", "key", "line"}} on one line.
inline std::string error_json(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    err["type"] = "config";
    err["key"] = c->key();
    err["line"] = c->line();
  } else if (dynamic_cast<const PositivityError*>(&e)) {
    err["type"] = "positivity";
  } else if (dynamic_cast<const SolverError*>(&e)) {
    err["type"] = "solver";
  } else if (dynamic_cast<const DomainError*>(&e)) {
    err["type"] = "domain";
  } else {
    err["type"] = "runtime";
  }
  return json{{"error", err}}.dump();
}

/// Initial potential on `mesh` per the config's initial.* keys.
inline std::vector<double> make_initial(const LabConfig& cfg, const Mesh& mesh, std::uint64_t seed) {
  const ModelGeometry geom = cfg.geometry();
  if (cfg.initial.profile == "ring") return ring_profile(mesh, geom, cfg.initial.eta, cfg.initial.center);
  if (cfg.initial.profile == "random") {
    std::mt19937_64 rng(seed);
    return random_psh_data(mesh, geom, rng);
  }
  return bump_profile(mesh, geom, cfg.initial.amplitude);
}

namespace detail {

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
void write_csv(const fs::path& p, F&& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  body(out);
}

inline Trajectory run_configured(const FlowConfig& flow, std::span<const double> phi0) {
  if (flow.variant == Variant::Regularized) {
    const auto data = mollify_initial(phi0, flow.mollify_j);
    return run_flow(flow, data);
  }
  return run_flow(flow, phi0);
}

inline int cmd_run(const LabConfig& cfg, const RunManifest& m, const fs::path& dir) {
  const FlowConfig flow = cfg.flow();
  const auto phi0 = make_initial(cfg, flow.mesh, m.seed);
  const Trajectory traj = run_configured(flow, phi0);
  write_csv(dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  write_csv(dir / "steps.csv", [&](std::ostream& o) { write_steps_csv(o, traj); });
  json j = {{"variant", to_string(flow.variant)},
            {"gamma", flow.effective_gamma()},
            {"steps", traj.steps.size()},
            {"t_final", traj.states.back().t},
            {"aborted", traj.aborted},
            {"abort_reason", traj.abort_reason}};
  bool ok = !traj.aborted;
  if (!traj.aborted && flow.variant != Variant::Regularized) {
    const SweepResult tz = time_zero_study(traj, phi0);
    j["time_zero"] = to_json(tz);
    write_csv(dir / "time_zero.csv", [&](std::ostream& o) { write_sweep_csv(o, tz, "t", "L1"); });
  }
  write_json(dir / "run.json", j);
  return ok ? 0 : 3;
}

inline std::vector<double> validate_gammas(const LabConfig& cfg) {
  if (cfg.variant == Variant::Conical) return cfg.sweep.gammas;
  return {cfg.flow().effective_gamma()};
}

inline int cmd_validate(const LabConfig& cfg, const RunManifest& m, const fs::path& dir) {
  const FlowConfig base = cfg.flow();
  const auto phi0 = make_initial(cfg, base.mesh, m.seed);
  const auto gammas = validate_gammas(cfg);
  const auto opt = cfg.estimate_options();
  auto reports = parallel_map(gammas.size(), m.jobs, [&](std::size_t k) {
    FlowConfig flow = base;
    if (cfg.variant == Variant::Conical) flow.params.gamma = gammas[k];
    const Trajectory traj = run_configured(flow, phi0);
    if (traj.aborted) throw SolverError("validate: run at gamma = " + std::to_string(gammas[k]) + " aborted: " + traj.abort_reason);
    return run_all_validators(traj, opt);
  });
  json runs = json::array();
  std::map<std::string, std::vector<double>> by_name;
  bool ok = true;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    json rs = json::array();
    for (const auto& r : reports[k]) {
      rs.push_back(to_json(r));
      by_name[r.name].push_back(r.fitted_C);
      ok = ok && r.pass;
    }
    runs.push_back({{"gamma", gammas[k]}, {"variant", to_string(cfg.variant)}, {"reports", rs}});
  }
  json uni = json::object();
  for (const auto& [name, cs] : by_name) uni[name] = number(uniformity_ratio(cs));
  write_json(dir / "estimates.json", {{"runs", runs}, {"uniformity_ratio", uni}});
  write_csv(dir / "estimates.csv", [&](std::ostream& o) {
    o << "validator,gamma,fitted_C\n";
    for (std::size_t k = 0; k < gammas.size(); ++k)
      for (const auto& r : reports[k]) {
        o << r.name << ',';
        put(o, gammas[k]);
        o << ',';
        put(o, r.fitted_C);
        o << '\n';
      }
  });
  return ok ? 0 : 3;
}

inline Window window_of(const LabConfig& cfg) { return {cfg.sweep.window[0], cfg.sweep.window[1]}; }

inline int cmd_sweep_gamma(const LabConfig& cfg, const RunManifest& m, const fs::path& dir) {
  const FlowConfig base = cfg.flow();
  const auto phi0 = make_initial(cfg, base.mesh, m.seed);
  const SweepResult r = gamma_sweep(base, cfg.sweep.gammas, window_of(cfg), cfg.sweep.times, phi0, m.jobs);
  write_json(dir / "sweep_gamma.json", to_json(r));
  write_csv(dir / "sweep_gamma.csv", [&](std::ostream& o) { write_sweep_csv(o, r, "gamma", "e"); });
  return r.pass ? 0 : 3;
}

inline int cmd_sweep_eps(const LabConfig& cfg, const RunManifest& m, const fs::path& dir) {
  if (!(cfg.params.gamma > 0.0)) throw ConfigError("sweep-eps needs flow.gamma > 0", "flow.gamma");
  const FlowConfig base = cfg.flow();
  const auto phi0 = make_initial(cfg, base.mesh, m.seed);
  const SweepResult r = epsilon_sweep(base, cfg.params.gamma, cfg.sweep.epsilons, cfg.sweep.j_list, phi0, m.jobs);
  write_json(dir / "sweep_eps.json", to_json(r));
  write_csv(dir / "sweep_eps.csv", [&](std::ostream& o) { write_sweep_csv(o, r, "epsilon", "gap"); });
  if (!r.dump.empty()) write_csv(dir / "violations.csv", [&](std::ostream& o) { write_violations_csv(o, r.dump); });
  return r.pass ? 0 : 3;
}

inline int cmd_mms(const LabConfig& cfg, const RunManifest& m, const fs::path& dir) {
  const FlowConfig flow = cfg.flow();
  const OrderStudy os = order_study(flow);
  json j = {{"spatial", to_json(os.spatial)},
            {"temporal", to_json(os.temporal)},
            {"spatial_table", to_json(os.spatial_table)},
            {"temporal_table", to_json(os.temporal_table)}};
  bool ok = os.spatial.pass && os.temporal.pass;
  write_csv(dir / "mms_spatial.csv", [&](std::ostream& o) { write_sweep_csv(o, os.spatial, "h", "error"); });
  write_csv(dir / "mms_temporal.csv", [&](std::ostream& o) { write_sweep_csv(o, os.temporal, "dt", "error"); });
  if (cfg.sweep.u_mins.size() >= 2) {
    const ModelGeometry geom = cfg.geometry();
    const double amp = cfg.initial.amplitude;
    const SweepResult tr = truncation_study(flow, cfg.sweep.u_mins, window_of(cfg),
                                            [&](double u) { return 4.0 * amp * geom.g(u); }, m.jobs);
    j["truncation"] = to_json(tr);
    write_csv(dir / "truncation.csv", [&](std::ostream& o) { write_sweep_csv(o, tr, "u_min", "gap"); });
    ok = ok && tr.pass;
  }
  write_json(dir / "mms.json", j);
  return ok ? 0 : 3;
}

inline int cmd_compare(const LabConfig& cfg, const RunManifest& m, const fs::path& dir) {
  FlowConfig flow = cfg.flow();
  if (flow.variant != Variant::Conical && flow.variant != Variant::Cusp) flow.variant = Variant::Conical;
  const auto phi0 = make_initial(cfg, flow.mesh, m.seed);
  const Trajectory traj = run_flow(flow, phi0);
  if (traj.aborted) throw SolverError("compare: run aborted: " + traj.abort_reason);
  json j;
  bool ok = true;

  const Subsolution sub = build_subsolution(traj, cfg.compare.t0, cfg.compare.l);
  const CheckReport sc = check_subsolution(traj, sub);
  j["subsolution"] = to_json(sc);
  j["subsolution"]["elliptic_iterations"] = sub.elliptic.iterations;
  j["subsolution"]["elliptic_residual"] = sub.elliptic.residual;
  if (!sc.dump.empty())
    write_csv(dir / "subsolution_violations.csv", [&](std::ostream& o) { write_violations_csv(o, sc.dump); });
  ok = ok && sc.pass;

  const ModelGeometry geom = cfg.geometry();
  const Mesh& mesh = flow.mesh;
  const double L = mesh.u_max() - mesh.u_min();
  const Mesh doubled = build_mesh(mesh.u_max() - 2.0 * L, mesh.u_max(), 2 * mesh.size() - 1, cfg.mesh.grading);
  const double c1 = cusp_reference(geom, mesh).fitted_C, c2 = cusp_reference(geom, doubled).fitted_C;
  const double drift = std::abs(c2 / c1 - 1.0);
  j["cusp_reference"] = {{"C", c1}, {"C_doubled", c2}, {"relative_change", drift}, {"pass", drift <= 0.2}};
  ok = ok && drift <= 0.2;

  FlowConfig pf = flow;
  pf.mesh = build_mesh(mesh.u_min(), mesh.u_max(), cfg.compare.pair_nodes);
  std::size_t violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<ViolationRow> dump;
  for (std::size_t k = 0; k < cfg.compare.pairs; ++k) {
    const auto [a, b] = random_psh_pair(pf.mesh, geom, m.seed + k, k % 2 == 0);
    const Trajectory ta = run_flow(pf, a), tb = run_flow(pf, b);
    if (ta.aborted || tb.aborted) throw SolverError("compare: random pair " + std::to_string(k) + " aborted");
    const ContractionReport cr = contraction_test(ta, tb);
    violations += cr.check.violations;
    worst = std::max(worst, cr.check.max_defect);
    dump.insert(dump.end(), cr.check.dump.begin(), cr.check.dump.end());
  }
  j["contraction"] = {{"pairs", cfg.compare.pairs}, {"violations", violations}, {"max_defect", number(worst)},
                      {"pass", violations == 0}};
  if (!dump.empty()) write_csv(dir / "contraction_violations.csv", [&](std::ostream& o) { write_violations_csv(o, dump); });
  ok = ok && violations == 0;
  write_json(dir / "compare.json", j);
  return ok ? 0 : 3;
}

/// Collects every estimates.json under root into one proposition x gamma table.
inline int cmd_report(const fs::path& root, const fs::path& dir) {
  std::map<std::string, std::map<double, double>> table;
  std::vector<std::string> sources;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() != "estimates.json") continue;
    const json j = json::parse(read_text(entry.path()));
    sources.push_back(fs::relative(entry.path(), root).generic_string());
    for (const auto& run : j.at("runs"))
      for (const auto& r : run.at("reports"))
        table[r.at("name").get<std::string>()][run.at("gamma").get<double>()] =
            r.at("fitted_C").is_null() ? std::numeric_limits<double>::quiet_NaN() : r.at("fitted_C").get<double>();
  }
  if (sources.empty()) throw std::runtime_error("report: no estimates.json under " + root.string());
  std::set<double> gammas;
  for (const auto& [name, row] : table)
    for (const auto& [g, c] : row) gammas.insert(g);
  json out = {{"sources", sources}};
  json props = json::object();
  for (const auto& [name, row] : table) {
    json r = json::object();
    std::vector<double> cs;
    for (const auto& [g, c] : row) {
      r[fmt17(g)] = number(c);
      cs.push_back(c);
    }
    props[name] = {{"fitted_C", r}, {"uniformity_ratio", number(uniformity_ratio(cs))}};
  }
  out["propositions"] = props;
  write_json(dir / "report.json", out);
  write_csv(dir / "report.csv", [&](std::ostream& o) {
    o << "validator";
    for (double g : gammas) o << ",gamma=" << fmt17(g);
    o << '\n';
    for (const auto& [name, row] : table) {
      o << name;
      for (double g : gammas) {
        o << ',';
        if (auto it = row.find(g); it != row.end()) put(o, it->second);
      }
      o << '\n';
    }
  });
  return 0;
}

inline void write_script_if_absent(const fs::path& p, const std::string& text, std::vector<fs::path>& written) {
  if (!fs::exists(p)) write_text(p, text);
  written.push_back(p);
}

}  // namespace detail

/// gnuplot scripts next to every known CSV under out_dir; paths are relative
/// to the script's directory. Throws when nothing is found.
namespace detail {

inline std::vector<fs::path> plot_scripts(const fs::path& out_dir) {
  std::vector<fs::path> written;
  auto header = [](const std::string& title, const std::string& png) {
    return "set datafile separator ','\nset terminal pngcairo size 900,600\nset output '" + png + "'\nset title '" +
           title + "'\nset key autotitle columnhead\n";
  };
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path p = entry.path();
    const fs::path d = p.parent_path();
    const std::string f = p.filename().string();
    if (f == "sweep_gamma.csv") {
      write_script_if_absent(d / "plot_sweep_gamma.gp",
                                     header("gap to the cusp flow", "sweep_gamma.png") +
                                         "set logscale xy\nset xlabel 'gamma'\nset ylabel 'max gap on window'\n"
                                         "plot 'sweep_gamma.csv' using 1:(strcol(3) eq 'e' ? $2 : 1/0) with linespoints title 'e_k', \\\n"
                                         "     'sweep_gamma.csv' using 1:(strcol(3) eq 'd' ? $2 : 1/0) with linespoints title 'd_k'\n",
                                     written);
    } else if (f == "estimates.csv") {
      write_script_if_absent(
          d / "plot_estimates.gp",
          header("fitted constants", "estimates.png") +
              "set logscale x\nset xlabel 'gamma'\nset ylabel 'fitted C'\n"
              "names = 'upper_bound lower_bound_short phidot_upper phidot_lower trace_sandwich global_lower cusp_bullets'\n"
              "plot for [n in names] 'estimates.csv' using 2:(strcol(1) eq n ? $3 : 1/0) with linespoints title n\n",
          written);
    } else if (f == "sweep_eps.csv") {
      write_script_if_absent(d / "plot_sweep_eps.gp",
                                     header("regularized minus cusp", "sweep_eps.png") +
                                         "set logscale x\nset xlabel 'epsilon'\nset ylabel 'max gap'\n"
                                         "plot 'sweep_eps.csv' using 1:2 with linespoints title 'gap'\n",
                                     written);
    } else if (f == "mms_spatial.csv" || f == "mms_temporal.csv" || f == "truncation.csv" || f == "time_zero.csv") {
      const std::string stem = p.stem().string();
      const bool lin_x = f == "truncation.csv";
      write_script_if_absent(d / ("plot_" + stem + ".gp"),
                                     header(stem, stem + ".png") + (lin_x ? "set logscale y\n" : "set logscale xy\n") +
                                         "plot '" + f + "' using 1:2 with linespoints\n",
                                     written);
    } else if (f == "trajectory.csv") {
      write_script_if_absent(d / "plot_trajectory.gp",
                                     header("chi at selected times", "trajectory.png") +
                                         "set xlabel 'u'\nset ylabel 'chi'\n"
                                         "times = '0.001 0.01 0.1 0.5 1'\n"
                                         "plot for [s in times] 'trajectory.csv' using 2:(abs($1 - s) < 1e-9 ? $3 : 1/0) "
                                         "with lines title 't = '.s\n",
                                     written);
    }
  }
  return written;
}

}  // namespace detail

inline std::vector<fs::path> emit_plots(const fs::path& out_dir) {
  if (!fs::is_directory(out_dir)) throw std::runtime_error("emit_plots: " + out_dir.string() + " is not a directory");
  auto written = detail::plot_scripts(out_dir);
  if (written.empty()) throw std::runtime_error("emit_plots: no artifacts under " + out_dir.string());
  return written;
}

/// Runs one command into a fresh content-addressed directory.
inline ExecResult execute(const RunManifest& m, std::ostream& log) {
  const fs::path out = m.out_dir.empty() ? default_out_dir() : m.out_dir;
  fs::create_directories(out);
  if (m.command == Command::Report) {
    std::ostringstream ids;
    for (const auto& entry : fs::recursive_directory_iterator(out))
      if (entry.is_regular_file() && entry.path().filename() == "estimates.json")
        ids << fs::relative(entry.path(), out).generic_string() << '\n' << detail::read_text(entry.path());
    const fs::path dir = out / ("report-" + hash_hex(ids.str()));
    if (fs::exists(dir)) {
      log << "reusing " << dir.string() << "\n";
      return {0, dir, true};
    }
    const fs::path tmp = out / (".tmp-" + dir.filename().string());
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    detail::cmd_report(out, tmp);
    fs::rename(tmp, dir);
    log << "wrote " << dir.string() << "\n";
    return {0, dir, false};
  }

  const LabConfig cfg = m.config_path.empty() ? parse_config("") : load_config(m.config_path);
  const std::string canon = echo(cfg);
  const fs::path dir =
      out / (to_string(m.command) + "-" + hash_hex(canon + "command=" + to_string(m.command) + "\nseed=" + std::to_string(m.seed) + "\n"));
  if (fs::exists(dir)) {
    log << "reusing " << dir.string() << "\n";
    return {0, dir, true};
  }
  const fs::path tmp = out / (".tmp-" + dir.filename().string());
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_text(tmp / "config.txt", canon);
  int status = 0;
  try {
    switch (m.command) {
      case Command::Run: status = detail::cmd_run(cfg, m, tmp); break;
      case Command::Validate: status = detail::cmd_validate(cfg, m, tmp); break;
      case Command::SweepGamma: status = detail::cmd_sweep_gamma(cfg, m, tmp); break;
      case Command::SweepEps: status = detail::cmd_sweep_eps(cfg, m, tmp); break;
      case Command::Mms: status = detail::cmd_mms(cfg, m, tmp); break;
      case Command::Compare: status = detail::cmd_compare(cfg, m, tmp); break;
      case Command::Report: break;
    }
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  fs::rename(tmp, dir);
  detail::plot_scripts(dir);
  log << "wrote " << dir.string() << (status == 0 ? "\n" : " (a verdict failed)\n");
  return {status, dir, false};
}

}  // namespace conekrf
