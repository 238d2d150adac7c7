#pragma once

// CSV and JSON serialization. CSV floats use %.17g; JSON goes through
// nlohmann::json, which writes the shortest round-trip form of each double.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "conekrf/compare.hpp"
#include "conekrf/estimates.hpp"
#include "conekrf/flow.hpp"
#include "conekrf/sweeps.hpp"

namespace conekrf {

using json = nlohmann::json;

namespace detail {

inline void put(std::ostream& o, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  o << buf;
}

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json number_map(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = number(v);
  return j;
}

}  // namespace detail

/// Columns t,u,chi,phidot,metric_density; one row per (state, node).
inline void write_trajectory_csv(std::ostream& o, const Trajectory& traj) {
  o << "t,u,chi,phidot,metric_density\n";
  for (const FlowState& st : traj.states)
    for (std::size_t i = 0; i < st.chi.size(); ++i) {
      detail::put(o, st.t);
      o << ',';
      detail::put(o, traj.mesh[i]);
      o << ',';
      detail::put(o, st.chi[i]);
      o << ',';
      detail::put(o, st.phidot[i]);
      o << ',';
      detail::put(o, st.metric_density[i]);
      o << '\n';
    }
}

inline void write_steps_csv(std::ostream& o, const Trajectory& traj) {
  o << "t,dt,newton_iterations,halvings\n";
  for (const StepRecord& s : traj.steps) {
    detail::put(o, s.t);
    o << ',';
    detail::put(o, s.dt);
    o << ',' << s.newton_iterations << ',' << s.halvings << '\n';
  }
}

inline void write_violations_csv(std::ostream& o, const std::vector<ViolationRow>& rows) {
  o << "t,u,lhs,rhs\n";
  for (const auto& r : rows) {
    detail::put(o, r.t);
    o << ',';
    detail::put(o, r.u);
    o << ',';
    detail::put(o, r.lhs);
    o << ',';
    detail::put(o, r.rhs);
    o << '\n';
  }
}

/// Two columns named `x` and `y`, plus any extra series appended as rows
/// tagged by name in a third column.
inline void write_sweep_csv(std::ostream& o, const SweepResult& r, const std::string& x, const std::string& y) {
  o << x << ',' << y << ",series\n";
  auto rows = [&](const std::vector<SweepPoint>& pts, const std::string& name) {
    for (const auto& p : pts) {
      detail::put(o, p.parameter);
      o << ',';
      detail::put(o, p.value);
      o << ',' << name << '\n';
    }
  };
  rows(r.points, y);
  for (const auto& [name, pts] : r.series) rows(pts, name);
}

inline json to_json(const EstimateReport& r) {
  return {{"name", r.name},
          {"fitted_C", detail::number(r.fitted_C)},
          {"gamma", r.gamma},
          {"aux", detail::number_map(r.aux)},
          {"pass", r.pass},
          {"notes", r.notes}};
}

inline json to_json(const std::vector<SweepPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({detail::number(p.parameter), detail::number(p.value)});
  return a;
}

inline json to_json(const SweepResult& r) {
  json j = {{"axis", to_string(r.axis)},
            {"points", to_json(r.points)},
            {"pass", r.pass},
            {"verdict", r.verdict},
            {"aux", detail::number_map(r.aux)},
            {"violations_dumped", r.dump.size()}};
  j["fit"] = r.fit ? json{{"rate", detail::number(r.fit->rate)}, {"constant", detail::number(r.fit->constant)}}
                   : json(nullptr);
  json s = json::object();
  for (const auto& [name, pts] : r.series) s[name] = to_json(pts);
  j["series"] = s;
  return j;
}

inline json to_json(const CheckReport& r) {
  return {{"checked", r.checked},
          {"violations", r.violations},
          {"max_defect", detail::number(r.max_defect)},
          {"pass", r.pass}};
}

inline json to_json(const MmsTable& t) {
  json levels = json::array();
  for (const auto& l : t.levels) levels.push_back({{"dt", l.dt}, {"n", l.n}, {"h", l.h}, {"error", l.error}});
  json dto = json::array(), ho = json::array();
  for (double v : t.dt_orders) dto.push_back(detail::number(v));
  for (double v : t.h_orders) ho.push_back(detail::number(v));
  return {{"levels", levels}, {"dt_orders", dto}, {"h_orders", ho}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace conekrf
