#pragma once

// Flat "section.key = value" configuration with # comments.
//
//   geometry.divisor = one_point
//   flow.variant = conical
//   flow.gamma = 0.5
//   sweep.gammas = 0.5, 0.25, 0.125
//
// Unknown or repeated keys are errors carrying the key and line. echo() writes
// every key in a fixed order with 17 significant digits and reparses to an
// equal config; hash_hex() is FNV-1a of that text.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "conekrf/errors.hpp"
#include "conekrf/estimates.hpp"
#include "conekrf/flow.hpp"
#include "conekrf/geometry.hpp"
#include "conekrf/mesh.hpp"

namespace conekrf {

struct MeshSpec {
  double u_min = -20.0;
  double u_max = 12.0;
  std::size_t n = 513;
  double grading = 1.0;
  bool operator==(const MeshSpec&) const = default;
};

struct InitialSpec {
  std::string profile = "bump";  ///< bump | ring | random
  double amplitude = 0.25;       ///< bump: 4 A g
  double eta = 1e-9;             ///< ring: residual density fraction
  double center = 0.0;           ///< ring: location of the concentrated mass
  bool operator==(const InitialSpec&) const = default;
};

struct CompareSpec {
  double l = 2.0;
  double t0 = 0.05;
  std::size_t pairs = 20;
  std::size_t pair_nodes = 64;
  bool operator==(const CompareSpec&) const = default;
};

struct SweepSpec {
  std::vector<double> gammas{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  std::vector<int> j_list{4, 8, 16};
  std::vector<double> window{-5.0, 5.0};
  std::vector<double> times{0.1, 0.5, 0.9};
  std::vector<double> u_mins{-20.0, -30.0, -40.0};
  bool operator==(const SweepSpec&) const = default;
};

struct LabConfig {
  DivisorConfig divisor{};
  Variant variant = Variant::Conical;
  ConeParams params{};
  int mollify_j = 4;
  double newton_tol = 1e-11;
  std::size_t newton_max_iter = 50;
  double positivity_floor = 0.0;
  double dt_floor = 1e-12;
  std::vector<DtSegment> dt_schedule;  ///< empty: default_dt_schedule(horizon_T)
  MeshSpec mesh{};
  InitialSpec initial{};
  double sigma = 0.05;
  double delta = 0.1;
  CompareSpec compare{};
  SweepSpec sweep{};

  bool operator==(const LabConfig& o) const;

  ModelGeometry geometry() const { return ModelGeometry(divisor); }
  Mesh build_mesh_from_spec() const { return build_mesh(mesh.u_min, mesh.u_max, mesh.n, mesh.grading); }
  EstimateOptions estimate_options() const { return {sigma, delta, 1}; }

  FlowConfig flow() const {
    FlowConfig cfg;
    cfg.geom = geometry();
    cfg.params = params;
    cfg.mesh = build_mesh_from_spec();
    cfg.variant = variant;
    cfg.mollify_j = mollify_j;
    cfg.dt_schedule = dt_schedule;
    cfg.newton_tol = newton_tol;
    cfg.newton_max_iter = newton_max_iter;
    cfg.positivity_floor = positivity_floor;
    cfg.dt_floor = dt_floor;
    return cfg;
  }
};

inline bool LabConfig::operator==(const LabConfig& o) const {
  return divisor == o.divisor && variant == o.variant && params == o.params && mollify_j == o.mollify_j &&
         newton_tol == o.newton_tol && newton_max_iter == o.newton_max_iter &&
         positivity_floor == o.positivity_floor && dt_floor == o.dt_floor && dt_schedule == o.dt_schedule &&
         mesh == o.mesh && initial == o.initial && sigma == o.sigma && delta == o.delta && compare == o.compare &&
         sweep == o.sweep;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string_view key;
  std::string_view value;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(std::string(key) + ": " + what, std::string(key), static_cast<int>(line));
  }

  double number() const {
    double v = 0.0;
    const auto* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || p != end) fail("expected a number, got '" + std::string(value) + "'");
    return v;
  }

  long long integer() const {
    long long v = 0;
    const auto* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || p != end) fail("expected an integer, got '" + std::string(value) + "'");
    return v;
  }

  std::size_t count() const {
    const long long v = integer();
    if (v < 0) fail("must be nonnegative");
    return static_cast<std::size_t>(v);
  }

  template <class T, class Parse>
  std::vector<T> list(Parse parse) const {
    std::vector<T> out;
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      Field item{key, trim(rest.substr(0, comma)), line};
      if (item.value.empty()) fail("empty list entry");
      out.push_back(parse(item));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  std::vector<double> numbers() const {
    return list<double>([](const Field& f) { return f.number(); });
  }
};

inline Variant parse_variant(const Field& f) {
  if (f.value == "conical") return Variant::Conical;
  if (f.value == "regularized") return Variant::Regularized;
  if (f.value == "cusp") return Variant::Cusp;
  if (f.value == "smoke") return Variant::Smoke;
  f.fail("unknown variant '" + std::string(f.value) + "' (conical, regularized, cusp, smoke)");
}

inline std::vector<DtSegment> parse_schedule(const Field& f) {
  if (f.value == "default") return {};
  return f.list<DtSegment>([](const Field& item) {
    const auto colon = item.value.find(':');
    if (colon == std::string_view::npos) item.fail("schedule entries are t_end:dt");
    const Field a{item.key, trim(item.value.substr(0, colon)), item.line};
    const Field b{item.key, trim(item.value.substr(colon + 1)), item.line};
    return DtSegment{a.number(), b.number()};
  });
}

using Setter = std::function<void(LabConfig&, const Field&)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"geometry.divisor",
       [](LabConfig& c, const Field& f) {
         if (f.value == "one_point") c.divisor.kind = DivisorKind::OnePoint;
         else if (f.value == "two_point") c.divisor.kind = DivisorKind::TwoPoint;
         else f.fail("unknown divisor '" + std::string(f.value) + "' (one_point, two_point)");
       }},
      {"geometry.twist_c", [](LabConfig& c, const Field& f) { c.divisor.twist_c = f.number(); }},
      {"geometry.rescale_lambda", [](LabConfig& c, const Field& f) { c.divisor.rescale_lambda = f.number(); }},
      {"geometry.delta_cap", [](LabConfig& c, const Field& f) { c.divisor.delta_cap = f.number(); }},
      {"flow.variant", [](LabConfig& c, const Field& f) { c.variant = parse_variant(f); }},
      {"flow.gamma", [](LabConfig& c, const Field& f) { c.params.gamma = f.number(); }},
      {"flow.epsilon", [](LabConfig& c, const Field& f) { c.params.epsilon = f.number(); }},
      {"flow.horizon_T", [](LabConfig& c, const Field& f) { c.params.horizon_T = f.number(); }},
      {"flow.mollify_j", [](LabConfig& c, const Field& f) { c.mollify_j = static_cast<int>(f.integer()); }},
      {"flow.newton_tol", [](LabConfig& c, const Field& f) { c.newton_tol = f.number(); }},
      {"flow.newton_max_iter", [](LabConfig& c, const Field& f) { c.newton_max_iter = f.count(); }},
      {"flow.positivity_floor", [](LabConfig& c, const Field& f) { c.positivity_floor = f.number(); }},
      {"flow.dt_floor", [](LabConfig& c, const Field& f) { c.dt_floor = f.number(); }},
      {"flow.dt_schedule", [](LabConfig& c, const Field& f) { c.dt_schedule = parse_schedule(f); }},
      {"mesh.u_min", [](LabConfig& c, const Field& f) { c.mesh.u_min = f.number(); }},
      {"mesh.u_max", [](LabConfig& c, const Field& f) { c.mesh.u_max = f.number(); }},
      {"mesh.n", [](LabConfig& c, const Field& f) { c.mesh.n = f.count(); }},
      {"mesh.grading", [](LabConfig& c, const Field& f) { c.mesh.grading = f.number(); }},
      {"initial.profile",
       [](LabConfig& c, const Field& f) {
         if (f.value != "bump" && f.value != "ring" && f.value != "random")
           f.fail("unknown profile '" + std::string(f.value) + "' (bump, ring, random)");
         c.initial.profile = std::string(f.value);
       }},
      {"initial.amplitude", [](LabConfig& c, const Field& f) { c.initial.amplitude = f.number(); }},
      {"initial.eta", [](LabConfig& c, const Field& f) { c.initial.eta = f.number(); }},
      {"initial.center", [](LabConfig& c, const Field& f) { c.initial.center = f.number(); }},
      {"estimates.sigma", [](LabConfig& c, const Field& f) { c.sigma = f.number(); }},
      {"estimates.delta", [](LabConfig& c, const Field& f) { c.delta = f.number(); }},
      {"compare.l", [](LabConfig& c, const Field& f) { c.compare.l = f.number(); }},
      {"compare.t0", [](LabConfig& c, const Field& f) { c.compare.t0 = f.number(); }},
      {"compare.pairs", [](LabConfig& c, const Field& f) { c.compare.pairs = f.count(); }},
      {"compare.pair_nodes", [](LabConfig& c, const Field& f) { c.compare.pair_nodes = f.count(); }},
      {"sweep.gammas", [](LabConfig& c, const Field& f) { c.sweep.gammas = f.numbers(); }},
      {"sweep.epsilons", [](LabConfig& c, const Field& f) { c.sweep.epsilons = f.numbers(); }},
      {"sweep.j_list",
       [](LabConfig& c, const Field& f) {
         c.sweep.j_list = f.list<int>([](const Field& x) { return static_cast<int>(x.integer()); });
       }},
      {"sweep.window", [](LabConfig& c, const Field& f) { c.sweep.window = f.numbers(); }},
      {"sweep.times", [](LabConfig& c, const Field& f) { c.sweep.times = f.numbers(); }},
      {"sweep.u_mins", [](LabConfig& c, const Field& f) { c.sweep.u_mins = f.numbers(); }},
  };
  return table;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt17(v[k]);
  return s;
}

}  // namespace detail

/// Checks every invariant the run will rely on; throws ConfigError naming the key.
inline void validate(const LabConfig& c) {
  c.divisor.validate();
  try {
    (void)c.build_mesh_from_spec();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "mesh");
  }
  c.flow().validate();
  for (const auto& seg : c.dt_schedule)
    if (!(seg.t_end > 0.0 && seg.dt > 0.0)) throw ConfigError("schedule entries need t_end > 0 and dt > 0", "flow.dt_schedule");
  if (!(c.sigma > 0.0)) throw ConfigError("sigma must be positive", "estimates.sigma");
  if (!(c.delta > 0.0)) throw ConfigError("delta must be positive", "estimates.delta");
  if (c.initial.profile == "bump" && !(c.initial.amplitude >= 0.0 && c.initial.amplitude <= 0.5))
    throw ConfigError("bump amplitude must lie in [0, 1/2] to stay omega-psh", "initial.amplitude");
  if (c.initial.profile == "ring" && !(c.initial.eta > 0.0 && c.initial.eta <= 1.0))
    throw ConfigError("eta must lie in (0, 1]", "initial.eta");
  if (!(c.compare.t0 > 0.0)) throw ConfigError("t0 must be positive", "compare.t0");
  if (!(c.compare.l > 0.5)) throw ConfigError("l must exceed 1/2", "compare.l");
  if (c.compare.pair_nodes < 8) throw ConfigError("pair_nodes must be >= 8", "compare.pair_nodes");
  if (c.sweep.window.size() != 2 || !(c.sweep.window[0] < c.sweep.window[1]))
    throw ConfigError("window must be 'lo, hi' with lo < hi", "sweep.window");
  for (double g : c.sweep.gammas)
    if (!(g > 0.0 && g <= 1.0)) throw ConfigError("gammas must lie in (0, 1]", "sweep.gammas");
  for (double e : c.sweep.epsilons)
    if (!(e > 0.0)) throw ConfigError("epsilons must be positive", "sweep.epsilons");
  for (int j : c.sweep.j_list)
    if (j < 1) throw ConfigError("j values must be >= 1", "sweep.j_list");
  for (double t : c.sweep.times)
    if (!(t > 0.0)) throw ConfigError("times must be positive", "sweep.times");
}

inline LabConfig parse_config(std::string_view text) {
  LabConfig cfg;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected 'key = value', got '" + std::string(line) + "'", "", static_cast<int>(line_no));
    const detail::Field f{detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), line_no};
    const auto it = detail::setters().find(f.key);
    if (it == detail::setters().end()) f.fail("unknown key");
    if (const auto prev = seen.find(f.key); prev != seen.end())
      f.fail("repeated key (first set on line " + std::to_string(prev->second) + ")");
    seen.emplace(std::string(f.key), line_no);
    if (f.value.empty()) f.fail("missing value");
    it->second(cfg, f);
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    const auto at = seen.find(e.key());
    if (at == seen.end() || e.line() != 0) throw;
    throw ConfigError(e.what(), e.key(), static_cast<int>(at->second));
  }
  return cfg;
}

inline LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Fully defaulted canonical text; T_max is echoed as a comment.
inline std::string echo(const LabConfig& c) {
  using detail::fmt17;
  using detail::join;
  std::ostringstream o;
  std::string schedule = "default";
  if (!c.dt_schedule.empty()) {
    schedule.clear();
    for (std::size_t k = 0; k < c.dt_schedule.size(); ++k)
      schedule += (k ? ", " : "") + fmt17(c.dt_schedule[k].t_end) + ":" + fmt17(c.dt_schedule[k].dt);
  }
  std::string js;
  for (std::size_t k = 0; k < c.sweep.j_list.size(); ++k) js += (k ? ", " : "") + std::to_string(c.sweep.j_list[k]);
  const double tm = tmax(c.geometry(), c.params.gamma);
  o << "# T_max = " << (std::isfinite(tm) ? fmt17(tm) : std::string("inf")) << "\n"
    << "geometry.divisor = " << to_string(c.divisor.kind) << "\n"
    << "geometry.twist_c = " << fmt17(c.divisor.twist_c) << "\n"
    << "geometry.rescale_lambda = " << fmt17(c.divisor.rescale_lambda) << "\n"
    << "geometry.delta_cap = " << fmt17(c.divisor.delta_cap) << "\n"
    << "flow.variant = " << to_string(c.variant) << "\n"
    << "flow.gamma = " << fmt17(c.params.gamma) << "\n"
    << "flow.epsilon = " << fmt17(c.params.epsilon) << "\n"
    << "flow.horizon_T = " << fmt17(c.params.horizon_T) << "\n"
    << "flow.mollify_j = " << c.mollify_j << "\n"
    << "flow.newton_tol = " << fmt17(c.newton_tol) << "\n"
    << "flow.newton_max_iter = " << c.newton_max_iter << "\n"
    << "flow.positivity_floor = " << fmt17(c.positivity_floor) << "\n"
    << "flow.dt_floor = " << fmt17(c.dt_floor) << "\n"
    << "flow.dt_schedule = " << schedule << "\n"
    << "mesh.u_min = " << fmt17(c.mesh.u_min) << "\n"
    << "mesh.u_max = " << fmt17(c.mesh.u_max) << "\n"
    << "mesh.n = " << c.mesh.n << "\n"
    << "mesh.grading = " << fmt17(c.mesh.grading) << "\n"
    << "initial.profile = " << c.initial.profile << "\n"
    << "initial.amplitude = " << fmt17(c.initial.amplitude) << "\n"
    << "initial.eta = " << fmt17(c.initial.eta) << "\n"
    << "initial.center = " << fmt17(c.initial.center) << "\n"
    << "estimates.sigma = " << fmt17(c.sigma) << "\n"
    << "estimates.delta = " << fmt17(c.delta) << "\n"
    << "compare.l = " << fmt17(c.compare.l) << "\n"
    << "compare.t0 = " << fmt17(c.compare.t0) << "\n"
    << "compare.pairs = " << c.compare.pairs << "\n"
    << "compare.pair_nodes = " << c.compare.pair_nodes << "\n"
    << "sweep.gammas = " << join(c.sweep.gammas) << "\n"
    << "sweep.epsilons = " << join(c.sweep.epsilons) << "\n"
    << "sweep.j_list = " << js << "\n"
    << "sweep.window = " << join(c.sweep.window) << "\n"
    << "sweep.times = " << join(c.sweep.times) << "\n"
    << "sweep.u_mins = " << join(c.sweep.u_mins) << "\n";
  return o.str();
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hash_hex(std::string_view s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

}  // namespace conekrf
