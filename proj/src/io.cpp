#include "lime/io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "lime/error.hpp"
#include "lime/format.hpp"

namespace lime {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Solver: return "solver";
    case ErrorCategory::Invariant: return "invariant";
  }
  return "unknown";
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out;
  for (std::size_t k = 0; k < problems.size(); ++k) {
    if (k) out += "; ";
    out += problems[k];
  }
  return out.empty() ? std::string("invalid configuration") : out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(ErrorCategory::Config, join_problems(problems)), problems_(std::move(problems)) {}

std::optional<ScenarioConfig> builtin_preset(std::string_view name) {
  if (name == "fill_dry_default" || name == "fill-dry") return build_fill_dry_scenario(kFillDryDefaultTime);
  if (name == "stationary") return build_stationary_scenario();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return {};
  return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

class Reader {
 public:
  std::vector<std::string> errors;

  bool map(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) {
      errors.push_back(path + ": expected a mapping" + where(n));
      return false;
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (ok.count(key) == 0) errors.push_back(join(path, key) + ": unknown key" + where(kv.first));
    }
    return true;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  std::optional<double> number(const YAML::Node& n, const std::string& path) {
    if (n.IsScalar()) {
      if (auto v = parse_number(n.Scalar())) return *v;
    }
    errors.push_back(path + ": expected a number" + where(n));
    return std::nullopt;
  }

  std::optional<long long> integer(const YAML::Node& n, const std::string& path, long long lo) {
    if (auto v = n.IsScalar() ? parse_number(n.Scalar()) : std::nullopt) {
      if (*v == std::floor(*v) && *v >= static_cast<double>(lo) && *v < 9.2e18) return static_cast<long long>(*v);
    }
    errors.push_back(path + ": expected an integer >= " + std::to_string(lo) + where(n));
    return std::nullopt;
  }

  std::optional<bool> boolean(const YAML::Node& n, const std::string& path) {
    if (n.IsScalar()) {
      const auto& s = n.Scalar();
      if (s == "true") return true;
      if (s == "false") return false;
    }
    errors.push_back(path + ": expected true or false" + where(n));
    return std::nullopt;
  }

  std::optional<std::string> string(const YAML::Node& n, const std::string& path) {
    if (n.IsScalar()) return n.Scalar();
    errors.push_back(path + ": expected a string" + where(n));
    return std::nullopt;
  }

  std::optional<std::vector<double>> list(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) {
      errors.push_back(path + ": expected a list of numbers" + where(n));
      return std::nullopt;
    }
    std::vector<double> out;
    bool good = true;
    for (std::size_t k = 0; k < n.size(); ++k) {
      auto v = number(n[k], path + "[" + std::to_string(k) + "]");
      if (v) out.push_back(*v); else good = false;
    }
    if (!good) return std::nullopt;
    return out;
  }

  /// A scalar or a list.
  std::optional<std::vector<double>> values(const YAML::Node& n, const std::string& path) {
    if (n.IsScalar()) {
      if (auto v = number(n, path)) return std::vector<double>{*v};
      return std::nullopt;
    }
    if (n.IsSequence()) return list(n, path);
    errors.push_back(path + ": expected a number or a list of numbers" + where(n));
    return std::nullopt;
  }

  template <class T, class F>
  void set(const YAML::Node& parent, const char* key, const std::string& path, T& target, F read) {
    const auto n = parent[key];
    if (!n) return;
    if (auto v = (this->*read)(n, join(path, key))) target = static_cast<T>(*v);
  }
};

struct Required {
  std::vector<std::string> missing;
  bool have_base = false;
  bool check(const YAML::Node& parent, const char* key, const std::string& path) {
    if (parent && parent.IsMap() && parent[key]) return true;
    if (!have_base) missing.push_back(Reader::join(path, key) + ": required");
    return false;
  }
};

void read_schedule(Reader& r, const YAML::Node& n, const std::string& path, PiecewiseConstant& out) {
  if (n.IsScalar()) {
    if (auto v = r.number(n, path)) out = PiecewiseConstant::constant(*v);
    return;
  }
  if (!r.map(n, path, {"times", "values"})) return;
  PiecewiseConstant f;
  if (n["times"]) {
    if (auto t = r.list(n["times"], path + ".times")) f.switch_times = *t;
  }
  if (!n["values"]) {
    r.errors.push_back(path + ".values: required");
    return;
  }
  if (auto v = r.list(n["values"], path + ".values")) f.values = *v;
  out = std::move(f);
}

void read_boundary_point(Reader& r, Required& req, const YAML::Node& n, const std::string& path,
                         BoundaryPoint& bp) {
  for (const char* key : {"alpha", "beta", "saturation", "concentration"}) req.check(n, key, path);
  if (!n) return;
  if (!r.map(n, path, {"alpha", "beta", "saturation", "concentration"})) return;
  r.set(n, "alpha", path, bp.alpha, &Reader::number);
  r.set(n, "beta", path, bp.beta, &Reader::number);
  if (n["saturation"]) read_schedule(r, n["saturation"], path + ".saturation", bp.saturation);
  if (n["concentration"]) read_schedule(r, n["concentration"], path + ".concentration", bp.concentration);
}

std::optional<ScenarioConfig> read_preset(Reader& r, const YAML::Node& n) {
  if (n.IsScalar()) {
    auto cfg = builtin_preset(n.Scalar());
    if (!cfg) r.errors.push_back("preset: unknown preset '" + n.Scalar() + "'" + where(n));
    return cfg;
  }
  if (!r.map(n, "preset", {"name", "final_time", "cells", "grading", "steps"})) return std::nullopt;
  if (!n["name"]) {
    r.errors.push_back("preset.name: required");
    return std::nullopt;
  }
  const auto name = r.string(n["name"], "preset.name");
  if (!name) return std::nullopt;
  double T = kFillDryDefaultTime;
  FillDryOptions opt;
  long long cells = -1, steps = -1;
  r.set(n, "final_time", "preset", T, &Reader::number);
  r.set(n, "grading", "preset", opt.grading, &Reader::number);
  if (n["cells"]) cells = r.integer(n["cells"], "preset.cells", 1).value_or(-1);
  if (n["steps"]) steps = r.integer(n["steps"], "preset.steps", 0).value_or(-1);
  if (*name == "fill_dry_default" || *name == "fill-dry") {
    if (cells > 0) opt.cells = static_cast<std::size_t>(cells);
    if (steps >= 0) opt.steps = static_cast<std::size_t>(steps);
    return build_fill_dry_scenario(T, opt);
  }
  if (*name == "stationary") {
    if (n["grading"]) r.errors.push_back("preset.grading: not used by the stationary preset");
    return build_stationary_scenario(n["final_time"] ? T : 1.0, cells > 0 ? static_cast<std::size_t>(cells) : 16,
                                     steps > 0 ? static_cast<std::size_t>(steps) : 256);
  }
  r.errors.push_back("preset.name: unknown preset '" + *name + "'" + where(n["name"]));
  return std::nullopt;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);

  Reader r;
  Required req;
  ScenarioConfig cfg;
  if (!r.map(root, "", {"name", "preset", "time", "grid", "physics", "wetting", "permeability", "kernel", "solver",
                        "boundary", "initial"})) {
    throw ConfigError(r.errors);
  }
  if (root["preset"]) {
    if (auto base = read_preset(r, root["preset"])) {
      cfg = std::move(*base);
      req.have_base = true;
    } else {
      throw ConfigError(r.errors);
    }
  }
  if (root["name"]) {
    if (auto s = r.string(root["name"], "name")) cfg.name = *s;
  }

  bool snapshots_given = false;
  {
    const auto n = root["time"];
    req.check(n, "final", "time");
    req.check(n, "steps", "time");
    if (n && r.map(n, "time", {"final", "steps", "snapshots", "equilibrium_tol"})) {
      r.set(n, "final", "time", cfg.final_time, &Reader::number);
      if (n["steps"]) {
        if (auto v = r.integer(n["steps"], "time.steps", 1)) cfg.solver.steps = static_cast<std::size_t>(*v);
      }
      if (n["snapshots"]) {
        snapshots_given = true;
        if (auto v = r.list(n["snapshots"], "time.snapshots")) cfg.snapshot_times = *v;
      }
      r.set(n, "equilibrium_tol", "time", cfg.equilibrium_tol, &Reader::number);
    }
  }
  if (!snapshots_given && !req.have_base) cfg.snapshot_times = {cfg.final_time};

  {
    const auto n = root["grid"];
    req.check(n, "cells", "grid");
    req.check(n, "length", "grid");
    if (!req.have_base) cfg.grid.ratio = 1.0;
    if (n && r.map(n, "grid", {"cells", "length", "ratio"})) {
      if (n["cells"]) {
        if (auto v = r.integer(n["cells"], "grid.cells", 1)) cfg.grid.cells = static_cast<std::size_t>(*v);
      }
      r.set(n, "length", "grid", cfg.grid.length, &Reader::number);
      r.set(n, "ratio", "grid", cfg.grid.ratio, &Reader::number);
    }
  }

  bool truncation_given = false;
  {
    const auto n = root["physics"];
    for (const char* key : {"gamma", "kappa", "s_flat", "h_sharp"}) req.check(n, key, "physics");
    if (n && r.map(n, "physics", {"rho_w", "rho_h", "m_w", "m_h", "m_p", "m_g", "gamma", "kappa", "s_flat",
                                  "h_sharp", "truncation"})) {
      auto& p = cfg.physics;
      const std::pair<const char*, double*> fields[] = {
          {"rho_w", &p.rho_w}, {"rho_h", &p.rho_h}, {"m_w", &p.m_w},         {"m_h", &p.m_h},
          {"m_p", &p.m_p},     {"m_g", &p.m_g},     {"gamma", &p.gamma},     {"kappa", &p.kappa},
          {"s_flat", &p.s_flat}, {"h_sharp", &p.h_sharp}, {"truncation", &p.truncation}};
      for (const auto& [key, dst] : fields) r.set(n, key, "physics", *dst, &Reader::number);
      truncation_given = static_cast<bool>(n["truncation"]);
    }
  }
  if (!truncation_given) cfg.physics.truncation = default_truncation_level(cfg.physics.h_sharp);

  if (const auto n = root["wetting"]) {
    if (r.map(n, "wetting", {"kind", "offset", "slope", "s", "p"})) {
      const auto kind = n["kind"] ? r.string(n["kind"], "wetting.kind") : std::optional<std::string>("linear");
      try {
        if (kind == "linear") {
          double offset = 0.0, slope = 1.0;
          r.set(n, "offset", "wetting", offset, &Reader::number);
          r.set(n, "slope", "wetting", slope, &Reader::number);
          if (n["s"] || n["p"]) r.errors.push_back("wetting: s/p tables only apply to kind tabulated");
          cfg.wetting = WettingCurve::linear(offset, slope);
        } else if (kind == "tabulated") {
          std::vector<double> s, p;
          if (!n["s"] || !n["p"]) {
            r.errors.push_back("wetting: tabulated curve needs both s and p lists");
          } else {
            auto sv = r.list(n["s"], "wetting.s");
            auto pv = r.list(n["p"], "wetting.p");
            if (sv && pv) cfg.wetting = WettingCurve::tabulated(*sv, *pv);
          }
        } else if (kind) {
          r.errors.push_back("wetting.kind: expected linear or tabulated" + where(n["kind"]));
        }
      } catch (const ConfigError& e) {
        for (const auto& msg : e.problems()) r.errors.push_back("wetting: " + msg);
      }
    }
  }

  {
    const auto n = root["permeability"];
    if (!n && !req.have_base) req.missing.push_back("permeability: required");
    if (n && r.map(n, "permeability", {"kind", "k0", "rate", "floor"})) {
      const auto kind = n["kind"] ? r.string(n["kind"], "permeability.kind") : std::optional<std::string>("constant");
      double k0 = 2e-4, rate = 1.0, floor = 0.0;
      r.set(n, "k0", "permeability", k0, &Reader::number);
      try {
        if (kind == "constant") {
          if (n["rate"] || n["floor"]) r.errors.push_back("permeability: rate/floor only apply to kind exp_decay");
          cfg.permeability = PermeabilityLaw::constant(k0);
        } else if (kind == "exp_decay") {
          for (const char* key : {"k0", "rate", "floor"}) {
            if (!n[key]) r.errors.push_back(std::string("permeability.") + key + ": required for kind exp_decay");
          }
          r.set(n, "rate", "permeability", rate, &Reader::number);
          r.set(n, "floor", "permeability", floor, &Reader::number);
          cfg.permeability = PermeabilityLaw::exp_decay(k0, rate, floor);
        } else if (kind) {
          r.errors.push_back("permeability.kind: expected constant or exp_decay" + where(n["kind"]));
        }
      } catch (const ConfigError& e) {
        for (const auto& msg : e.problems()) r.errors.push_back("permeability: " + msg);
      }
    }
  }

  {
    const auto n = root["kernel"];
    auto profile = cfg.kernel.profile();
    double radius = req.have_base ? cfg.kernel.radius() : 0.05 * cfg.grid.length;
    if (n && r.map(n, "kernel", {"profile", "radius"})) {
      if (n["profile"]) {
        if (auto s = r.string(n["profile"], "kernel.profile")) {
          if (*s == "triangular") profile = KernelProfile::Triangular;
          else if (*s == "bump") profile = KernelProfile::Bump;
          else r.errors.push_back("kernel.profile: expected triangular or bump" + where(n["profile"]));
        }
      }
      r.set(n, "radius", "kernel", radius, &Reader::number);
    }
    try {
      cfg.kernel = MollifierKernel(profile, radius);
    } catch (const ConfigError& e) {
      for (const auto& msg : e.problems()) r.errors.push_back("kernel.radius: " + msg);
    }
  }

  if (const auto n = root["solver"]) {
    if (r.map(n, "solver", {"newton_tol", "newton_max_iter", "picard_tol", "picard_max_iter",
                            "enforce_step_restriction", "degeneracy_floor"})) {
      auto& s = cfg.solver;
      r.set(n, "newton_tol", "solver", s.newton_tol, &Reader::number);
      r.set(n, "picard_tol", "solver", s.picard_tol, &Reader::number);
      r.set(n, "degeneracy_floor", "solver", s.degeneracy_floor, &Reader::number);
      if (n["newton_max_iter"]) {
        if (auto v = r.integer(n["newton_max_iter"], "solver.newton_max_iter", 1)) s.newton_max_iter = static_cast<int>(*v);
      }
      if (n["picard_max_iter"]) {
        if (auto v = r.integer(n["picard_max_iter"], "solver.picard_max_iter", 1)) s.picard_max_iter = static_cast<int>(*v);
      }
      r.set(n, "enforce_step_restriction", "solver", s.enforce_step_restriction, &Reader::boolean);
    }
  }

  {
    const auto n = root["boundary"];
    req.check(n, "left", "boundary");
    req.check(n, "right", "boundary");
    if (n && r.map(n, "boundary", {"left", "right"})) {
      if (n["left"]) read_boundary_point(r, req, n["left"], "boundary.left", cfg.boundary.left);
      if (n["right"]) read_boundary_point(r, req, n["right"], "boundary.right", cfg.boundary.right);
    }
  }

  {
    const auto n = root["initial"];
    req.check(n, "saturation", "initial");
    req.check(n, "concentration", "initial");
    if (n && r.map(n, "initial", {"saturation", "concentration"})) {
      if (n["saturation"]) {
        if (auto v = r.values(n["saturation"], "initial.saturation")) cfg.initial_saturation.values = *v;
      }
      if (n["concentration"]) {
        if (auto v = r.values(n["concentration"], "initial.concentration")) cfg.initial_concentration.values = *v;
      }
    }
  }

  // Missing sections leave defaults that would only add noise to the range checks.
  std::vector<std::string> problems = std::move(req.missing);
  const bool complete = problems.empty();
  problems.insert(problems.end(), r.errors.begin(), r.errors.end());
  if (complete) {
    auto validation = validate_scenario(cfg);
    problems.insert(problems.end(), validation.errors.begin(), validation.errors.end());
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// serialization

namespace {

void emit_list(YAML::Emitter& out, const std::vector<double>& values) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double v : values) out << format_shortest(v);
  out << YAML::EndSeq;
}

void emit_schedule(YAML::Emitter& out, const char* key, const PiecewiseConstant& f) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "times" << YAML::Value;
  emit_list(out, f.switch_times);
  out << YAML::Key << "values" << YAML::Value;
  emit_list(out, f.values);
  out << YAML::EndMap;
}

void emit_number(YAML::Emitter& out, const char* key, double v) {
  out << YAML::Key << key << YAML::Value << format_shortest(v);
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << cfg.name;

  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  emit_number(out, "final", cfg.final_time);
  out << YAML::Key << "steps" << YAML::Value << cfg.solver.steps;
  out << YAML::Key << "snapshots" << YAML::Value;
  emit_list(out, cfg.snapshot_times);
  emit_number(out, "equilibrium_tol", cfg.equilibrium_tol);
  out << YAML::EndMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "cells" << YAML::Value << cfg.grid.cells;
  emit_number(out, "length", cfg.grid.length);
  emit_number(out, "ratio", cfg.grid.ratio);
  out << YAML::EndMap;

  const auto& p = cfg.physics;
  out << YAML::Key << "physics" << YAML::Value << YAML::BeginMap;
  emit_number(out, "rho_w", p.rho_w);
  emit_number(out, "rho_h", p.rho_h);
  emit_number(out, "m_w", p.m_w);
  emit_number(out, "m_h", p.m_h);
  emit_number(out, "m_p", p.m_p);
  emit_number(out, "m_g", p.m_g);
  emit_number(out, "gamma", p.gamma);
  emit_number(out, "kappa", p.kappa);
  emit_number(out, "s_flat", p.s_flat);
  emit_number(out, "h_sharp", p.h_sharp);
  emit_number(out, "truncation", p.truncation);
  out << YAML::EndMap;

  out << YAML::Key << "wetting" << YAML::Value << YAML::BeginMap;
  if (const auto* lin = std::get_if<LinearWetting>(&cfg.wetting.form())) {
    out << YAML::Key << "kind" << YAML::Value << "linear";
    emit_number(out, "offset", lin->offset);
    emit_number(out, "slope", lin->slope);
  } else {
    const auto& tab = std::get<TabulatedWetting>(cfg.wetting.form());
    out << YAML::Key << "kind" << YAML::Value << "tabulated";
    out << YAML::Key << "s" << YAML::Value;
    emit_list(out, tab.saturation);
    out << YAML::Key << "p" << YAML::Value;
    emit_list(out, tab.pressure);
  }
  out << YAML::EndMap;

  out << YAML::Key << "permeability" << YAML::Value << YAML::BeginMap;
  if (const auto* c = std::get_if<ConstantPermeability>(&cfg.permeability.form())) {
    out << YAML::Key << "kind" << YAML::Value << "constant";
    emit_number(out, "k0", c->k0);
  } else {
    const auto& e = std::get<ExpDecayPermeability>(cfg.permeability.form());
    out << YAML::Key << "kind" << YAML::Value << "exp_decay";
    emit_number(out, "k0", e.k0);
    emit_number(out, "rate", e.rate);
    emit_number(out, "floor", e.floor);
  }
  out << YAML::EndMap;

  out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "profile" << YAML::Value
      << (cfg.kernel.profile() == KernelProfile::Triangular ? "triangular" : "bump");
  emit_number(out, "radius", cfg.kernel.radius());
  out << YAML::EndMap;

  const auto& s = cfg.solver;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  emit_number(out, "newton_tol", s.newton_tol);
  out << YAML::Key << "newton_max_iter" << YAML::Value << s.newton_max_iter;
  emit_number(out, "picard_tol", s.picard_tol);
  out << YAML::Key << "picard_max_iter" << YAML::Value << s.picard_max_iter;
  out << YAML::Key << "enforce_step_restriction" << YAML::Value << YAML::TrueFalseBool << s.enforce_step_restriction;
  emit_number(out, "degeneracy_floor", s.degeneracy_floor);
  out << YAML::EndMap;

  out << YAML::Key << "boundary" << YAML::Value << YAML::BeginMap;
  for (const auto& [key, bp] : {std::pair{"left", &cfg.boundary.left}, std::pair{"right", &cfg.boundary.right}}) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    emit_number(out, "alpha", bp->alpha);
    emit_number(out, "beta", bp->beta);
    emit_schedule(out, "saturation", bp->saturation);
    emit_schedule(out, "concentration", bp->concentration);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "saturation" << YAML::Value;
  emit_list(out, cfg.initial_saturation.values);
  out << YAML::Key << "concentration" << YAML::Value;
  emit_list(out, cfg.initial_concentration.values);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// snapshots

std::string snapshot_csv(const Snapshot& snap) {
  std::string out = "x,s,h,cP,v\n";
  const std::size_t n = snap.x.size();
  if (snap.s.size() != n || snap.h.size() != n || snap.cP.size() != n || snap.v.size() != n) {
    throw ConfigError("snapshot: columns differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    out += format_17g(snap.x[i]);
    for (const auto* col : {&snap.s, &snap.h, &snap.cP, &snap.v}) {
      out += ',';
      out += format_17g((*col)[i]);
    }
    out += '\n';
  }
  return out;
}

Snapshot parse_snapshot_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x,s,h,cP,v") throw ConfigError("snapshot: expected header x,s,h,cP,v");
  Snapshot snap;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> cols;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      auto v = parse_number(cell);
      if (!v) throw ConfigError("snapshot line " + std::to_string(row) + ": not a number '" + cell + "'");
      cols.push_back(*v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 5) throw ConfigError("snapshot line " + std::to_string(row) + ": expected 5 columns");
    snap.x.push_back(cols[0]);
    snap.s.push_back(cols[1]);
    snap.h.push_back(cols[2]);
    snap.cP.push_back(cols[3]);
    snap.v.push_back(cols[4]);
  }
  return snap;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(tmp.string() + ": cannot write");
    out << content;
    out.flush();
    if (!out) throw ConfigError(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError(path.string() + ": cannot move into place");
  }
}

void write_snapshot_csv(const Snapshot& snapshot, const std::filesystem::path& destination) {
  write_file_atomic(destination, snapshot_csv(snapshot));
}

std::string snapshot_file_name(const Snapshot& snapshot) {
  std::string step = std::to_string(snapshot.step);
  if (step.size() < 8) step.insert(0, 8 - step.size(), '0');
  return "snapshot_" + step + "_t" + format_shortest(snapshot.time) + ".csv";
}

// ---------------------------------------------------------------------------
// reports

namespace {

using nlohmann::json;

json to_json(const InvariantReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"check", v.check}, {"step", v.step}, {"node", v.node}, {"magnitude", v.magnitude}});
  }
  return {
      {"all_passed", r.all_passed()},
      {"steps_checked", r.steps_checked},
      {"saturation_bounds", {{"ok", r.saturation_bounds_ok}, {"worst_margin", r.worst_saturation_margin}}},
      {"hydroxide_positive", {{"ok", r.hydroxide_positive_ok}, {"worst_margin", r.worst_hydroxide_margin}}},
      {"precipitate_monotone", {{"ok", r.precipitate_monotone_ok}, {"min_increment", r.min_precipitate_increment}}},
      {"mass_ledger",
       {{"ok", r.ledger_ok},
        {"tolerance", r.ledger_tolerance},
        {"max_saturation", r.max_saturation_ledger},
        {"max_hydroxide", r.max_hydroxide_ledger}}},
      {"truncation", {{"inactive", r.truncation_inactive}, {"events", r.truncation_events}}},
      {"velocity_bound",
       {{"ok", r.velocity_bound_ok}, {"constant", r.velocity_bound_constant}, {"max_ratio", r.max_velocity_bound_ratio}}},
      {"hydroxide_ceiling", {{"ok", r.hydroxide_ceiling_ok}, {"max_hydroxide", r.max_hydroxide}}},
      {"violations", violations},
  };
}

}  // namespace

std::string serialize_invariant_report(const InvariantReport& report) { return to_json(report).dump(2) + "\n"; }

InvariantReport parse_invariant_report(const std::string& text) {
  try {
    const auto j = json::parse(text);
    InvariantReport r;
    r.steps_checked = j.at("steps_checked").get<std::size_t>();
    r.saturation_bounds_ok = j.at("saturation_bounds").at("ok").get<bool>();
    r.worst_saturation_margin = j.at("saturation_bounds").at("worst_margin").get<double>();
    r.hydroxide_positive_ok = j.at("hydroxide_positive").at("ok").get<bool>();
    r.worst_hydroxide_margin = j.at("hydroxide_positive").at("worst_margin").get<double>();
    r.precipitate_monotone_ok = j.at("precipitate_monotone").at("ok").get<bool>();
    r.min_precipitate_increment = j.at("precipitate_monotone").at("min_increment").get<double>();
    const auto& led = j.at("mass_ledger");
    r.ledger_ok = led.at("ok").get<bool>();
    r.ledger_tolerance = led.at("tolerance").get<double>();
    r.max_saturation_ledger = led.at("max_saturation").get<double>();
    r.max_hydroxide_ledger = led.at("max_hydroxide").get<double>();
    r.truncation_inactive = j.at("truncation").at("inactive").get<bool>();
    r.truncation_events = j.at("truncation").at("events").get<std::size_t>();
    const auto& vb = j.at("velocity_bound");
    r.velocity_bound_ok = vb.at("ok").get<bool>();
    r.velocity_bound_constant = vb.at("constant").get<double>();
    r.max_velocity_bound_ratio = vb.at("max_ratio").get<double>();
    r.hydroxide_ceiling_ok = j.at("hydroxide_ceiling").at("ok").get<bool>();
    r.max_hydroxide = j.at("hydroxide_ceiling").at("max_hydroxide").get<double>();
    for (const auto& v : j.at("violations")) {
      r.violations.push_back({v.at("check").get<std::string>(), v.at("step").get<std::size_t>(),
                              v.at("node").get<std::size_t>(), v.at("magnitude").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invariants report: ") + e.what());
  }
}

std::string run_status(const RunResult& result) {
  if (result.failure) return "solver_failure";
  if (!result.invariants.all_passed()) return "invariant_violation";
  return "ok";
}

void write_run_outputs(const ScenarioConfig& cfg, const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(dir.string() + ": cannot create output directory");

  json snaps = json::array();
  for (const auto& s : result.snapshots) {
    const auto file = snapshot_file_name(s);
    write_snapshot_csv(s, dir / file);
    snaps.push_back({{"file", file}, {"step", s.step}, {"time", s.time}});
  }
  write_file_atomic(dir / "config.yaml", serialize_config(cfg));
  write_file_atomic(dir / "invariants.json", serialize_invariant_report(result.invariants));

  const auto& rr = result.restrictions;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  const auto& t = result.totals;
  json manifest = {
      {"name", cfg.name},
      {"status", run_status(result)},
      {"failure", result.failure ? json(*result.failure) : json(nullptr)},
      {"final_time", cfg.final_time},
      {"steps", cfg.solver.steps},
      {"tau", result.tau},
      {"steps_completed", t.steps_completed},
      {"stopped_at_equilibrium", result.stopped_at_equilibrium},
      {"nodes", cfg.grid.cells + 1},
      {"snapshots", snaps},
      {"warnings", result.warnings},
      {"step_restrictions",
       {{"monotone", rr.required_monotone},
        {"lower_bound", rr.required_lower_bound},
        {"contraction", finite_or_null(rr.required_contraction)},
        {"degenerate", rr.degenerate},
        {"satisfied", rr.satisfied},
        {"satisfied_effective", rr.satisfied_effective}}},
      {"solver",
       {{"newton_iterations", t.newton_iters},
        {"saturation_fallback_iterations", t.saturation_picard_iters},
        {"newton_fallback_steps", t.newton_fallbacks},
        {"hydroxide_active_set_sweeps", t.picard_iters},
        {"max_saturation_residual", t.max_s_residual},
        {"max_hydroxide_residual", t.max_h_residual}}},
  };
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace lime
