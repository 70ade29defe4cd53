#pragma once

// TOML run configurations: strict readers (unknown keys are errors, missing
// required keys are named) and writers that echo the fully resolved config
// into a manifest. A manifest is itself a valid config for the same command.

#include <set>
#include <sstream>
#include <string>
#include <toml.hpp>
#include <vector>

#include "lgt/enumerate.hpp"
#include "lgt/harness.hpp"

namespace lgt {

// ---------------------------------------------------------------------------
// Strict table reader

class TomlSection {
 public:
  TomlSection(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return t_ && t_->contains(key);
  }

  std::string where(const std::string& key) const {
    std::string w = qualified(key);
    if (t_) {
      const toml::node* n = t_->get(key);
      const auto& src = n ? n->source() : t_->source();
      if (src.begin.line > 0) w += " (line " + std::to_string(src.begin.line) + ")";
    }
    return w;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const toml::node* n = node(key, fallback.has_value());
    if (!n) return *fallback;
    if (auto v = n->value<double>()) return *v;
    throw ConfigError("key '" + where(key) + "' must be a number");
  }
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    const toml::node* n = node(key, fallback.has_value());
    if (!n) return *fallback;
    if (n->is_integer()) return *n->value<std::int64_t>();
    throw ConfigError("key '" + where(key) + "' must be an integer");
  }
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    const toml::node* n = node(key, fallback.has_value());
    if (!n) return *fallback;
    if (n->is_boolean()) return *n->value<bool>();
    throw ConfigError("key '" + where(key) + "' must be true or false");
  }
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const toml::node* n = node(key, fallback.has_value());
    if (!n) return *fallback;
    if (n->is_string()) return *n->value<std::string>();
    throw ConfigError("key '" + where(key) + "' must be a string");
  }
  std::vector<int> int_list(const std::string& key, std::optional<std::vector<int>> fallback = std::nullopt) {
    const toml::node* n = node(key, fallback.has_value());
    if (!n) return *fallback;
    std::vector<int> out;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError("key '" + where(key) + "' must be an array of integers");
    for (const auto& e : *a) {
      if (!e.is_integer()) throw ConfigError("key '" + where(key) + "' must be an array of integers");
      out.push_back(static_cast<int>(*e.value<std::int64_t>()));
    }
    return out;
  }
  std::vector<double> number_list(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    const toml::node* n = node(key, fallback.has_value());
    if (!n) return *fallback;
    std::vector<double> out;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError("key '" + where(key) + "' must be an array of numbers");
    for (const auto& e : *a) {
      auto v = e.value<double>();
      if (!v) throw ConfigError("key '" + where(key) + "' must be an array of numbers");
      out.push_back(*v);
    }
    return out;
  }
  std::vector<std::pair<int, int>> pair_list(const std::string& key, std::vector<std::pair<int, int>> fallback) {
    const toml::node* n = node(key, true);
    if (!n) return fallback;
    std::vector<std::pair<int, int>> out;
    const toml::array* a = n->as_array();
    if (!a) throw ConfigError("key '" + where(key) + "' must be an array of [R, T] pairs");
    for (const auto& e : *a) {
      const toml::array* p = e.as_array();
      if (!p || p->size() != 2 || !(*p)[0].is_integer() || !(*p)[1].is_integer())
        throw ConfigError("key '" + where(key) + "' must be an array of [R, T] pairs");
      out.push_back({static_cast<int>(*(*p)[0].value<std::int64_t>()), static_cast<int>(*(*p)[1].value<std::int64_t>())});
    }
    return out;
  }

  TomlSection section(const std::string& key) {
    seen_.insert(key);
    if (!t_ || !t_->contains(key)) return {nullptr, qualified(key)};
    const toml::table* sub = t_->get(key)->as_table();
    if (!sub) throw ConfigError("key '" + where(key) + "' must be a table");
    return {sub, qualified(key)};
  }

  /// Arrays of tables ([[name]]).
  std::vector<TomlSection> sections(const std::string& key) {
    seen_.insert(key);
    std::vector<TomlSection> out;
    if (!t_ || !t_->contains(key)) return out;
    const toml::array* a = t_->get(key)->as_array();
    if (!a) throw ConfigError("key '" + where(key) + "' must be an array of tables");
    for (std::size_t i = 0; i < a->size(); ++i) {
      const toml::table* sub = (*a)[i].as_table();
      if (!sub) throw ConfigError("key '" + where(key) + "' must be an array of tables");
      out.emplace_back(sub, qualified(key) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  /// Throws on any key the reader never asked about.
  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_)
      if (!seen_.count(std::string(k.str())))
        throw ConfigError("unknown key '" + where(std::string(k.str())) + "'");
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const toml::node* node(const std::string& key, bool optional) {
    seen_.insert(key);
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n && !optional) throw ConfigError("missing required key '" + qualified(key) + "'");
    return n;
  }

  const toml::table* t_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Parse a file, mapping syntax errors to ConfigError with line/column.
inline toml::table read_toml_file(const std::string& path) {
  try {
    return toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << path << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
}

inline toml::table read_toml_string(std::string_view text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "line " << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
}

inline std::string to_toml_text(const toml::table& t) {
  std::ostringstream os;
  os << toml::toml_formatter(t, toml::toml_formatter::default_flags & ~toml::format_flags::allow_literal_strings);
  os << "\n";
  return os.str();
}

template <class T>
toml::array to_toml_array(const std::vector<T>& v) {
  toml::array a;
  for (const T& x : v) a.push_back(x);
  return a;
}

/// Reads and discards the [manifest] table that writers add.
inline void skip_manifest(TomlSection& root) { root.section("manifest"); }

inline toml::table manifest_header(const std::string& command) {
  return toml::table{{"command", command}, {"version", std::string(kVersion)}};
}

// ---------------------------------------------------------------------------
// MC parameters

inline McParams read_mc(TomlSection s, McParams d) {
  McParams mc = d;
  mc.algorithm = parse_algorithm(s.string("algorithm", to_string(d.algorithm)));
  mc.thermalization = static_cast<int>(s.integer("thermalization", d.thermalization));
  mc.sweeps = static_cast<int>(s.integer("sweeps", d.sweeps));
  mc.thinning = static_cast<int>(s.integer("thinning", d.thinning));
  mc.width = s.number("width", d.width);
  mc.target_acceptance = s.number("target_acceptance", d.target_acceptance);
  mc.adapt = s.boolean("adapt", d.adapt);
  s.finish();
  mc.validate();
  return mc;
}

inline toml::table write_mc(const McParams& mc) {
  return toml::table{{"algorithm", to_string(mc.algorithm)},
                     {"thermalization", mc.thermalization},
                     {"sweeps", mc.sweeps},
                     {"thinning", mc.thinning},
                     {"width", mc.width},
                     {"target_acceptance", mc.target_acceptance},
                     {"adapt", mc.adapt}};
}

// ---------------------------------------------------------------------------
// lgt run

struct LgtRunConfig {
  ModelParams model;
  std::vector<int> extents;
  std::vector<std::pair<int, int>> loops;  ///< (R, T), R <= T
  int margin = 0;
  McParams mc;
  bool hot_start = false;
  bool checkpoint = true;
  std::uint64_t seed = 1;
};

inline LgtRunConfig parse_lgt_run(const toml::table& t) {
  TomlSection root(&t, "");
  skip_manifest(root);
  LgtRunConfig c;
  c.seed = static_cast<std::uint64_t>(root.integer("seed", 1));
  {
    auto m = root.section("model");
    if (!m.present()) throw ConfigError("missing required table [model]");
    c.model.group = GroupId::parse(m.string("group"));
    c.model.beta = m.number("beta");
    c.model.oracle = m.boolean("oracle", false);
    m.finish();
    c.model.validate();
  }
  {
    auto l = root.section("lattice");
    c.extents = l.int_list("extents");
    l.finish();
    LatticeGeometry(static_cast<int>(c.extents.size()), c.extents);
  }
  {
    auto l = root.section("loops");
    c.loops = l.pair_list("sizes", {{1, 1}});
    c.margin = static_cast<int>(l.integer("margin", 0));
    l.finish();
    const LatticeGeometry geo(static_cast<int>(c.extents.size()), c.extents);
    for (auto& [R, T] : c.loops) {
      require_config(R >= 1 && T >= 1, "loop sides must be >= 1");
      if (R > T) std::swap(R, T);
      if (loop_placements(geo, R, T, c.margin).empty())
        throw ConfigError("loop " + std::to_string(R) + "x" + std::to_string(T) + " does not fit the box");
    }
  }
  McParams d;
  d.algorithm = c.model.group.kind() == GroupId::Kind::UnitaryN ? Algorithm::Metropolis : Algorithm::Heatbath;
  d.thermalization = 200;
  d.sweeps = 2000;
  c.mc = read_mc(root.section("mc"), d);
  const std::string st = root.string("start", "cold");
  require_config(st == "cold" || st == "hot", "start must be 'cold' or 'hot'");
  c.hot_start = st == "hot";
  {
    auto o = root.section("output");
    c.checkpoint = o.boolean("checkpoint", true);
    o.finish();
  }
  root.finish();
  return c;
}

inline toml::table write_lgt_run(const LgtRunConfig& c) {
  toml::array loops;
  for (const auto& [R, T] : c.loops) loops.push_back(toml::array{R, T});
  return toml::table{{"manifest", manifest_header("lgt run")},
                     {"seed", static_cast<std::int64_t>(c.seed)},
                     {"model", toml::table{{"group", c.model.group.name()}, {"beta", c.model.beta}, {"oracle", c.model.oracle}}},
                     {"lattice", toml::table{{"extents", to_toml_array(c.extents)}}},
                     {"loops", toml::table{{"sizes", loops}, {"margin", c.margin}}},
                     {"mc", write_mc(c.mc)},
                     {"start", c.hot_start ? "hot" : "cold"},
                     {"output", toml::table{{"checkpoint", c.checkpoint}}}};
}

// ---------------------------------------------------------------------------
// bound verify

/// Default desk-scale plan. U(2) uses a 9^3 box: with 2-site margins a
/// T = 4 loop needs T + 1 + 4 = 9 sites along its axis.
inline SweepPlan default_desk_plan() {
  SweepPlan p;
  p.max_T = 4;
  p.margin = 2;
  p.c_floor = 0.05;
  p.seed = 20240611;
  GaugeExperiment u1;
  u1.name = "u1";
  u1.group = GroupId::circle();
  u1.extents = {10, 10, 10};
  u1.betas = {0.5, 1.0, 2.0};
  u1.mc.algorithm = Algorithm::Heatbath;
  u1.mc.thermalization = 500;
  u1.mc.sweeps = 5000;
  GaugeExperiment u2;
  u2.name = "u2";
  u2.group = GroupId::unitary(2);
  u2.extents = {9, 9, 9};
  u2.betas = {0.25, 0.5};
  u2.mc.algorithm = Algorithm::Metropolis;
  u2.mc.thermalization = 500;
  u2.mc.sweeps = 4000;
  u2.mc.width = 0.5;
  u2.mc.target_acceptance = 0.5;
  p.experiments = {u1, u2};
  return p;
}

inline SweepPlan parse_sweep_plan(const toml::table& t) {
  TomlSection root(&t, "");
  skip_manifest(root);
  SweepPlan p;
  const SweepPlan d = default_desk_plan();
  p.seed = static_cast<std::uint64_t>(root.integer("seed", static_cast<std::int64_t>(d.seed)));
  p.max_T = static_cast<int>(root.integer("max_T", d.max_T));
  p.margin = static_cast<int>(root.integer("margin", d.margin));
  p.c_floor = root.number("c_floor", d.c_floor);
  auto exps = root.sections("experiment");
  if (exps.empty()) throw ConfigError("missing required key 'experiment' (at least one [[experiment]] table)");
  for (auto& s : exps) {
    GaugeExperiment ex;
    ex.name = s.string("name");
    ex.group = GroupId::parse(s.string("group"));
    ex.extents = s.int_list("extents");
    ex.betas = s.number_list("betas");
    McParams md;
    md.algorithm = ex.group.kind() == GroupId::Kind::UnitaryN ? Algorithm::Metropolis : Algorithm::Heatbath;
    md.thermalization = 500;
    md.sweeps = 4000;
    md.algorithm = parse_algorithm(s.string("algorithm", to_string(md.algorithm)));
    md.thermalization = static_cast<int>(s.integer("thermalization", md.thermalization));
    md.sweeps = static_cast<int>(s.integer("sweeps", md.sweeps));
    md.thinning = static_cast<int>(s.integer("thinning", md.thinning));
    md.width = s.number("width", md.width);
    md.target_acceptance = s.number("target_acceptance", md.target_acceptance);
    md.adapt = s.boolean("adapt", md.adapt);
    ex.mc = md;
    const std::string st = s.string("start", "cold");
    require_config(st == "cold" || st == "hot", "start must be 'cold' or 'hot'");
    ex.hot_start = st == "hot";
    s.finish();
    if (ex.mc.algorithm == Algorithm::Heatbath && ex.group.kind() == GroupId::Kind::UnitaryN)
      throw ConfigError("experiment '" + ex.name + "': heat-bath updates are only available for U(1)");
    p.experiments.push_back(ex);
  }
  root.finish();
  p.validate();
  return p;
}

inline toml::table write_sweep_plan(const SweepPlan& p) {
  toml::array exps;
  for (const auto& ex : p.experiments) {
    toml::table e{{"name", ex.name},
                  {"group", ex.group.name()},
                  {"extents", to_toml_array(ex.extents)},
                  {"betas", to_toml_array(ex.betas)},
                  {"start", ex.hot_start ? "hot" : "cold"}};
    for (auto&& [k, v] : write_mc(ex.mc)) e.insert(k, v);
    exps.push_back(std::move(e));
  }
  return toml::table{{"manifest", manifest_header("bound verify")},
                     {"seed", static_cast<std::int64_t>(p.seed)},
                     {"max_T", p.max_T},
                     {"margin", p.margin},
                     {"c_floor", p.c_floor},
                     {"experiment", exps}};
}

// ---------------------------------------------------------------------------
// xy run

inline XyPlan default_xy_plan() {
  XyPlan p;
  p.extents = {32, 32};
  p.modulus = 1.0;
  p.max_R = 8;
  p.margin = 2;
  p.mc.algorithm = Algorithm::Heatbath;
  p.mc.thermalization = 1000;
  p.mc.sweeps = 20000;
  p.doubled_modulus = 2.0;
  p.seed = 20240611;
  return p;
}

inline XyPlan parse_xy_plan(const toml::table& t) {
  TomlSection root(&t, "");
  skip_manifest(root);
  const XyPlan d = default_xy_plan();
  XyPlan p = d;
  p.seed = static_cast<std::uint64_t>(root.integer("seed", static_cast<std::int64_t>(d.seed)));
  {
    auto l = root.section("lattice");
    p.extents = l.int_list("extents", d.extents);
    l.finish();
  }
  {
    auto c = root.section("couplings");
    p.modulus = c.number("modulus", d.modulus);
    p.random_phases = c.boolean("random_phases", d.random_phases);
    p.doubled_modulus = c.number("doubled_modulus", d.doubled_modulus);
    c.finish();
  }
  {
    auto s = root.section("decay");
    p.max_R = static_cast<int>(s.integer("max_R", d.max_R));
    p.margin = static_cast<int>(s.integer("margin", d.margin));
    s.finish();
  }
  p.mc = read_mc(root.section("mc"), d.mc);
  require_config(p.mc.algorithm == Algorithm::Heatbath, "XY runs use heat-bath updates");
  root.finish();
  p.validate();
  return p;
}

inline toml::table write_xy_plan(const XyPlan& p) {
  return toml::table{{"manifest", manifest_header("xy run")},
                     {"seed", static_cast<std::int64_t>(p.seed)},
                     {"lattice", toml::table{{"extents", to_toml_array(p.extents)}}},
                     {"couplings", toml::table{{"modulus", p.modulus},
                                               {"random_phases", p.random_phases},
                                               {"doubled_modulus", p.doubled_modulus}}},
                     {"decay", toml::table{{"max_R", p.max_R}, {"margin", p.margin}}},
                     {"mc", write_mc(p.mc)}};
}

// ---------------------------------------------------------------------------
// oracle enumerate

struct OracleConfig {
  std::vector<int> extents{2, 2};
  int m = 8;
  double beta = 0.7;
  std::vector<std::pair<int, int>> loops{{1, 1}};
  double work_guard = kDefaultWorkGuard;
  double tolerance = 1e-12;
};

inline OracleConfig parse_oracle(const toml::table& t) {
  TomlSection root(&t, "");
  skip_manifest(root);
  OracleConfig c;
  {
    auto l = root.section("lattice");
    c.extents = l.int_list("extents", c.extents);
    l.finish();
  }
  {
    auto m = root.section("model");
    c.m = static_cast<int>(m.integer("m", c.m));
    c.beta = m.number("beta", c.beta);
    m.finish();
  }
  {
    auto l = root.section("loops");
    c.loops = l.pair_list("sizes", c.loops);
    l.finish();
  }
  c.work_guard = root.number("work_guard", c.work_guard);
  c.tolerance = root.number("tolerance", c.tolerance);
  root.finish();
  require_config(c.m >= 2, "model.m must be >= 2");
  require_config(c.beta >= 0.0, "model.beta must be >= 0");
  require_config(c.extents.size() == 2 || c.extents.size() == 3, "lattice.extents needs 2 or 3 entries");
  return c;
}

inline toml::table write_oracle(const OracleConfig& c) {
  toml::array loops;
  for (const auto& [R, T] : c.loops) loops.push_back(toml::array{R, T});
  return toml::table{{"manifest", manifest_header("oracle enumerate")},
                     {"lattice", toml::table{{"extents", to_toml_array(c.extents)}}},
                     {"model", toml::table{{"m", c.m}, {"beta", c.beta}}},
                     {"loops", toml::table{{"sizes", loops}}},
                     {"work_guard", c.work_guard},
                     {"tolerance", c.tolerance}};
}

}  // namespace lgt
