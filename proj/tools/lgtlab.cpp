// lgtlab: command-line front end for the lattice gauge / XY laboratory.
//
//   lgtlab lgt run        --config run.toml  [--seed S] [--out DIR] [--dry-run]
//   lgtlab xy run         [--config xy.toml] [--seed S] [--threads N] [--out DIR] [--dry-run]
//   lgtlab lemmas check   [--kappa-max K] [--points N] [--inject-fault KAPPA] [--out FILE]
//   lgtlab oracle enumerate [--config oracle.toml] [--out FILE] [--dry-run]
//   lgtlab bound verify   [--plan plan.toml] [--seed S] [--threads N] [--out DIR] [--dry-run]
//   lgtlab report         --in DIR [--out DIR] [--c-floor C]
//
// Exit codes: 0 pass, 1 assertion failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>

#include "lgt/checkpoint.hpp"
#include "lgt/checks.hpp"
#include "lgt/config.hpp"

namespace fs = std::filesystem;
using namespace lgt;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  bool dry_run = false;
};

void add_common(CLI::App* app, Common& c, const std::string& default_out, bool config_flag = true) {
  if (config_flag) app->add_option("--config", c.config, "TOML configuration file");
  app->add_option("--seed", c.seed, "master seed (overrides the config)");
  app->add_option("--threads", c.threads, "worker threads (wall time only, never results)")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output location")->default_val(default_out);
  app->add_flag("--dry-run", c.dry_run, "print the resolved configuration and exit");
}

toml::table load_or_empty(const std::string& path) { return path.empty() ? toml::table{} : read_toml_file(path); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- lgt run ----------------------------------------------------------------

template <class G>
int lgt_run_typed(const LgtRunConfig& c, G group, const fs::path& out) {
  auto geo = std::make_shared<const LatticeGeometry>(static_cast<int>(c.extents.size()), c.extents);
  McParams mc = c.mc;
  mc.seed = c.seed;
  GaugeChain<G> chain(GaugeField<G>(geo, group), c.model.beta, mc);
  if (c.hot_start) chain.field().randomize(chain.rng());

  std::vector<std::shared_ptr<LoopAverage>> loops;
  std::vector<Observable<GaugeField<G>>> obs;
  for (auto [R, T] : c.loops) {
    auto la = std::make_shared<LoopAverage>(*geo, R, T, c.margin);
    loops.push_back(la);
    obs.push_back({"W" + std::to_string(R) + "x" + std::to_string(T), [la](const GaugeField<G>& u) { return (*la)(u); }});
  }
  const auto t0 = std::chrono::steady_clock::now();
  const ChainRun run = run_chain(chain, obs);

  std::vector<BoundRow> rows;
  const std::string id = "lgt_" + c.model.group.name() + "_b" + fmt_double(c.model.beta);
  nlohmann::json tau = nlohmann::json::object();
  double worst_tau = 0.5;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    rows.push_back(make_bound_row(id, c.model.group.name(), group.dim(), c.model.beta, *loops[i], run.series[i]));
    tau[run.names[i]] = rows.back().est.tau_int;
    worst_tau = std::max(worst_tau, rows.back().est.tau_int);
  }
  write_text_file(out / "loops.csv", bound_csv(rows));

  std::ostringstream series;
  series << "measurement";
  for (const auto& n : run.names) series << "," << n << "_re," << n << "_im";
  series << "\n";
  for (std::size_t k = 0; k < run.series[0].size(); ++k) {
    series << k;
    for (const auto& s : run.series) series << "," << fmt_double(s[k].real()) << "," << fmt_double(s[k].imag());
    series << "\n";
  }
  write_text_file(out / "series.csv", series.str());

  nlohmann::json stats = {{"acceptance", run.stats.acceptance},
                          {"sweeps_done", run.stats.sweeps_done},
                          {"final_width", run.stats.final_width},
                          {"tau_int", tau},
                          {"recommended_thinning", static_cast<int>(std::ceil(worst_tau))}};
  write_text_file(out / "run.json", stats.dump(1) + "\n");
  if (c.checkpoint) write_json_file((out / "checkpoint.json").string(), chain_to_json(chain));

  std::cerr << "lgt run: " << rows.size() << " loop(s), acceptance " << run.stats.acceptance << ", "
            << seconds_since(t0) << " s\n";
  std::cout << bound_csv(rows);
  return kExitPass;
}

int cmd_lgt_run(const Common& o) {
  if (o.config.empty()) throw ConfigError("lgt run needs --config");
  LgtRunConfig c = parse_lgt_run(read_toml_file(o.config));
  if (o.seed) c.seed = *o.seed;
  const std::string manifest = to_toml_text(write_lgt_run(c));
  if (o.dry_run) {
    std::cout << manifest;
    return kExitPass;
  }
  const fs::path out(o.out);
  make_dir(out);
  write_text_file(out / "manifest.toml", manifest);
  switch (c.model.group.kind()) {
    case GroupId::Kind::CircleU1:
      return lgt_run_typed(c, CircleGroup{}, out);
    case GroupId::Kind::UnitaryN:
      return lgt_run_typed(c, UnitaryGroup(c.model.group.n()), out);
    case GroupId::Kind::CyclicZm:
      return lgt_run_typed(c, CyclicGroup(c.model.group.m()), out);
  }
  return kExitConfig;
}

// --- xy run -----------------------------------------------------------------

int cmd_xy_run(const Common& o) {
  XyPlan p = parse_xy_plan(load_or_empty(o.config));
  if (o.seed) p.seed = *o.seed;
  const std::string manifest = to_toml_text(write_xy_plan(p));
  if (o.dry_run) {
    std::cout << manifest;
    return kExitPass;
  }
  const fs::path out(o.out);
  make_dir(out);
  write_text_file(out / "manifest.toml", manifest);
  const auto t0 = std::chrono::steady_clock::now();
  const MwReport rep = run_mw_sweep(p, o.threads);
  emit_mw_report(rep, out);
  std::cout << decay_csv(rep.base);
  std::cout << "fitted exponent c = " << rep.base.c_fit << " +- " << rep.base.c_error << " (L = " << rep.base.L
            << ", certified c*L = " << rep.certified << ")\n";
  if (rep.has_doubled)
    std::cout << "L-scaling diagnostic at |w| = " << rep.doubled.modulus << ": "
              << (rep.doubled_within_bound ? "within bound" : "bound exceeded") << "\n";
  for (const auto& f : rep.failures) std::cout << "FAIL: " << f << "\n";
  std::cerr << "xy run: " << seconds_since(t0) << " s\n";
  return rep.pass() ? kExitPass : kExitFail;
}

// --- lemmas check -----------------------------------------------------------

int cmd_lemmas_check(const LemmaCheckConfig& c, const std::string& out) {
  const nlohmann::json rep = lemmas_check(c);
  const std::string text = rep.dump(1) + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text_file(out, text);
  if (!rep["pass"].get<bool>()) {
    for (const char* part : {"lemma1", "corollary", "bessel"})
      if (!rep[part]["pass"].get<bool>()) std::cerr << "FAIL " << part << " at kappa " << rep[part]["violated_kappa"].dump() << "\n";
    return kExitFail;
  }
  return kExitPass;
}

// --- oracle enumerate -------------------------------------------------------

int cmd_oracle(const Common& o) {
  const OracleConfig c = parse_oracle(load_or_empty(o.config));
  if (o.dry_run) {
    std::cout << to_toml_text(write_oracle(c));
    return kExitPass;
  }
  const nlohmann::json rep = oracle_report(c.extents, c.m, c.beta, c.loops, c.work_guard, c.tolerance);
  const std::string text = rep.dump(1) + "\n";
  if (o.out.empty() || o.out == "-")
    std::cout << text;
  else
    write_text_file(o.out, text);
  return rep["pass"].get<bool>() ? kExitPass : kExitFail;
}

// --- bound verify / report --------------------------------------------------

void print_checks(const BoundReport& rep) {
  const auto& c = rep.checks;
  std::cout << "rows: " << rep.rows.size() << ", min C-hat (uncensored) " << fmt_double(c.min_c_uncensored)
            << ", min C-hat lower bound (censored) " << fmt_double(c.min_c_censored) << ", floor " << rep.c_floor << "\n";
  std::cout << "pooled linearization slope " << fmt_double(c.pooled.slope) << " +- " << fmt_double(c.pooled.slope_error)
            << " over " << c.pooled.points << " points\n";
  for (const auto& f : c.failures) std::cout << "FAIL: " << f << "\n";
  std::cout << (c.pass() ? "PASS" : "FAIL") << "\n";
}

int cmd_bound_verify(const Common& o) {
  SweepPlan p = o.config.empty() ? default_desk_plan() : parse_sweep_plan(read_toml_file(o.config));
  if (o.seed) p.seed = *o.seed;
  p.validate();
  const std::string manifest = to_toml_text(write_sweep_plan(p));
  if (o.dry_run) {
    std::cout << manifest;
    return kExitPass;
  }
  const fs::path out(o.out);
  make_dir(out);
  write_text_file(out / "manifest.toml", manifest);
  const auto t0 = std::chrono::steady_clock::now();
  const BoundReport rep = run_confinement_sweep(p, o.threads);
  emit_report(rep, out);
  print_checks(rep);
  std::cerr << "bound verify: " << seconds_since(t0) << " s\n";
  return rep.checks.pass() ? kExitPass : kExitFail;
}

int cmd_report(const std::string& in, std::string out, double c_floor) {
  if (out.empty()) out = in;
  const BoundReport rep = load_report(fs::path(in) / "bound.jsonl", c_floor);
  emit_report(rep, out);
  print_checks(rep);
  return rep.checks.pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lgtlab: Wilson lattice gauge theory, weighted XY systems and von Mises measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common lgt_o, xy_o, oracle_o, bound_o;
  auto* lgt = app.add_subcommand("lgt", "gauge-field sampling")->require_subcommand(1);
  auto* lgt_run = lgt->add_subcommand("run", "sample one model and estimate Wilson loops");
  add_common(lgt_run, lgt_o, "lgt_out");

  auto* xy = app.add_subcommand("xy", "weighted XY systems")->require_subcommand(1);
  auto* xy_run = xy->add_subcommand("run", "two-point decay sweep");
  add_common(xy_run, xy_o, "xy_out");

  LemmaCheckConfig lc;
  std::string lemmas_out;
  double fault = 0.0;
  auto* lemmas = app.add_subcommand("lemmas", "von Mises anti-concentration certificates")->require_subcommand(1);
  auto* lemmas_check_cmd = lemmas->add_subcommand("check", "certify the safe constants on a kappa grid");
  lemmas_check_cmd->add_option("--kappa-min", lc.kappa_min, "grid start")->default_val(lc.kappa_min);
  lemmas_check_cmd->add_option("--kappa-max", lc.kappa_max, "grid end")->default_val(lc.kappa_max);
  lemmas_check_cmd->add_option("--points", lc.points, "log-spaced grid points")->default_val(lc.points);
  auto* fault_opt = lemmas_check_cmd->add_option("--inject-fault", fault, "corrupt the ratio table near this kappa");
  lemmas_check_cmd->add_option("--out", lemmas_out, "JSON report path (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "exact Z_m enumeration")->require_subcommand(1);
  auto* oracle_enum = oracle->add_subcommand("enumerate", "Z, Z~, <W>, <chi Q> by exact summation");
  add_common(oracle_enum, oracle_o, "-");

  auto* bound = app.add_subcommand("bound", "confinement-bound certification")->require_subcommand(1);
  auto* bound_verify = bound->add_subcommand("verify", "run a sweep plan and check C-hat");
  add_common(bound_verify, bound_o, "bound_out", false);
  bound_verify->add_option("--plan,--config", bound_o.config, "plan TOML (default: the desk plan)");

  std::string report_in, report_out;
  double report_floor = 0.05;
  auto* report = app.add_subcommand("report", "rebuild summary, CSV and plot script from bound.jsonl");
  report->add_option("--in", report_in, "directory holding bound.jsonl")->required();
  report->add_option("--out", report_out, "output directory (default: --in)");
  report->add_option("--c-floor", report_floor, "C-hat floor")->default_val(report_floor);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (lgt_run->parsed()) return cmd_lgt_run(lgt_o);
    if (xy_run->parsed()) return cmd_xy_run(xy_o);
    if (lemmas_check_cmd->parsed()) {
      if (fault_opt->count() > 0) lc.fault_kappa = fault;
      return cmd_lemmas_check(lc, lemmas_out);
    }
    if (oracle_enum->parsed()) return cmd_oracle(oracle_o);
    if (bound_verify->parsed()) return cmd_bound_verify(bound_o);
    if (report->parsed()) return cmd_report(report_in, report_out, report_floor);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitConfig;
}
