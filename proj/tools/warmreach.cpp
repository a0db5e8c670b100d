// warmreach: command-line front end.
//
//   warmreach solve --model "double_integrator b=1" --grid "lo=-5,-5 hi=5,5 n=101,101"
//                   --target "band axis=0 lo=-2 hi=2" --out v.vfn
//   warmreach scenario --name increasing_disturbance --out-dir runs
//   warmreach compare a.vfn b.vfn --tolerance 1e-6
//   warmreach export v.vfn --format contour --out v_contour.csv
//   warmreach list-scenarios
//
// Every outcome, including errors, is printed as one JSON object per line on
// stdout. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"
#include "warmreach/analysis.hpp"
#include "warmreach/persist.hpp"
#include "warmreach/report_json.hpp"
#include "warmreach/scenarios.hpp"
#include "warmreach/solver.hpp"
#include "warmreach/specs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace warmreach;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const json& j) { std::cout << j.dump() << std::endl; }

int fail(const std::string& code, const std::string& message, int exit_code) {
  emit({{"error", {{"code", code}, {"message", message}}}});
  return exit_code;
}

struct SolveArgs {
  std::string model, grid, target, mode = "standard", seed, out, label;
  std::optional<double> gamma, threshold;
  std::optional<std::size_t> max_steps;
  bool no_anneal = false;
};

int cmd_solve(const SolveArgs& a) {
  if ((a.mode == "warm" || a.mode == "discounted") && a.seed.empty())
    throw UsageError("--mode " + a.mode + " requires --seed");
  if (a.mode == "standard" && !a.seed.empty()) throw UsageError("--seed is only used by warm and discounted modes");
  if (a.gamma && a.mode != "discounted") throw UsageError("--gamma is only valid with --mode discounted");
  if (a.no_anneal && a.mode != "discounted") throw UsageError("--no-anneal is only valid with --mode discounted");

  const RectGrid grid = build_grid(a.grid);
  const AnyModel model = build_model(a.model);
  const ScalarField l = sample(build_target(a.target, grid), grid, "l");

  SolveConfig config;
  if (a.threshold) config.threshold = *a.threshold;
  if (a.max_steps) config.max_macro_steps = *a.max_steps;

  SolveMode mode = Standard{};
  if (a.mode != "standard") {
    ScalarField seed = load_vfn(fs::path(a.seed));
    require_same_grid(seed, l);
    if (a.mode == "warm")
      mode = WarmStart{seed};
    else
      mode = Discounted{seed, a.gamma.value_or(0.999), !a.no_anneal};
  }

  SolveResult r = std::visit([&](const auto& m) { return run(mode, l, m, config); }, model);

  json line = {{"command", "solve"},
               {"mode", mode_name(mode)},
               {"steps", r.steps},
               {"residual", r.residuals.empty() ? 0.0 : r.residuals.back()},
               {"wall_time_seconds", r.wall_time},
               {"converged", r.converged}};
  if (!a.out.empty()) {
    Sidecar meta{a.label.empty() ? fs::path(a.out).stem().string() : a.label, "", r.steps, r.wall_time, r.converged,
                 {}, {}};
    if (const auto* d = std::get_if<Discounted>(&mode)) {
      meta.gamma = d->gamma;
      meta.gamma_history = r.gamma_history;
    }
    save_with_sidecar(r.value.relabeled(meta.label), a.out, meta);
    line["out"] = a.out;
  }
  emit(line);
  return 0;
}

struct ScenarioArgs {
  std::string name, config, out_dir;
  bool all = false, sandwich = false;
  std::optional<double> reference_threshold;
};

void write_artifacts(const ScenarioReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& s : rep.subsystems) {
    const std::string stem = rep.subsystems.size() == 1 ? rep.scenario : rep.scenario + "." + s.label;
    auto save = [&](const ScalarField& f, const char* mode, const ModeStats& st, std::optional<double> gamma) {
      Sidecar meta{std::string(mode), rep.scenario, st.steps, st.wall_time, st.converged, gamma, {}};
      save_with_sidecar(f.relabeled(mode), dir / (stem + "." + mode + ".vfn"), meta);
    };
    save(s.base_value, "base", s.base, std::nullopt);
    save(s.fresh, "standard", s.standard, std::nullopt);
    save(s.warm_value, "warm", s.warm, std::nullopt);
    save(s.discounted_value, "discounted", s.discounted, s.gamma);
  }
  const std::string text = to_json(rep).dump(2) + "\n";
  detail::write_atomically(dir / (rep.scenario + ".json"), [&](std::ostream& out) { out << text; });
}

int cmd_scenario(const ScenarioArgs& a) {
  if (a.all == !a.name.empty()) throw UsageError("give exactly one of --name or --all");
  std::vector<Scenario> registry = list_scenarios();
  if (!a.config.empty()) registry = apply_config(std::move(registry), a.config);

  std::vector<Scenario> chosen;
  if (a.all) {
    chosen = registry;
  } else {
    auto it = std::find_if(registry.begin(), registry.end(), [&](const Scenario& s) { return s.name == a.name; });
    if (it == registry.end()) throw Error(Errc::not_found, "unknown scenario '" + a.name + "'");
    chosen.push_back(*it);
  }

  ScenarioOptions opt;
  opt.track_sandwich = a.sandwich;
  opt.reference_threshold = a.reference_threshold;
  for (const auto& s : chosen) {
    ScenarioReport rep = run_scenario(s, opt);
    if (!a.out_dir.empty()) write_artifacts(rep, a.out_dir);
    json line = to_json(rep);
    line["command"] = "scenario";
    emit(line);
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, double tolerance) {
  const ScalarField fa = load_vfn(fs::path(a)), fb = load_vfn(fs::path(b));
  const ComparisonReport r = compare(fa, fb, tolerance);
  json line = to_json(r);
  line["command"] = "compare";
  line["a"] = a;
  line["b"] = b;
  emit(line);
  return r.violation_count == 0 ? 0 : 1;
}

int cmd_export(const std::string& in, const std::string& format, const std::string& out) {
  const ScalarField f = load_vfn(fs::path(in));
  std::size_t rows = 0, lines = 0;
  auto write = [&](std::ostream& os) {
    if (format == "csv") {
      rows = export_csv(f, os);
      return;
    }
    const auto contour = zero_contour(f);
    os << "polyline_id,x0,x1\n";
    for (std::size_t id = 0; id < contour.size(); ++id)
      for (const auto& p : contour[id]) {
        os << id << ',' << detail::shortest(p[0]) << ',' << detail::shortest(p[1]) << '\n';
        ++rows;
      }
    lines = contour.size();
  };
  // Render first so a dimensionality error leaves no file behind.
  std::ostringstream buf;
  write(buf);
  const std::string text = buf.str();
  if (out.empty())
    std::cerr << text;
  else
    detail::write_atomically(out, [&](std::ostream& os) { os << text; });
  json line = {{"command", "export"}, {"format", format}, {"rows", rows}};
  if (format == "contour") line["polylines"] = lines;
  if (!out.empty()) line["out"] = out;
  emit(line);
  return 0;
}

int cmd_list() {
  for (const auto& s : list_scenarios()) {
    json subs = json::array();
    for (const auto& p : s.problems) subs.push_back(p.label);
    emit({{"name", s.name}, {"description", s.description}, {"regime", to_string(s.regime)}, {"subsystems", subs}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-based HJI reachability with warm-started value iteration"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve one avoid problem to convergence");
  s->add_option("--model", solve.model, "Model spec, e.g. \"double_integrator b=1 d=0\"")->required();
  s->add_option("--grid", solve.grid, "Grid spec, e.g. \"lo=-5,-5 hi=5,5 n=101,101\"")->required();
  s->add_option("--target", solve.target, "Target spec, e.g. \"band axis=0 lo=-2 hi=2\"")->required();
  s->add_option("--mode", solve.mode, "standard | warm | discounted")
      ->check(CLI::IsMember({"standard", "warm", "discounted"}));
  s->add_option("--seed", solve.seed, "VFN file used to initialise warm/discounted solves");
  s->add_option("--gamma", solve.gamma, "Per-macro-step discount (discounted mode)")->check(CLI::Range(0.0, 1.0));
  s->add_flag("--no-anneal", solve.no_anneal, "Keep gamma fixed instead of annealing to 1");
  s->add_option("--threshold", solve.threshold, "Convergence threshold on max |dV| per macro step")
      ->check(CLI::PositiveNumber);
  s->add_option("--max-steps", solve.max_steps, "Macro-step limit")->check(CLI::PositiveNumber);
  s->add_option("--out", solve.out, "Output VFN path (a .json sidecar is written next to it)");
  s->add_option("--label", solve.label, "Label stored in the sidecar");

  ScenarioArgs scen;
  auto* sc = app.add_subcommand("scenario", "Run registered scenarios in all three modes");
  sc->add_option("--name", scen.name, "Scenario name (see list-scenarios)");
  sc->add_flag("--all", scen.all, "Run every registered scenario");
  sc->add_option("--config", scen.config, "INI file with per-scenario overrides")->check(CLI::ExistingFile);
  sc->add_option("--out-dir", scen.out_dir, "Directory for the JSON report and per-mode VFN files");
  sc->add_flag("--sandwich", scen.sandwich, "Check seed <= V <= fresh after every warm-start step");
  sc->add_option("--reference-threshold", scen.reference_threshold,
                 "Iterate base and fresh solutions to this residual before using them")
      ->check(CLI::PositiveNumber);

  std::string ca, cb;
  double tolerance = 1e-6;
  auto* cmp = app.add_subcommand("compare", "Pointwise comparison A vs B; exit 1 if A > B + tolerance anywhere");
  cmp->add_option("a", ca, "First VFN file")->required();
  cmp->add_option("b", cb, "Second VFN file")->required();
  cmp->add_option("--tolerance", tolerance, "Allowed excess of A over B")->check(CLI::NonNegativeNumber);

  std::string ein, eformat = "csv", eout;
  auto* ex = app.add_subcommand("export", "Export a value function as CSV or zero-level contour");
  ex->add_option("in", ein, "VFN file")->required();
  ex->add_option("--format", eformat, "csv | contour")->check(CLI::IsMember({"csv", "contour"}));
  ex->add_option("--out", eout, "Output path (stderr if omitted)");

  auto* ls = app.add_subcommand("list-scenarios", "List registered scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*sc) return cmd_scenario(scen);
    if (*cmp) return cmd_compare(ca, cb, tolerance);
    if (*ex) return cmd_export(ein, eformat, eout);
    if (*ls) return cmd_list();
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 2);
  } catch (const Error& e) {
    // Malformed specs and config files are usage errors; everything else is a domain error.
    return fail(std::string(to_string(e.code())), e.what(), e.code() == Errc::config ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 2;
}
