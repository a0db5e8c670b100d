#pragma once

// Scenario registry: each entry describes a base problem and a changed problem
// (or, for the initialisation demos, one problem and an arbitrary seed), and
// run_scenario produces the standard / warm-start / discounted comparison.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "warmreach/analysis.hpp"
#include "warmreach/dynamics.hpp"
#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"
#include "warmreach/hamiltonian.hpp"
#include "warmreach/persist.hpp"
#include "warmreach/shapes.hpp"
#include "warmreach/solver.hpp"
#include "warmreach/specs.hpp"

namespace warmreach {

enum class Regime { exact, conservative };

inline std::string to_string(Regime r) { return r == Regime::exact ? "exact" : "conservative"; }

/// One solved system. All specs use the syntax of specs.hpp.
struct ProblemSpec {
  std::string label;
  std::string grid;
  std::string base_model, changed_model;
  std::string base_target, changed_target;
  std::string seed;  // non-empty for the initialisation demos: warm/discounted start from this shape
  double exact_tolerance = 0.01;
};

struct Scenario {
  std::string name;
  std::string description;
  Regime regime = Regime::exact;
  std::vector<ProblemSpec> problems;
  std::optional<double> gamma, threshold;
  std::optional<std::size_t> max_steps;
};

struct ScenarioOptions {
  SolveConfig config;
  double gamma = 0.999;
  bool anneal = true;
  /// If set, the base and fresh solutions are iterated on until the residual
  /// drops below this value before serving as seed and reference. The
  /// comparison theorems are statements about fixed points; a field stopped at
  /// the default threshold is still up to a few hundredths away from one.
  std::optional<double> reference_threshold;
  bool track_sandwich = false;
  double conservative_tolerance = 1e-6;
};

struct ModeStats {
  std::size_t steps = 0;
  double wall_time = 0.0;
  bool converged = false;
  double final_residual = 0.0;
  bool skipped = false;
  std::string skip_reason;
};

inline ModeStats stats_of(const SolveResult& r) {
  return {r.steps, r.wall_time, r.converged, r.residuals.empty() ? 0.0 : r.residuals.back(), false, {}};
}

/// Per-step check of  seed − V  and  V − fresh  over the warm-start iterates.
struct SandwichStats {
  double max_below_seed = -std::numeric_limits<double>::infinity();  // max(seed − V)
  double max_above_fresh = -std::numeric_limits<double>::infinity();  // max(V − fresh)
  double max_above_target = -std::numeric_limits<double>::infinity();  // max(V − l)
  std::size_t steps_checked = 0;
};

struct SubsystemReport {
  std::string label;
  ModeStats base, standard, warm, discounted;
  std::optional<ModeStats> base_reference, fresh_reference;
  ComparisonReport warm_vs_fresh, discounted_vs_fresh;
  std::optional<ComparisonReport> fresh_vs_base;  // exact regime: fresh ≤ base
  std::optional<SandwichStats> sandwich;
  std::vector<double> alphas;
  double gamma = 1.0;  // discount used by the discounted mode
  bool verdict = false;
  std::string verdict_text;
  ScalarField base_value, fresh, warm_value, discounted_value, seed;
};

struct ScenarioReport {
  std::string scenario;
  std::string description;
  Regime regime = Regime::exact;
  std::vector<SubsystemReport> subsystems;

  bool verdict() const {
    return std::all_of(subsystems.begin(), subsystems.end(), [](const auto& s) { return s.verdict; });
  }
};

namespace detail {

inline const char* kRunningGrid = "grid lo=-5,-5 hi=5,5 n=101,101";
inline const char* kRunningTarget = "band axis=0 lo=-2 hi=2";
inline const char* kQuad4dGrid = "grid lo=-4,-4,-0.3490658503988659,-4 hi=4,4,0.3490658503988659,4 n=21,21,21,21";
inline const char* kQuad2dGrid = "grid lo=-5,-5 hi=5,5 n=81,81";

inline Scenario running_example(std::string name, std::string description, Regime regime, std::string base_model,
                                std::string changed_model, std::string base_target = kRunningTarget,
                                std::string changed_target = kRunningTarget) {
  Scenario s{std::move(name), std::move(description), regime, {}, {}, {}, {}};
  s.problems.push_back({"double_integrator", kRunningGrid, std::move(base_model), std::move(changed_model),
                        std::move(base_target), std::move(changed_target), {}, 0.01});
  return s;
}

inline Scenario init_demo(std::string name, std::string description, std::string seed) {
  Scenario s{std::move(name), std::move(description), Regime::conservative, {}, {}, {}, {}};
  s.problems.push_back({"double_integrator", kRunningGrid, "double_integrator", "double_integrator", kRunningTarget,
                        kRunningTarget, std::move(seed), 0.01});
  return s;
}

inline Scenario quad_study(std::string name, std::string description, Regime regime, double d_changed,
                           double m_changed) {
  Scenario s{std::move(name), std::move(description), regime, {}, {}, {}, {}};
  s.problems.push_back({"quad4d", kQuad4dGrid, "quad4d angle=10 d=1", "quad4d angle=10 d=" + detail::shortest(d_changed),
                        "band axis=0 lo=-1 hi=1", "band axis=0 lo=-1 hi=1", {}, 0.05});
  s.problems.push_back({"quad2d", kQuad2dGrid, "quad2d m=5 dz=1", "quad2d m=" + detail::shortest(m_changed) + " dz=1",
                        "band axis=0 lo=-1 hi=1", "band axis=0 lo=-1 hi=1", {}, 0.05});
  return s;
}

}  // namespace detail

/// decreasing_control in either form: "b" lowers the gain 1 → 0.8, "u" shrinks
/// the control box [−1, 1] → [−0.8, 0.8]. Both scale the control authority the same way.
inline Scenario decreasing_control_scenario(const std::string& form = "b") {
  if (form == "b")
    return detail::running_example("decreasing_control", "control gain b: 1 -> 0.8", Regime::exact,
                                   "double_integrator b=1", "double_integrator b=0.8");
  if (form == "u")
    return detail::running_example("decreasing_control", "control box: [-1,1] -> [-0.8,0.8]", Regime::exact,
                                   "double_integrator u=1", "double_integrator u=0.8");
  throw Error(Errc::config, "decreasing_control form must be 'b' or 'u'");
}

inline std::vector<Scenario> list_scenarios() {
  using detail::running_example;
  std::vector<Scenario> out;
  out.push_back(running_example("increasing_target", "target |p| <= 2 -> |p| <= 2.5", Regime::exact,
                                "double_integrator", "double_integrator", detail::kRunningTarget,
                                "band axis=0 lo=-2.5 hi=2.5"));
  out.push_back(running_example("decreasing_target", "target |p| <= 2 -> |p| <= 1.5", Regime::conservative,
                                "double_integrator", "double_integrator", detail::kRunningTarget,
                                "band axis=0 lo=-1.5 hi=1.5"));
  out.push_back(decreasing_control_scenario("b"));
  out.push_back(running_example("increasing_control", "control box: [-0.7,0.7] -> [-1,1]", Regime::conservative,
                                "double_integrator u=0.7", "double_integrator u=1"));
  out.push_back(running_example("increasing_disturbance", "disturbance box: [0,0] -> [-4,4]", Regime::exact,
                                "double_integrator d=0", "double_integrator d=4"));
  out.push_back(running_example("decreasing_disturbance", "disturbance box: [-4,4] -> [0,0]", Regime::conservative,
                                "double_integrator d=4", "double_integrator d=0"));
  out.push_back(detail::quad_study("quad_harder", "quad subsystems: |d| 1 -> 1.5 (4-D), m 5 -> 5.25 (2-D)",
                                   Regime::exact, 1.5, 5.25));
  out.push_back(detail::quad_study("quad_easier", "quad subsystems: |d| 1 -> 0.95 (4-D), m 5 -> 4.8 (2-D)",
                                   Regime::conservative, 0.95, 4.8));
  out.push_back(detail::init_demo("init_zero", "running example seeded with k = 0", "constant value=0"));
  out.push_back(detail::init_demo("init_random_circles", "running example seeded with the complement of 8 random circles",
                                  "circles seed=1 count=8 rmin=0.5 rmax=2"));
  out.push_back(detail::init_demo("init_wrong_gradient", "running example seeded with the negated target function",
                                  std::string(detail::kRunningTarget) + " negate=1"));
  return out;
}

inline Scenario find_scenario(const std::string& name) {
  for (auto& s : list_scenarios())
    if (s.name == name) return s;
  throw Error(Errc::not_found, "unknown scenario '" + name + "'");
}

namespace detail {

inline double parse_config_number(const std::string& v, const std::string& where) { return parse_double(v, where); }

/// Applies one INI section to a scenario. Problem keys may be prefixed with a
/// subsystem label ("quad2d.grid = ..."); unprefixed keys hit every problem.
inline void apply_section(Scenario& s, const boost::property_tree::ptree& section) {
  static const std::set<std::string> problem_keys = {"grid", "base_model", "changed_model", "base_target",
                                                     "changed_target", "seed", "exact_tolerance"};
  if (auto form = section.get_optional<std::string>("form")) {
    if (s.name != "decreasing_control") throw Error(Errc::config, "'form' only applies to decreasing_control");
    Scenario fresh = decreasing_control_scenario(*form);
    s.problems = fresh.problems;
    s.description = fresh.description;
  }
  for (const auto& [raw_key, node] : section) {
    const std::string value = node.get_value<std::string>();
    if (raw_key == "form") continue;
    if (raw_key == "gamma") {
      s.gamma = parse_config_number(value, s.name + ".gamma");
      continue;
    }
    if (raw_key == "threshold") {
      s.threshold = parse_config_number(value, s.name + ".threshold");
      continue;
    }
    if (raw_key == "max_steps") {
      const double m = parse_config_number(value, s.name + ".max_steps");
      if (m < 1 || m != std::floor(m)) throw Error(Errc::config, "max_steps must be a positive integer");
      s.max_steps = static_cast<std::size_t>(m);
      continue;
    }
    std::string label, key = raw_key;
    if (auto dot = raw_key.find('.'); dot != std::string::npos) {
      label = raw_key.substr(0, dot);
      key = raw_key.substr(dot + 1);
    }
    if (!problem_keys.count(key)) throw Error(Errc::config, "unknown key '" + raw_key + "' in [" + s.name + "]");
    bool matched = false;
    for (auto& p : s.problems) {
      if (!label.empty() && p.label != label) continue;
      matched = true;
      if (key == "grid") p.grid = merge_spec(p.grid, value);
      else if (key == "base_model") p.base_model = merge_spec(p.base_model, value);
      else if (key == "changed_model") p.changed_model = merge_spec(p.changed_model, value);
      else if (key == "base_target") p.base_target = merge_spec(p.base_target, value);
      else if (key == "changed_target") p.changed_target = merge_spec(p.changed_target, value);
      else if (key == "seed") p.seed = p.seed.empty() ? value : merge_spec(p.seed, value);
      else p.exact_tolerance = parse_config_number(value, raw_key);
    }
    if (!matched) throw Error(Errc::config, "no subsystem '" + label + "' in [" + s.name + "]");
  }
}

}  // namespace detail

/// Reads scenario overrides from an INI file: one [scenario_name] section per
/// scenario. Spec values are merged key-by-key into the registered spec.
inline std::vector<Scenario> apply_config(std::vector<Scenario> scenarios, const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::config, e.what());
  }
  for (const auto& [name, section] : tree) {
    auto it = std::find_if(scenarios.begin(), scenarios.end(), [&](const Scenario& s) { return s.name == name; });
    if (it == scenarios.end()) throw Error(Errc::not_found, "config names unknown scenario '" + name + "'");
    detail::apply_section(*it, section);
  }
  return scenarios;
}

namespace detail {

template <ControlAffineSystem M>
SubsystemReport solve_problem(const ProblemSpec& p, Regime regime, const M& base_model, const M& changed_model,
                              const RectGrid& grid, const SolveConfig& config, double gamma, bool anneal,
                              const ScenarioOptions& opt) {
  SubsystemReport rep;
  rep.label = p.label;
  rep.gamma = gamma;
  const ScalarField l0 = sample(build_target(p.base_target, grid), grid, "l");
  const ScalarField l1 = sample(build_target(p.changed_target, grid), grid, "l'");

  // One dissipation bound for both problems, so base and changed iterations
  // use the same monotone scheme and the comparison arguments carry over.
  auto alphas = flow_bound_per_dim(base_model, grid);
  const auto changed_alphas = flow_bound_per_dim(changed_model, grid);
  for (std::size_t a = 0; a < alphas.size(); ++a) alphas[a] = std::max(alphas[a], changed_alphas[a]);
  rep.alphas = alphas;
  const HamiltonianContext<M> ctx0(base_model, alphas), ctx1(changed_model, alphas);

  SolveConfig ref_config = config;
  if (opt.reference_threshold) {
    ref_config.threshold = *opt.reference_threshold;
    ref_config.max_macro_steps = std::max<std::size_t>(config.max_macro_steps, 100000);
  }
  auto refine = [&](const SolveResult& r, const ScalarField& l, const HamiltonianContext<M>& ctx,
                    std::optional<ModeStats>& stats) {
    if (!opt.reference_threshold) return r.value;
    SolveResult more = run(WarmStart{r.value}, l, ctx, ref_config);
    stats = stats_of(more);
    return more.value;
  };

  const SolveResult fresh = run(Standard{}, l1, ctx1, config);
  rep.standard = stats_of(fresh);
  rep.fresh = refine(fresh, l1, ctx1, rep.fresh_reference).relabeled("V_l'*");

  if (p.seed.empty()) {
    const SolveResult base = run(Standard{}, l0, ctx0, config);
    rep.base = stats_of(base);
    rep.base_value = refine(base, l0, ctx0, rep.base_reference).relabeled("V_l*");
    rep.seed = rep.base_value;
    if (regime == Regime::exact) rep.fresh_vs_base = compare(rep.fresh, rep.base_value, opt.conservative_tolerance);
  } else {
    rep.base = rep.standard;
    rep.base.skipped = true;
    rep.base.skip_reason = "seeded demo: base problem equals the changed problem";
    rep.base_value = rep.fresh;
    rep.seed = sample(build_target(p.seed, grid), grid, "k");
  }

  StepObserver observer;
  if (opt.track_sandwich) {
    rep.sandwich.emplace();
    const ScalarField start = init_field(WarmStart{rep.seed}, l1);
    observer = [&, start](std::size_t, const ScalarField& v) {
      auto& s = *rep.sandwich;
      for (std::size_t n = 0; n < v.size(); ++n) {
        s.max_below_seed = std::max(s.max_below_seed, start[n] - v[n]);
        s.max_above_fresh = std::max(s.max_above_fresh, v[n] - rep.fresh[n]);
        s.max_above_target = std::max(s.max_above_target, v[n] - l1[n]);
      }
      ++s.steps_checked;
    };
  }
  const SolveResult warm = run(WarmStart{rep.seed}, l1, ctx1, config, observer);
  rep.warm = stats_of(warm);
  rep.warm_value = warm.value.relabeled("V_k");

  const SolveResult disc = run(Discounted{rep.seed, gamma, anneal}, l1, ctx1, config);
  rep.discounted = stats_of(disc);
  rep.discounted_value = disc.value.relabeled("V_gamma");

  rep.warm_vs_fresh = compare(rep.warm_value, rep.fresh, opt.conservative_tolerance);
  rep.discounted_vs_fresh = compare(rep.discounted_value, rep.fresh, opt.conservative_tolerance);

  if (regime == Regime::exact) {
    rep.verdict = rep.warm_vs_fresh.max_abs_diff <= p.exact_tolerance;
    rep.verdict_text = rep.verdict ? "exact" : "not_exact";
  } else {
    rep.verdict = rep.warm_vs_fresh.violation_count == 0;
    if (rep.sandwich)
      rep.verdict = rep.verdict && rep.sandwich->max_below_seed <= 1e-12 &&
                    rep.sandwich->max_above_fresh <= opt.conservative_tolerance;
    rep.verdict_text = rep.verdict ? "conservative" : "not_conservative";
  }
  return rep;
}

}  // namespace detail

inline ScenarioReport run_scenario(const Scenario& s, const ScenarioOptions& options = {}) {
  SolveConfig config = options.config;
  if (s.threshold) config.threshold = *s.threshold;
  if (s.max_steps) config.max_macro_steps = *s.max_steps;
  config.validate();
  const double gamma = s.gamma.value_or(options.gamma);
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::config, "gamma must lie in (0, 1]");

  ScenarioReport report{s.name, s.description, s.regime, {}};
  for (const auto& p : s.problems) {
    const RectGrid grid = build_grid(p.grid);
    const AnyModel base = build_model(p.base_model);
    const AnyModel changed = build_model(p.changed_model);
    if (base.index() != changed.index())
      throw Error(Errc::config, p.label + ": base and changed models must be the same kind");
    std::visit(
        [&](const auto& b) {
          using M = std::decay_t<decltype(b)>;
          report.subsystems.push_back(detail::solve_problem(p, s.regime, b, std::get<M>(changed), grid, config,
                                                            gamma, options.anneal, options));
        },
        base);
  }
  return report;
}

inline ScenarioReport run_scenario(const std::string& name, const ScenarioOptions& options = {}) {
  return run_scenario(find_scenario(name), options);
}

enum class QuadDirection { harder, easier };

/// Study on the decomposed quadcopter: one report entry per subsystem
/// (the 4-D model stands for both the x and y subsystems).
inline ScenarioReport quad_decomposed_study(QuadDirection direction, const ScenarioOptions& options = {}) {
  return run_scenario(direction == QuadDirection::harder ? "quad_harder" : "quad_easier", options);
}

}  // namespace warmreach
