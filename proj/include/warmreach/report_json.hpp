#pragma once

// JSON views of solver results and reports, and the VFN metadata sidecar.
// Requires nlohmann/json (vendored as json.hpp).

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "warmreach/analysis.hpp"
#include "warmreach/persist.hpp"
#include "warmreach/scenarios.hpp"
#include "warmreach/solver.hpp"

namespace warmreach {

/// JSON has no infinities; an empty maximum serialises as null.
inline nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

inline nlohmann::json to_json(const ComparisonReport& r) {
  return {{"max_abs_diff", r.max_abs_diff},
          {"max_signed_excess", finite_or_null(r.max_signed_excess)},
          {"violation_count", r.violation_count},
          {"containment", r.containment},
          {"tolerance", r.tolerance}};
}

inline nlohmann::json to_json(const ModeStats& m) {
  nlohmann::json j = {{"steps", m.steps},
                      {"wall_time_seconds", m.wall_time},
                      {"converged", m.converged},
                      {"final_residual", m.final_residual}};
  if (m.skipped) j["skipped"] = m.skip_reason;
  return j;
}

inline nlohmann::json to_json(const SubsystemReport& s) {
  nlohmann::json j = {{"subsystem", s.label},
                      {"base", to_json(s.base)},
                      {"standard", to_json(s.standard)},
                      {"warm", to_json(s.warm)},
                      {"discounted", to_json(s.discounted)},
                      {"warm_vs_fresh", to_json(s.warm_vs_fresh)},
                      {"discounted_vs_fresh", to_json(s.discounted_vs_fresh)},
                      {"max_abs_diff", s.warm_vs_fresh.max_abs_diff},
                      {"max_signed_excess", finite_or_null(s.warm_vs_fresh.max_signed_excess)},
                      {"violation_count", s.warm_vs_fresh.violation_count},
                      {"alphas", s.alphas},
                      {"gamma", s.gamma},
                      {"regime_verdict", s.verdict_text}};
  if (s.base_reference) j["base_reference"] = to_json(*s.base_reference);
  if (s.fresh_reference) j["fresh_reference"] = to_json(*s.fresh_reference);
  if (s.fresh_vs_base) j["fresh_vs_base"] = to_json(*s.fresh_vs_base);
  if (s.sandwich)
    j["sandwich"] = {{"max_below_seed", finite_or_null(s.sandwich->max_below_seed)},
                     {"max_above_fresh", finite_or_null(s.sandwich->max_above_fresh)},
                     {"max_above_target", finite_or_null(s.sandwich->max_above_target)},
                     {"steps_checked", s.sandwich->steps_checked}};
  return j;
}

inline nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : r.subsystems) subs.push_back(to_json(s));
  nlohmann::json j = {{"scenario", r.scenario},
                      {"description", r.description},
                      {"regime", to_string(r.regime)},
                      {"regime_verdict", r.verdict() ? (r.regime == Regime::exact ? "exact" : "conservative")
                                                     : (r.regime == Regime::exact ? "not_exact" : "not_conservative")},
                      {"subsystems", subs}};
  // Single-system scenarios also expose the per-mode columns at top level.
  if (r.subsystems.size() == 1) {
    for (const char* k : {"standard", "warm", "discounted", "max_abs_diff", "max_signed_excess", "violation_count"})
      j[k] = subs[0][k];
  }
  return j;
}

struct Sidecar {
  std::string label;
  std::string scenario;
  std::size_t steps = 0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  std::optional<double> gamma;        // discounted solves only
  std::vector<double> gamma_history;  // per-step discount, discounted solves only
};

inline nlohmann::json to_json(const Sidecar& s) {
  nlohmann::json j = {{"label", s.label},
                      {"scenario", s.scenario},
                      {"steps", s.steps},
                      {"wall_time_seconds", s.wall_time_seconds},
                      {"converged", s.converged}};
  j["gamma"] = s.gamma ? nlohmann::json(*s.gamma) : nlohmann::json();
  if (!s.gamma_history.empty()) j["gamma_history"] = s.gamma_history;
  return j;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& vfn) {
  std::filesystem::path p = vfn;
  p += ".json";
  return p;
}

/// Writes field to `path` and its metadata to `path`.json, both atomically.
inline void save_with_sidecar(const ScalarField& field, const std::filesystem::path& path, const Sidecar& meta) {
  save_vfn(field, path);
  const std::string text = to_json(meta).dump(2) + "\n";
  detail::write_atomically(sidecar_path(path), [&](std::ostream& out) { out << text; });
}

}  // namespace warmreach
