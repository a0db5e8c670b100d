#pragma once

// Text descriptions of grids, models and targets, as used on the command line
// and in scenario configuration files. Every spec is a name followed by
// whitespace-separated key=value pairs; list values are comma separated.
//
//   grid:   "grid lo=-5,-5 hi=5,5 n=101,101"   (the leading name is optional)
//   model:  "double_integrator b=0.8 d=4"       "quad4d angle=10 d=1.5"
//           "quad2d m=5.25 dz=1"
//   target: "band axis=0 lo=-2 hi=2"            "box lo=-1,-1 hi=1,1"
//           "ball center=0,0 r=1"               "constant value=0"
//           "circles seed=3 count=8 rmin=0.5 rmax=2"
// Any target accepts negate=1, which flips its sign.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "warmreach/dynamics.hpp"
#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"
#include "warmreach/shapes.hpp"

namespace warmreach {

struct Spec {
  std::string name;
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  double number(const std::string& key, double fallback) const;
  double number(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::string text() const;
  void allow_only(std::initializer_list<const char*> keys) const;
};

inline double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
    throw Error(Errc::config, "'" + std::string(s) + "' is not a finite number (" + what + ")");
  return v;
}

inline double Spec::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : parse_double(it->second, name + "." + key);
}

inline double Spec::number(const std::string& key) const {
  if (!has(key)) throw Error(Errc::config, name + " requires " + key + "=");
  return number(key, 0.0);
}

inline std::vector<double> Spec::numbers(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw Error(Errc::config, name + " requires " + key + "=");
  std::vector<double> out;
  std::string_view rest = it->second;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(parse_double(rest.substr(0, comma), name + "." + key));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string Spec::text() const {
  std::string s = name;
  for (const auto& [k, v] : params) s += " " + k + "=" + v;
  return s;
}

inline void Spec::allow_only(std::initializer_list<const char*> keys) const {
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : params)
    if (!ok.count(k)) throw Error(Errc::config, "unknown key '" + k + "' for " + name);
}

inline Spec parse_spec(std::string_view text) {
  std::istringstream in{std::string(text)};
  Spec spec;
  std::string tok;
  bool first = true;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      if (!first) throw Error(Errc::config, "expected key=value, got '" + tok + "'");
      spec.name = tok;
    } else {
      const std::string key = tok.substr(0, eq);
      if (key.empty()) throw Error(Errc::config, "empty key in '" + tok + "'");
      if (!spec.params.emplace(key, tok.substr(eq + 1)).second)
        throw Error(Errc::config, "duplicate key '" + key + "'");
    }
    first = false;
  }
  return spec;
}

/// Overlays `overrides` on `base`: a new name replaces the old one (and drops
/// its parameters), otherwise individual keys are replaced.
inline std::string merge_spec(std::string_view base, std::string_view overrides) {
  Spec b = parse_spec(base), o = parse_spec(overrides);
  if (!o.name.empty() && o.name != b.name) return o.text();
  for (auto& [k, v] : o.params) b.params[k] = v;
  return b.text();
}

inline RectGrid build_grid(const Spec& s) {
  if (!s.name.empty() && s.name != "grid") throw Error(Errc::config, "grid spec must be named 'grid'");
  s.allow_only({"lo", "hi", "n"});
  const auto lo = s.numbers("lo"), hi = s.numbers("hi"), n = s.numbers("n");
  std::vector<std::size_t> counts;
  for (double c : n) {
    if (c < 0 || c != std::floor(c)) throw Error(Errc::config, "node counts must be non-negative integers");
    counts.push_back(static_cast<std::size_t>(c));
  }
  return make_grid(lo, hi, counts);
}

inline RectGrid build_grid(std::string_view text) { return build_grid(parse_spec(text)); }

inline AnyModel build_model(const Spec& s) {
  if (s.name == "double_integrator" || s.name == "di") {
    s.allow_only({"b", "u", "u_lo", "u_hi", "d", "d_lo", "d_hi"});
    const double u = s.number("u", 1.0), d = s.number("d", 0.0);
    return DoubleIntegrator(s.number("b", 1.0), {s.number("u_lo", -u), s.number("u_hi", u)},
                            {s.number("d_lo", -d), s.number("d_hi", d)});
  }
  if (s.name == "quad4d") {
    s.allow_only({"angle", "d", "g", "d0", "d1", "n0"});
    return Quad4D(s.number("angle", 10.0), s.number("d", 1.0), s.number("g", 9.81), s.number("d0", 10.0),
                  s.number("d1", 8.0), s.number("n0", 10.0));
  }
  if (s.name == "quad2d") {
    s.allow_only({"m", "dz", "kT", "g", "rated_mass", "tz_lo", "tz_hi"});
    const double m = s.number("m", 5.0), kT = s.number("kT", 4.55), g = s.number("g", 9.81);
    const auto rated = Quad2D::with_rated_thrust(m, s.number("dz", 1.0), s.number("rated_mass", 5.0), kT, g);
    return Quad2D(m, {s.number("tz_lo", rated.u_lo[0]), s.number("tz_hi", rated.u_hi[0])}, s.number("dz", 1.0), kT, g);
  }
  throw Error(Errc::config, "unknown model '" + s.name + "' (double_integrator, quad4d, quad2d)");
}

inline AnyModel build_model(std::string_view text) { return build_model(parse_spec(text)); }

/// Builds a target shape. The grid supplies the sampling box for "circles".
inline ImplicitShape build_target(const Spec& s, const RectGrid& grid) {
  const bool negate = s.number("negate", 0.0) != 0.0;
  ImplicitShape shape = ImplicitShape::constant(0.0);
  if (s.name == "band") {
    s.allow_only({"axis", "lo", "hi", "negate"});
    const double axis = s.number("axis", 0.0);
    if (axis < 0 || axis != std::floor(axis)) throw Error(Errc::config, "band axis must be a non-negative integer");
    shape = ImplicitShape::axis_band(static_cast<std::size_t>(axis), s.number("lo"), s.number("hi"));
  } else if (s.name == "box") {
    s.allow_only({"lo", "hi", "negate"});
    const auto lo = s.numbers("lo"), hi = s.numbers("hi");
    if (lo.size() != hi.size()) throw Error(Errc::config, "box lo and hi differ in length");
    std::vector<std::optional<Interval>> sides;
    for (std::size_t a = 0; a < lo.size(); ++a) sides.push_back(Interval{lo[a], hi[a]});
    shape = ImplicitShape::box(sides);
  } else if (s.name == "ball") {
    s.allow_only({"center", "r", "negate"});
    shape = ImplicitShape::ball(s.numbers("center"), s.number("r"));
  } else if (s.name == "constant") {
    s.allow_only({"value", "negate"});
    shape = ImplicitShape::constant(s.number("value", 0.0));
  } else if (s.name == "circles") {
    s.allow_only({"seed", "count", "rmin", "rmax", "negate"});
    const double seed = s.number("seed", 1.0), count = s.number("count", 8.0);
    if (seed < 0 || count < 0) throw Error(Errc::config, "circles seed and count must be non-negative");
    shape = random_circles(static_cast<std::uint32_t>(seed), static_cast<std::size_t>(count),
                           {s.number("rmin", 0.5), s.number("rmax", 2.0)}, grid);
  } else {
    throw Error(Errc::config, "unknown target '" + s.name + "' (band, box, ball, constant, circles)");
  }
  return negate ? ImplicitShape::complement(std::move(shape)) : shape;
}

inline ImplicitShape build_target(std::string_view text, const RectGrid& grid) {
  return build_target(parse_spec(text), grid);
}

}  // namespace warmreach
