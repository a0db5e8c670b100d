#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace warmreach {

/// Error categories raised by the library. Each precondition failure named in
/// the module contracts maps to exactly one code so callers (and tests) can
/// tell them apart without parsing messages.
enum class Errc {
  dimension_mismatch,
  count_too_small,
  inverted_bounds,
  size_overflow,
  non_finite,
  degenerate_dynamics,
  invalid_argument,
  axis_out_of_range,
  arity,
  empty_range,
  input_out_of_bounds,
  unbounded_nonlinearity,
  grid_mismatch,
  cfl_violation,
  outside_grid,
  unsupported_dimension,
  bad_magic,
  unsupported_version,
  truncated,
  io,
  not_found,
  config,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::count_too_small: return "count_too_small";
    case Errc::inverted_bounds: return "inverted_bounds";
    case Errc::size_overflow: return "size_overflow";
    case Errc::non_finite: return "non_finite";
    case Errc::degenerate_dynamics: return "degenerate_dynamics";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::axis_out_of_range: return "axis_out_of_range";
    case Errc::arity: return "arity";
    case Errc::empty_range: return "empty_range";
    case Errc::input_out_of_bounds: return "input_out_of_bounds";
    case Errc::unbounded_nonlinearity: return "unbounded_nonlinearity";
    case Errc::grid_mismatch: return "grid_mismatch";
    case Errc::cfl_violation: return "cfl_violation";
    case Errc::outside_grid: return "outside_grid";
    case Errc::unsupported_dimension: return "unsupported_dimension";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::truncated: return "truncated";
    case Errc::io: return "io";
    case Errc::not_found: return "not_found";
    case Errc::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace warmreach
