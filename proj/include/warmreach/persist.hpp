#pragma once

// VFN1 value-function files, CSV dumps and zero-level contours.
//
// VFN1 layout, little-endian throughout:
//   "VFN1" | u32 version = 1 | u32 ndim | ndim × (u64 count, f64 lo, f64 hi) | f64 values
// Values are row-major with the last axis fastest, matching ScalarField.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "warmreach/error.hpp"
#include "warmreach/grid.hpp"

namespace warmreach {

inline constexpr std::uint32_t kVfnVersion = 1;

namespace detail {

template <class T>
void put_le(std::string& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

template <class T>
T get_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

inline void read_exact(std::istream& in, unsigned char* dst, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw Error(Errc::truncated, std::string("file ends inside ") + what);
}

/// Writes through a sibling temporary and renames it over `path`, so readers
/// never observe a partial file.
template <class Writer>
void write_atomically(const std::filesystem::path& path, Writer&& write) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    write(out);
    out.flush();
    if (!out) throw Error(Errc::io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

inline std::string shortest(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace detail

inline std::size_t save_vfn(const ScalarField& field, std::ostream& out) {
  const RectGrid& g = field.grid();
  std::string buf;
  buf.reserve(12 + 24 * g.ndim() + 8 * field.size());
  buf.append("VFN1", 4);
  detail::put_le(buf, kVfnVersion);
  detail::put_le(buf, static_cast<std::uint32_t>(g.ndim()));
  for (std::size_t a = 0; a < g.ndim(); ++a) {
    detail::put_le(buf, static_cast<std::uint64_t>(g.count(a)));
    detail::put_le(buf, g.lo(a));
    detail::put_le(buf, g.hi(a));
  }
  for (double v : field.values()) detail::put_le(buf, v);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(Errc::io, "value-function write failed");
  return buf.size();
}

inline std::size_t save_vfn(const ScalarField& field, const std::filesystem::path& path) {
  std::size_t bytes = 0;
  detail::write_atomically(path, [&](std::ostream& out) { bytes = save_vfn(field, out); });
  return bytes;
}

inline ScalarField load_vfn(std::istream& in, std::string label = {}) {
  unsigned char head[12];
  detail::read_exact(in, head, 4, "magic");
  if (std::memcmp(head, "VFN", 3) != 0) throw Error(Errc::bad_magic, "not a VFN value-function file");
  if (head[3] != '1') throw Error(Errc::unsupported_version, "unsupported VFN revision '" + std::string(1, head[3]) + "'");
  detail::read_exact(in, head + 4, 8, "header");
  const auto version = detail::get_le<std::uint32_t>(head + 4);
  if (version != kVfnVersion) throw Error(Errc::unsupported_version, "VFN version " + std::to_string(version));
  const auto ndim = detail::get_le<std::uint32_t>(head + 8);
  if (ndim == 0 || ndim > 64) throw Error(Errc::dimension_mismatch, "implausible dimension count " + std::to_string(ndim));

  std::vector<double> lo(ndim), hi(ndim);
  std::vector<std::size_t> counts(ndim);
  for (std::uint32_t a = 0; a < ndim; ++a) {
    unsigned char axis[24];
    detail::read_exact(in, axis, 24, "axis record");
    const auto c = detail::get_le<std::uint64_t>(axis);
    if (c > std::numeric_limits<std::size_t>::max()) throw Error(Errc::size_overflow, "axis count too large");
    counts[a] = static_cast<std::size_t>(c);
    lo[a] = detail::get_le<double>(axis + 8);
    hi[a] = detail::get_le<double>(axis + 16);
  }
  RectGrid grid = make_grid(lo, hi, counts);

  std::vector<unsigned char> payload(8 * grid.node_count());
  detail::read_exact(in, payload.data(), payload.size(), "payload");
  std::vector<double> values(grid.node_count());
  for (std::size_t n = 0; n < values.size(); ++n) values[n] = detail::get_le<double>(payload.data() + 8 * n);
  return ScalarField(std::move(grid), std::move(values), std::move(label));
}

inline ScalarField load_vfn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return load_vfn(in, path.stem().string());
}

/// Header "x0,…,x{n−1},value" then one row per node; shortest round-trip
/// decimal formatting. Returns the number of data rows.
inline std::size_t export_csv(const ScalarField& field, std::ostream& out) {
  const RectGrid& g = field.grid();
  if (g.ndim() > 3) throw Error(Errc::unsupported_dimension, "CSV export supports at most 3 dimensions");
  for (std::size_t a = 0; a < g.ndim(); ++a) out << 'x' << a << ',';
  out << "value\n";
  for (std::size_t n = 0; n < field.size(); ++n) {
    for (std::size_t a = 0; a < g.ndim(); ++a) out << detail::shortest(g.coordinate(a, g.axis_index(n, a))) << ',';
    out << detail::shortest(field[n]) << '\n';
  }
  if (!out) throw Error(Errc::io, "CSV write failed");
  return field.size();
}

using Point2 = std::array<double, 2>;
using Polyline = std::vector<Point2>;

/// Marching squares on the {V ≤ 0} classification. Crossings are placed by
/// linear interpolation on cell edges; saddle cells follow the sign of the
/// cell-centre average. Segments are chained through shared edges, so a closed
/// curve comes back with its first vertex repeated at the end.
inline std::vector<Polyline> zero_contour(const ScalarField& field) {
  const RectGrid& g = field.grid();
  if (g.ndim() != 2) throw Error(Errc::unsupported_dimension, "contours need a 2-D field");
  const std::size_t n0 = g.count(0), n1 = g.count(1);
  auto node = [&](std::size_t i, std::size_t j) { return i * n1 + j; };
  auto inside = [&](std::size_t n) { return field[n] <= 0.0; };

  // Edges are keyed by their lower node and direction (0: along axis 0, 1: along axis 1).
  auto edge_key = [&](std::size_t n, int dir) { return 2 * n + static_cast<std::size_t>(dir); };
  std::map<std::size_t, Point2> crossing;
  auto crossing_on = [&](std::size_t key) -> Point2 {
    if (auto it = crossing.find(key); it != crossing.end()) return it->second;
    const std::size_t a = key / 2;
    const int dir = static_cast<int>(key % 2);
    const std::size_t b = dir == 0 ? a + n1 : a + 1;
    const double va = field[a], vb = field[b];
    const double t = (va == vb) ? 0.5 : std::clamp(va / (va - vb), 0.0, 1.0);
    const std::size_t i = a / n1, j = a % n1;
    Point2 p{g.coordinate(0, i), g.coordinate(1, j)};
    p[dir] += t * g.spacing(dir);
    crossing.emplace(key, p);
    return p;
  };

  std::vector<std::pair<std::size_t, std::size_t>> segments;
  for (std::size_t i = 0; i + 1 < n0; ++i)
    for (std::size_t j = 0; j + 1 < n1; ++j) {
      // Corners counter-clockwise: (i,j) (i+1,j) (i+1,j+1) (i,j+1); edges between them.
      const std::size_t c[4] = {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
      const std::size_t e[4] = {edge_key(c[0], 0), edge_key(c[1], 1), edge_key(c[3], 0), edge_key(c[0], 1)};
      unsigned mask = 0;
      for (int k = 0; k < 4; ++k) mask |= (inside(c[k]) ? 1u : 0u) << k;
      if (mask == 0 || mask == 15) continue;
      std::vector<std::size_t> cut;
      for (int k = 0; k < 4; ++k)
        if (inside(c[k]) != inside(c[(k + 1) % 4])) cut.push_back(e[k]);
      if (cut.size() == 2) {
        segments.emplace_back(cut[0], cut[1]);
        continue;
      }
      // Saddle: corners 0 and 2 share a class, as do 1 and 3.
      const double centre = 0.25 * (field[c[0]] + field[c[1]] + field[c[2]] + field[c[3]]);
      const bool even_inside = inside(c[0]);
      if ((centre <= 0.0) == even_inside) {
        // The even corners connect through the centre; cut around the odd ones.
        segments.emplace_back(e[0], e[1]);
        segments.emplace_back(e[2], e[3]);
      } else {
        segments.emplace_back(e[3], e[0]);
        segments.emplace_back(e[1], e[2]);
      }
    }

  std::multimap<std::size_t, std::size_t> by_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_edge.emplace(segments[s].first, s);
    by_edge.emplace(segments[s].second, s);
  }
  std::vector<bool> used(segments.size(), false);
  auto next_segment = [&](std::size_t edge) -> std::ptrdiff_t {
    auto [lo, hi] = by_edge.equal_range(edge);
    for (auto it = lo; it != hi; ++it)
      if (!used[it->second]) return static_cast<std::ptrdiff_t>(it->second);
    return -1;
  };
  auto other_end = [&](std::size_t s, std::size_t edge) {
    return segments[s].first == edge ? segments[s].second : segments[s].first;
  };
  auto degree = [&](std::size_t edge) { return by_edge.count(edge); };

  std::vector<Polyline> lines;
  auto trace = [&](std::size_t start_seg, std::size_t start_edge) {
    std::vector<std::size_t> chain{start_edge};
    std::size_t s = start_seg, edge = start_edge;
    for (;;) {
      used[s] = true;
      edge = other_end(s, edge);
      chain.push_back(edge);
      const auto nxt = next_segment(edge);
      if (nxt < 0) break;
      s = static_cast<std::size_t>(nxt);
    }
    Polyline line;
    line.reserve(chain.size());
    for (auto k : chain) line.push_back(crossing_on(k));
    lines.push_back(std::move(line));
  };
  // Open curves start at edges used once (grid border); the rest are loops.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    if (degree(segments[s].first) == 1)
      trace(s, segments[s].first);
    else if (degree(segments[s].second) == 1)
      trace(s, segments[s].second);
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) trace(s, segments[s].first);
  return lines;
}

}  // namespace warmreach
