#pragma once

// Conductance environments: i.i.d. laws sampled by per-bond counter-based
// hashing, the trap example, space shifts and the v1 text format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rcm/conductance.hpp"
#include "rcm/error.hpp"
#include "rcm/lattice.hpp"
#include "rcm/rng.hpp"

namespace rcm {

struct ConstantLaw {
  double c = 1.0;
};

/// With probability ½ each: ω = U^{-1/a} (P(ω > s) = s^{-a} on s ≥ 1) or
/// ω = U^{1/b} (P(ω^{-1} > s) = s^{-b} on s ≥ 1).
struct ParetoMixtureLaw {
  double a = 8.0;
  double b = 8.0;
};

/// ω ≡ 1 except ω(0,y) = n^{-d/q'} on the 2d bonds at the origin.
struct TrapLaw {
  std::int64_t n = 1;
  double qprime = 1.0;
};

struct FileLaw {
  std::string path;
};

struct EnvironmentLaw {
  std::variant<ConstantLaw, ParetoMixtureLaw, TrapLaw, FileLaw> kind = ConstantLaw{};
  std::uint64_t seed = 0;
};

inline void validate(const EnvironmentLaw& law) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ConstantLaw>) {
          if (!(k.c > 0.0) || !std::isfinite(k.c)) throw ConfigError("constant law needs c > 0");
        } else if constexpr (std::is_same_v<K, ParetoMixtureLaw>) {
          if (!(k.a > 1.0) || !std::isfinite(k.a)) throw ConfigError("pareto_mixture needs a > 1");
          if (!(k.b > 0.0) || !std::isfinite(k.b)) throw ConfigError("pareto_mixture needs b > 0");
        } else if constexpr (std::is_same_v<K, TrapLaw>) {
          if (k.n < 1) throw ConfigError("trap needs n >= 1");
          if (!(k.qprime > 0.0)) throw ConfigError("trap needs q' > 0");
        } else {
          if (k.path.empty()) throw ConfigError("file law needs a path");
        }
      },
      law.kind);
}

/// Human-readable law, also the syntax accepted by parse_law.
inline std::string describe(const EnvironmentLaw& law) {
  char buf[128];
  return std::visit(
      [&](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ConstantLaw>) {
          std::snprintf(buf, sizeof buf, "constant(%.17g)", k.c);
        } else if constexpr (std::is_same_v<K, ParetoMixtureLaw>) {
          std::snprintf(buf, sizeof buf, "pareto_mixture(%.17g,%.17g)", k.a, k.b);
        } else if constexpr (std::is_same_v<K, TrapLaw>) {
          std::snprintf(buf, sizeof buf, "trap(%lld,%.17g)", static_cast<long long>(k.n), k.qprime);
        } else {
          return "file(" + k.path + ")";
        }
        return buf;
      },
      law.kind);
}

/// Philox counter for a bond: the coordinates (30-bit two's complement) in
/// words 0..d-1, the axis in the top two bits of word 3.
inline Philox4x32::Counter bond_counter(const Bond& b) {
  Philox4x32::Counter c{0, 0, 0, 0};
  for (int i = 0; i < b.lower.dim(); ++i) {
    const auto v = b.lower[i];
    if (v >= (std::int64_t{1} << 29) || v < -(std::int64_t{1} << 29))
      throw DomainError("bond coordinate too large for per-bond hashing");
    c[i] = static_cast<std::uint32_t>(v) & 0x3fffffffu;
  }
  c[3] |= static_cast<std::uint32_t>(b.axis) << 30;
  return c;
}

/// One pareto_mixture draw from two independent uniforms.
inline double pareto_mixture_value(const ParetoMixtureLaw& law, double branch, double u) {
  return branch < 0.5 ? std::pow(u, -1.0 / law.a) : std::pow(u, 1.0 / law.b);
}

inline ConductanceField trap_environment(std::int64_t n, double qprime, int d, const LatticeBox& box);
inline ConductanceField load(const std::string& path);

/// Samples ω on every bond of the box. The value of a bond depends only on
/// (law, seed, bond), never on the box or on enumeration order.
inline ConductanceField generate(const EnvironmentLaw& law, const LatticeBox& box) {
  validate(law);
  return std::visit(
      [&](const auto& k) -> ConductanceField {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ConstantLaw>) {
          return {box, k.c};
        } else if constexpr (std::is_same_v<K, ParetoMixtureLaw>) {
          const auto key = philox_key(law.seed);
          return ConductanceField::from_function(box, [&](const Bond& b) {
            const auto r = Philox4x32::apply(bond_counter(b), key);
            const double branch = to_unit_open((std::uint64_t{r[1]} << 32) | r[0]);
            const double u = to_unit_open((std::uint64_t{r[3]} << 32) | r[2]);
            return pareto_mixture_value(k, branch, u);
          });
        } else if constexpr (std::is_same_v<K, TrapLaw>) {
          return trap_environment(k.n, k.qprime, box.dim(), box);
        } else {
          const ConductanceField full = load(k.path);
          if (!full.box().contains(box)) throw ConfigError("environment file does not cover the requested box");
          return ConductanceField::from_function(box, [&](const Bond& b) { return full.at(b); });
        }
      },
      law.kind);
}

inline ConductanceField trap_environment(std::int64_t n, double qprime, int d, const LatticeBox& box) {
  if (n < 1) throw ConfigError("trap needs n >= 1");
  if (!(qprime > 0.0)) throw ConfigError("trap needs q' > 0");
  if (box.dim() != d) throw ConfigError("trap dimension does not match box");
  const Point o = origin(d);
  if (!box.contains(o) || box.on_boundary(o)) throw ConfigError("trap needs the origin in the box interior");
  const double low = std::pow(static_cast<double>(n), -static_cast<double>(d) / qprime);
  return ConductanceField::from_function(box, [&](const Bond& b) {
    return (b.lower == o || b.upper() == o) ? low : 1.0;
  });
}

/// (τ_x ω)(e) = ω(e + x) on the box centred at center − x (same radius).
inline ConductanceField shift(const ConductanceField& w, const Point& x) {
  const LatticeBox target(w.box().center() - x, w.box().radius());
  return ConductanceField::from_function(target, [&](const Bond& b) { return w.at(Bond{b.lower + x, b.axis}); });
}

/// τ_x ω restricted to a chosen target box; every shifted bond must lie in
/// the ambient box of ω.
inline ConductanceField shift(const ConductanceField& w, const Point& x, const LatticeBox& target) {
  const LatticeBox needed(target.center() + x, target.radius());
  if (!w.box().contains(needed)) throw DomainError("shift by " + x.str() + " leaves the ambient box");
  return ConductanceField::from_function(target, [&](const Bond& b) { return w.at(Bond{b.lower + x, b.axis}); });
}

// ---------------------------------------------------------------- v1 format

inline void save(const ConductanceField& w, std::ostream& os) {
  const LatticeBox& box = w.box();
  os << "rcm-env v1 d=" << box.dim() << " center=";
  for (int a = 0; a < box.dim(); ++a) os << (a ? "," : "") << box.center()[a];
  os << " n=" << box.radius() << '\n';
  char buf[64];
  w.for_each_bond([&](const Bond& b, double v) {
    for (int a = 0; a < box.dim(); ++a) os << b.lower[a] << ' ';
    std::snprintf(buf, sizeof buf, "%d %.16e\n", b.axis + 1, v);
    os << buf;
  });
}

inline void save(const ConductanceField& w, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  save(w, os);
  if (!os) throw Error("write to " + path + " failed");
}

namespace detail {
template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}
}  // namespace detail

/// Inverse of describe: `constant(c)`, `pareto_mixture(a,b)`, `trap(n,q')`
/// or `file(path)`; spaces around names and arguments are ignored.
inline EnvironmentLaw parse_law(std::string_view text, std::uint64_t seed = 0) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
    return v;
  };
  const std::string_view s = trim(text);
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') throw ConfigError("law '" + std::string(s) + "' is not name(args)");
  const std::string_view name = trim(s.substr(0, open));
  const std::string_view inner = s.substr(open + 1, s.size() - open - 2);
  EnvironmentLaw law;
  law.seed = seed;
  if (name == "file") {
    law.kind = FileLaw{std::string(trim(inner))};
    validate(law);
    return law;
  }
  std::vector<double> args;
  std::size_t i = 0;
  while (i <= inner.size()) {
    const auto comma = std::min(inner.find(',', i), inner.size());
    double v = 0.0;
    if (!detail::parse_number(trim(inner.substr(i, comma - i)), v))
      throw ConfigError("law '" + std::string(s) + "' has a non-numeric argument");
    args.push_back(v);
    i = comma + 1;
  }
  auto want = [&](std::size_t k) {
    if (args.size() != k)
      throw ConfigError("law '" + std::string(name) + "' takes " + std::to_string(k) + " argument(s)");
  };
  if (name == "constant") {
    want(1);
    law.kind = ConstantLaw{args[0]};
  } else if (name == "pareto_mixture") {
    want(2);
    law.kind = ParetoMixtureLaw{args[0], args[1]};
  } else if (name == "trap") {
    want(2);
    if (args[0] != std::floor(args[0])) throw ConfigError("trap size must be an integer");
    law.kind = TrapLaw{static_cast<std::int64_t>(args[0]), args[1]};
  } else {
    throw ConfigError("unknown law '" + std::string(name) + "'");
  }
  validate(law);
  return law;
}

inline ConductanceField load(std::istream& is, const std::string& name = "<stream>") {
  auto fail = [&](std::size_t line, const std::string& why) -> FormatError {
    return FormatError(name + ":" + std::to_string(line) + ": " + why);
  };
  std::string line;
  if (!std::getline(is, line)) throw fail(1, "missing header");
  const auto head = detail::split_ws(line);
  if (head.size() != 5 || head[0] != "rcm-env") throw fail(1, "malformed header");
  if (head[1] != "v1") throw fail(1, "unsupported version '" + std::string(head[1]) + "'");
  int d = 0;
  if (!head[2].starts_with("d=") || !detail::parse_number(head[2].substr(2), d) || d < 1 || d > kMaxDim)
    throw fail(1, "bad dimension field");
  if (!head[3].starts_with("center=")) throw fail(1, "bad center field");
  Point center(d);
  {
    std::string_view cs = head[3].substr(7);
    for (int a = 0; a < d; ++a) {
      const auto comma = cs.find(',');
      const bool last = a == d - 1;
      if (last != (comma == std::string_view::npos)) throw fail(1, "center has wrong number of coordinates");
      std::int64_t v = 0;
      if (!detail::parse_number(cs.substr(0, comma), v)) throw fail(1, "bad center coordinate");
      center[a] = v;
      if (!last) cs = cs.substr(comma + 1);
    }
  }
  std::int64_t radius = 0;
  if (!head[4].starts_with("n=") || !detail::parse_number(head[4].substr(2), radius) || radius < 0)
    throw fail(1, "bad radius field");
  const LatticeBox box(center, radius);
  const BondSet bonds = bonds_within(box);

  std::vector<double> values(bonds.size());
  std::size_t lineno = 1;
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    ++lineno;
    if (!std::getline(is, line)) throw fail(lineno, "truncated file: expected " + std::to_string(bonds.size()) + " bonds");
    const auto tok = detail::split_ws(line);
    if (tok.size() != static_cast<std::size_t>(d) + 2) throw fail(lineno, "expected " + std::to_string(d + 2) + " fields");
    Point x(d);
    for (int a = 0; a < d; ++a) {
      std::int64_t v = 0;
      if (!detail::parse_number(tok[a], v)) throw fail(lineno, "bad coordinate");
      x[a] = v;
    }
    int axis = 0;
    if (!detail::parse_number(tok[d], axis) || axis < 1 || axis > d) throw fail(lineno, "bad axis");
    double v = 0.0;
    if (!detail::parse_number(tok[d + 1], v)) throw fail(lineno, "bad value");
    if (!(v > 0.0) || !std::isfinite(v)) throw fail(lineno, "conductance must be positive and finite");
    if (!(Bond{x, axis - 1} == bonds[k])) throw fail(lineno, "bond out of canonical order or outside the box");
    values[k] = v;
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (!detail::split_ws(line).empty()) throw fail(lineno, "trailing data after last bond");
  }
  std::size_t k = 0;
  return ConductanceField::from_function(box, [&](const Bond&) { return values[k++]; });
}

inline ConductanceField load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  return load(is, path);
}

}  // namespace rcm
