#pragma once

// Flat key=value run configuration and the density descriptors it names:
//   const:c
//   harmonics:[(l,m,amp),...]   f = 1 + sum amp * Z_lm, Z_lm unit-peak (Z_10 = u.e3)
//   random:seed,eps,lambda      seeded density from gen_density

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "logmink/density.hpp"
#include "logmink/errors.hpp"
#include "logmink/experiments.hpp"
#include "logmink/io.hpp"

namespace logmink {

struct HarmonicTerm {
  int l = 0;
  int m = 0;
  double amp = 0;

  bool operator==(const HarmonicTerm&) const = default;
};

struct DensitySpec {
  enum class Kind { constant, harmonics, random };
  Kind kind = Kind::constant;
  double value = 1.0;
  std::vector<HarmonicTerm> terms;
  std::uint64_t seed = 0;
  double eps = 0;
  double lambda = 2;

  bool operator==(const DensitySpec&) const = default;
};

namespace detail {

template <class Int>
Int parse_integer(const std::string& text, const std::string& what) {
  std::string t = io::trim(text);
  Int v{};
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw InvalidParameter(what + ": not an integer: '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& text, const std::string& what) {
  std::string t = io::trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InvalidParameter(what + ": not a boolean: '" + text + "'");
}

inline double parse_number(const std::string& text, const std::string& what) {
  try {
    return io::parse_double(io::trim(text));
  } catch (const InvalidParameter&) {
    throw InvalidParameter(what + ": not a number: '" + text + "'");
  }
}

}  // namespace detail

inline DensitySpec parse_density(const std::string& descriptor) {
  const std::string d = io::trim(descriptor);
  const auto colon = d.find(':');
  if (colon == std::string::npos) throw InvalidParameter("density descriptor needs a kind prefix: '" + d + "'");
  const std::string kind = d.substr(0, colon);
  const std::string body = io::trim(d.substr(colon + 1));
  DensitySpec s;
  if (kind == "const") {
    s.kind = DensitySpec::Kind::constant;
    s.value = detail::parse_number(body, "const density");
    if (!(s.value > 0) || !std::isfinite(s.value)) throw InvalidParameter("const density must be positive and finite");
  } else if (kind == "harmonics") {
    s.kind = DensitySpec::Kind::harmonics;
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw InvalidParameter("harmonics descriptor must look like [(l,m,amp),...]");
    std::string inner = io::trim(std::string_view(body).substr(1, body.size() - 2));
    std::size_t pos = 0;
    while (pos < inner.size()) {
      auto open = inner.find('(', pos);
      auto close = inner.find(')', pos);
      if (open != pos || close == std::string::npos) throw InvalidParameter("malformed harmonic term in '" + body + "'");
      auto parts = io::split(std::string_view(inner).substr(open + 1, close - open - 1), ',');
      if (parts.size() != 3) throw InvalidParameter("harmonic term needs (l,m,amp)");
      HarmonicTerm t{detail::parse_integer<int>(parts[0], "harmonic degree"),
                     detail::parse_integer<int>(parts[1], "harmonic order"),
                     detail::parse_number(parts[2], "harmonic amplitude")};
      if (t.l < 0 || t.m < -t.l || t.m > t.l) throw InvalidParameter("harmonic term needs 0 <= |m| <= l");
      if (!std::isfinite(t.amp)) throw InvalidParameter("harmonic amplitude must be finite");
      s.terms.push_back(t);
      pos = inner.find_first_not_of(" \t", close + 1);
      if (pos == std::string::npos) break;
      if (inner[pos] != ',') throw InvalidParameter("harmonic terms must be separated by commas");
      pos = inner.find_first_not_of(" \t", pos + 1);
      if (pos == std::string::npos) throw InvalidParameter("trailing comma in harmonics descriptor");
    }
  } else if (kind == "random") {
    s.kind = DensitySpec::Kind::random;
    auto parts = io::split(body, ',');
    if (parts.size() != 3) throw InvalidParameter("random descriptor needs seed,eps,lambda");
    s.seed = detail::parse_integer<std::uint64_t>(parts[0], "random seed");
    s.eps = detail::parse_number(parts[1], "random eps");
    s.lambda = detail::parse_number(parts[2], "random lambda");
    if (!(s.eps >= 0) || !std::isfinite(s.eps)) throw InvalidParameter("random eps must be finite and >= 0");
    if (!(s.lambda > 1) || !std::isfinite(s.lambda)) throw InvalidParameter("random lambda must exceed 1");
  } else {
    throw InvalidParameter("unknown density kind '" + kind + "' (const, harmonics, random)");
  }
  return s;
}

inline std::string to_string(const DensitySpec& s) {
  switch (s.kind) {
    case DensitySpec::Kind::constant: return "const:" + io::format_double(s.value);
    case DensitySpec::Kind::harmonics: {
      std::vector<std::string> terms;
      for (const auto& t : s.terms)
        terms.push_back("(" + std::to_string(t.l) + "," + std::to_string(t.m) + "," + io::format_double(t.amp) + ")");
      return "harmonics:[" + io::join(terms, ",") + "]";
    }
    case DensitySpec::Kind::random: return random_descriptor(s.seed, s.eps, s.lambda);
  }
  return {};
}

/// Evaluates the descriptor on a grid. Harmonic degrees must be below the
/// bandwidth and the resulting f must be positive at every node.
inline DensityFunction make_density(const DensitySpec& s, const GridPtr& grid) {
  switch (s.kind) {
    case DensitySpec::Kind::constant: return DensityFunction::constant(grid, s.value);
    case DensitySpec::Kind::harmonics: {
      HarmonicCoeffs c = HarmonicCoeffs::zero(grid->bandwidth());
      c(0, 0) = std::sqrt(4.0 * std::numbers::pi);
      for (const auto& t : s.terms) {
        if (t.l >= grid->bandwidth())
          throw InvalidParameter("harmonic degree " + std::to_string(t.l) + " needs bandwidth > " + std::to_string(t.l));
        c(t.l, t.m) += t.amp * schmidt_factor(t.l);
      }
      return {c, grid};
    }
    case DensitySpec::Kind::random: return gen_density(s.seed, s.eps, s.lambda, grid);
  }
  throw InvalidParameter("bad density descriptor");
}

inline DensityFunction make_density(const std::string& descriptor, const GridPtr& grid) {
  return make_density(parse_density(descriptor), grid);
}

/// Run configuration. Experiment fields left unset fall back to the suite defaults.
struct Config {
  int grid_L = 16;
  double tol = 1e-10;
  int max_iter = 50;
  std::string out = ".";
  std::uint64_t seed = 42;
  std::string f = "const:1";
  std::string obj;
  std::string init = "const-1.0";
  double dt = 1e-3;
  double t_end = 0;
  bool renormalize = true;
  int snapshot_every = 0;
  std::string kind = "uniqueness";
  std::optional<int> samples;
  std::optional<double> eps;
  std::optional<double> lambda;
  std::optional<std::string> inits;

  bool operator==(const Config&) const = default;

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {"grid_L", "tol",  "max_iter",    "out",   "seed",           "f",
                                               "obj",    "init", "dt",          "t_end", "renormalize",    "snapshot_every",
                                               "kind",   "samples", "eps",      "lambda", "inits"};
    return k;
  }

  /// Parses and stores one value; every key is validated on entry.
  void set(const std::string& key, const std::string& raw) {
    const std::string v = io::trim(raw);
    if (key == "grid_L") {
      grid_L = detail::parse_integer<int>(v, key);
      if (grid_L < 4 || grid_L > 128) throw InvalidParameter("grid_L must lie in [4, 128]");
    } else if (key == "tol") {
      tol = detail::parse_number(v, key);
      if (!(tol > 0)) throw InvalidParameter("tol must be positive");
    } else if (key == "max_iter") {
      max_iter = detail::parse_integer<int>(v, key);
      if (max_iter < 1) throw InvalidParameter("max_iter must be >= 1");
    } else if (key == "out") {
      if (v.empty()) throw InvalidParameter("out must not be empty");
      out = v;
    } else if (key == "seed") {
      seed = detail::parse_integer<std::uint64_t>(v, key);
    } else if (key == "f") {
      f = to_string(parse_density(v));
    } else if (key == "obj") {
      obj = v;
    } else if (key == "init") {
      if (std::find(all_init_strategies().begin(), all_init_strategies().end(), v) == all_init_strategies().end())
        throw InvalidParameter("unknown init strategy '" + v + "'");
      init = v;
    } else if (key == "dt") {
      dt = detail::parse_number(v, key);
      if (!(dt > 0)) throw InvalidParameter("dt must be positive");
    } else if (key == "t_end") {
      t_end = detail::parse_number(v, key);
      if (!(t_end >= 0)) throw InvalidParameter("t_end must be >= 0");
    } else if (key == "renormalize") {
      renormalize = detail::parse_bool(v, key);
    } else if (key == "snapshot_every") {
      snapshot_every = detail::parse_integer<int>(v, key);
      if (snapshot_every < 0) throw InvalidParameter("snapshot_every must be >= 0");
    } else if (key == "kind") {
      kind = to_string(parse_suite_kind(v));
    } else if (key == "samples") {
      samples = detail::parse_integer<int>(v, key);
      if (*samples < 1) throw InvalidParameter("samples must be >= 1");
    } else if (key == "eps") {
      eps = detail::parse_number(v, key);
      if (!(*eps >= 0) || !std::isfinite(*eps)) throw InvalidParameter("eps must be finite and >= 0");
    } else if (key == "lambda") {
      lambda = detail::parse_number(v, key);
      if (!(*lambda > 1)) throw InvalidParameter("lambda must exceed 1");
    } else if (key == "inits") {
      std::vector<std::string> names;
      for (const auto& part : io::split(v, ';')) names.push_back(io::trim(part));
      ExperimentSpec probe;
      probe.inits = names;
      probe.validate();
      inits = io::join(names, ";");
    } else {
      throw InvalidParameter("unknown config key '" + key + "'");
    }
  }

  /// Experiment spec from the suite defaults overridden by the set fields.
  ExperimentSpec experiment_spec() const {
    ExperimentSpec s = ExperimentSpec::defaults(parse_suite_kind(kind));
    s.seed = seed;
    s.bandwidth = grid_L;
    s.tolerance = tol;
    if (samples) s.samples = *samples;
    if (eps) s.eps = *eps;
    if (lambda) s.lambda = *lambda;
    if (inits) s.inits = io::split(*inits, ';');
    s.validate();
    return s;
  }
};

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; unknown and repeated keys are errors.
inline Config parse_config(const std::string& text, Config base = {}) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> seen;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    std::string t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = io::trim(std::string_view(t).substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw InvalidParameter("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen.push_back(key);
    try {
      base.set(key, t.substr(eq + 1));
    } catch (const InvalidParameter& e) {
      throw InvalidParameter("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

/// Canonical text: every key in fixed order, shortest round-trip numbers,
/// unset experiment fields omitted.
inline std::string to_string(const Config& c) {
  std::ostringstream out;
  out << "grid_L = " << c.grid_L << '\n'
      << "tol = " << io::format_double(c.tol) << '\n'
      << "max_iter = " << c.max_iter << '\n'
      << "out = " << c.out << '\n'
      << "seed = " << c.seed << '\n'
      << "f = " << c.f << '\n';
  if (!c.obj.empty()) out << "obj = " << c.obj << '\n';
  out << "init = " << c.init << '\n'
      << "dt = " << io::format_double(c.dt) << '\n'
      << "t_end = " << io::format_double(c.t_end) << '\n'
      << "renormalize = " << (c.renormalize ? "true" : "false") << '\n'
      << "snapshot_every = " << c.snapshot_every << '\n'
      << "kind = " << c.kind << '\n';
  if (c.samples) out << "samples = " << *c.samples << '\n';
  if (c.eps) out << "eps = " << io::format_double(*c.eps) << '\n';
  if (c.lambda) out << "lambda = " << io::format_double(*c.lambda) << '\n';
  if (c.inits) out << "inits = " << *c.inits << '\n';
  return out.str();
}

}  // namespace logmink
