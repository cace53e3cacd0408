#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stohom/convergence.hpp"
#include "stohom/elliptic_map.hpp"
#include "stohom/field.hpp"
#include "stohom/gaussian.hpp"
#include "stohom/grid.hpp"
#include "stohom/measure.hpp"
#include "stohom/rational.hpp"
#include "stohom/resonance.hpp"

namespace stohom {

/// One validation finding: the offending key path, what is wrong, how to fix it.
struct Diagnostic {
  std::string key;
  std::string message;
  std::string remedy;

  std::string format() const { return key + ": " + message + " (" + remedy + ")"; }
};

/**
 * @brief Typed experiment description decoded from a JSON config file.
 *
 * Every run is fully determined by this structure plus the thread count;
 * master_seed is mandatory so no run ever seeds from the wall clock.
 */
struct ExperimentConfig {
  std::string command;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";

  GridSpec grid;
  double solver_tol = 1e-9;
  int solver_max_iter = 10000;
  int samples = 1;

  std::optional<StationaryMeasureSpec> measure;
  std::optional<FrequencySet> frequencies;

  std::vector<double> study_eps;
  int study_cells_per_eps = 16;
  double study_tol = 1e-10;
  int study_max_iter = 20000;
  double study_length = 1.0;
};

namespace detail {

inline void add_diag(std::vector<Diagnostic>& out, std::string key, std::string message,
                     std::string remedy) {
  out.push_back({std::move(key), std::move(message), std::move(remedy)});
}

/// Unknown keys are configuration errors, never warnings.
inline void check_keys(const nlohmann::json& j, const std::string& path,
                       std::initializer_list<const char*> allowed,
                       std::vector<Diagnostic>& out) {
  if (!j.is_object()) return;
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      std::string known;
      for (const char* k : allowed) {
        if (!known.empty()) known += ", ";
        known += k;
      }
      add_diag(out, path.empty() ? item.key() : path + "." + item.key(), "unknown key",
               "remove it; known keys here are: " + known);
    }
  }
}

inline bool want_object(const nlohmann::json& j, const std::string& path,
                        std::vector<Diagnostic>& out) {
  if (j.is_object()) return true;
  add_diag(out, path, "must be an object", "use { ... }");
  return false;
}

inline bool get_number(const nlohmann::json& j, const std::string& path, const char* key,
                       double& value, std::vector<Diagnostic>& out, bool required,
                       double fallback = 0.0) {
  value = fallback;
  if (!j.contains(key)) {
    if (required) add_diag(out, path + "." + key, "missing required key", "add it");
    return false;
  }
  if (!j.at(key).is_number()) {
    add_diag(out, path + "." + key, "must be a number", "use a numeric literal");
    return false;
  }
  value = j.at(key).get<double>();
  return true;
}

inline bool get_int(const nlohmann::json& j, const std::string& path, const char* key,
                    std::int64_t& value, std::vector<Diagnostic>& out, bool required,
                    std::int64_t fallback = 0) {
  value = fallback;
  if (!j.contains(key)) {
    if (required) add_diag(out, path + "." + key, "missing required key", "add it");
    return false;
  }
  if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned()) {
    add_diag(out, path + "." + key, "must be an integer", "use an integer literal");
    return false;
  }
  value = j.at(key).get<std::int64_t>();
  return true;
}

inline bool get_string(const nlohmann::json& j, const std::string& path, const char* key,
                       std::string& value, std::vector<Diagnostic>& out, bool required,
                       std::string fallback = "") {
  value = std::move(fallback);
  if (!j.contains(key)) {
    if (required) add_diag(out, path + "." + key, "missing required key", "add it");
    return false;
  }
  if (!j.at(key).is_string()) {
    add_diag(out, path + "." + key, "must be a string", "quote the value");
    return false;
  }
  value = j.at(key).get<std::string>();
  return true;
}

/// Parse a symmetric matrix given as full rows; symmetry is enforced exactly.
inline bool parse_matrix(const nlohmann::json& j, const std::string& path, int dim, SymMat& m,
                         std::vector<Diagnostic>& out) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    add_diag(out, path, "must be an array of " + std::to_string(dim) + " rows",
             "give the full symmetric matrix");
    return false;
  }
  m = SymMat(dim);
  for (int i = 0; i < dim; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      add_diag(out, path + "[" + std::to_string(i) + "]",
               "must be an array of " + std::to_string(dim) + " numbers", "fix the row length");
      return false;
    }
    for (int k = 0; k < dim; ++k) {
      if (!row.at(static_cast<std::size_t>(k)).is_number()) {
        add_diag(out, path + "[" + std::to_string(i) + "]", "entries must be numbers",
                 "use numeric literals");
        return false;
      }
    }
  }
  for (int i = 0; i < dim; ++i)
    for (int k = i; k < dim; ++k) {
      const double upper = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
      const double lower = j.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(i)).get<double>();
      if (upper != lower) {
        add_diag(out, path, "matrix is not symmetric", "mirror the off-diagonal entries");
        return false;
      }
      m(i, k) = upper;
    }
  return true;
}

inline bool parse_pattern(const nlohmann::json& j, const std::string& path, int dim,
                          std::optional<CoefficientField>& pattern,
                          std::vector<Diagnostic>& out) {
  if (!want_object(j, path, out)) return false;
  check_keys(j, path, {"file", "cells", "length", "values"}, out);
  if (j.contains("file")) {
    std::string file;
    if (!get_string(j, path, "file", file, out, true)) return false;
    try {
      pattern = load_field(file);
    } catch (const std::exception& e) {
      add_diag(out, path + ".file", e.what(), "point at a readable field container");
      return false;
    }
    if (pattern->dim() != dim) {
      add_diag(out, path + ".file", "pattern dimension does not match grid.dim",
               "regenerate the pattern for this dimension");
      return false;
    }
    return true;
  }
  std::int64_t cells = 0;
  double length = 0.0;
  if (!get_int(j, path, "cells", cells, out, true)) return false;
  if (!get_number(j, path, "length", length, out, false, 1.0) && j.contains("length")) return false;
  if (cells < 1 || length <= 0.0) {
    add_diag(out, path, "cells must be >= 1 and length > 0", "fix the pattern geometry");
    return false;
  }
  if (!j.contains("values") || !j.at("values").is_array()) {
    add_diag(out, path + ".values", "missing per-cell values", "list one scalar per cell, row-major");
    return false;
  }
  GridSpec g;
  g.dim = dim;
  g.cells = {1, 1, 1};
  for (int t = 0; t < dim; ++t) g.cells[static_cast<std::size_t>(t)] = cells;
  g.h = length / static_cast<double>(cells);
  const auto& vals = j.at("values");
  if (static_cast<Index>(vals.size()) != g.cell_count()) {
    add_diag(out, path + ".values",
             "expected " + std::to_string(g.cell_count()) + " values, got " +
                 std::to_string(vals.size()),
             "list one scalar per cell, row-major");
    return false;
  }
  double lo = 0.0, hi = 0.0;
  std::vector<double> v(vals.size());
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (!vals.at(k).is_number() || !(vals.at(k).get<double>() > 0.0)) {
      add_diag(out, path + ".values", "values must be positive numbers", "fix entry " + std::to_string(k));
      return false;
    }
    v[k] = vals.at(k).get<double>();
    lo = k ? std::min(lo, v[k]) : v[k];
    hi = k ? std::max(hi, v[k]) : v[k];
  }
  CoefficientField f(g, {lo, hi});
  for (Index id = 0; id < g.cell_count(); ++id)
    f.set_cell(id, SymMat::identity(dim, v[static_cast<std::size_t>(id)]));
  pattern = std::move(f);
  return true;
}

inline bool parse_map(const nlohmann::json& j, const std::string& path,
                      std::optional<EllipticMap>& map, std::vector<Diagnostic>& out) {
  if (!want_object(j, path, out)) return false;
  std::string kind;
  if (!get_string(j, path, "kind", kind, out, true)) return false;
  try {
    if (kind == "two_phase") {
      check_keys(j, path, {"kind", "a1", "a2", "threshold"}, out);
      double a1 = 0.0, a2 = 0.0, th = 0.0;
      if (!get_number(j, path, "a1", a1, out, true) || !get_number(j, path, "a2", a2, out, true))
        return false;
      get_number(j, path, "threshold", th, out, false, 0.0);
      map = EllipticMap::two_phase(a1, a2, th);
    } else if (kind == "affine") {
      check_keys(j, path, {"kind", "lambda", "Lambda", "mu", "slope"}, out);
      double lo = 0.0, hi = 0.0, mu = 0.0, slope = 0.0;
      if (!get_number(j, path, "lambda", lo, out, true) ||
          !get_number(j, path, "Lambda", hi, out, true) ||
          !get_number(j, path, "mu", mu, out, true) ||
          !get_number(j, path, "slope", slope, out, true))
        return false;
      map = EllipticMap::affine_clamped(lo, hi, mu, slope);
    } else if (kind == "logistic") {
      check_keys(j, path, {"kind", "lambda", "Lambda", "center", "rate"}, out);
      double lo = 0.0, hi = 0.0, center = 0.0, rate = 0.0;
      if (!get_number(j, path, "lambda", lo, out, true) ||
          !get_number(j, path, "Lambda", hi, out, true))
        return false;
      get_number(j, path, "center", center, out, false, 0.0);
      get_number(j, path, "rate", rate, out, false, 1.0);
      map = EllipticMap::logistic(lo, hi, center, rate);
    } else {
      add_diag(out, path + ".kind", "unknown map kind '" + kind + "'",
               "use two_phase, affine, or logistic");
      return false;
    }
  } catch (const std::exception& e) {
    add_diag(out, path, e.what(), "fix the map parameters");
    return false;
  }
  return true;
}

/// Collinear atomic model: atoms at rational multiples of one numeric base
/// frequency along a coordinate axis, so the resonance lattice is exact.
struct GaussianModelParts {
  GaussianFieldModel model;
  ResonanceLattice lattice;
  std::optional<EllipticMap> map;
};

inline bool parse_gaussian_model(const nlohmann::json& j, const std::string& path, int dim,
                                 GaussianModelParts& parts, std::vector<Diagnostic>& out) {
  if (!want_object(j, path, out)) return false;
  check_keys(j, path, {"c0", "base", "axis", "atoms", "continuous", "channels", "map"}, out);

  AtomicSpectrum spectrum;
  spectrum.dim = dim;
  get_number(j, path, "c0", spectrum.c0, out, false, 0.0);

  double base = 0.0;
  std::int64_t axis = 0, channels = 1;
  get_int(j, path, "axis", axis, out, false, 0);
  get_int(j, path, "channels", channels, out, false, 1);
  if (axis < 0 || axis >= dim) {
    add_diag(out, path + ".axis", "axis out of range", "use 0 <= axis < grid.dim");
    return false;
  }

  std::vector<Rational> rationals;
  if (j.contains("atoms")) {
    if (!get_number(j, path, "base", base, out, true)) return false;
    const auto& atoms = j.at("atoms");
    if (!atoms.is_array() || atoms.empty()) {
      add_diag(out, path + ".atoms", "must be a non-empty array", "list {q, c} atoms");
      return false;
    }
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string apath = path + ".atoms[" + std::to_string(k) + "]";
      if (!want_object(atoms.at(k), apath, out)) return false;
      check_keys(atoms.at(k), apath, {"q", "c"}, out);
      std::string q;
      double c = 0.0;
      if (!get_string(atoms.at(k), apath, "q", q, out, true) ||
          !get_number(atoms.at(k), apath, "c", c, out, true))
        return false;
      Rational r;
      try {
        r = Rational::parse(q);
      } catch (const std::exception& e) {
        add_diag(out, apath + ".q", e.what(), "write the multiplier as 'p' or 'p/q'");
        return false;
      }
      rationals.push_back(r);
      AtomicSpectrum::Atom atom;
      atom.omega[static_cast<std::size_t>(axis)] = base * r.to_double();
      atom.c = c;
      spectrum.atoms.push_back(atom);
    }
  }

  GaussianFieldModel model;
  model.atomic = spectrum;
  model.channels = static_cast<int>(channels);
  if (j.contains("continuous")) {
    const std::string cpath = path + ".continuous";
    const auto& cj = j.at("continuous");
    if (!want_object(cj, cpath, out)) return false;
    check_keys(cj, cpath, {"kind", "sigma2", "ell"}, out);
    std::string kind;
    if (!get_string(cj, cpath, "kind", kind, out, true)) return false;
    if (kind == "none") {
      model.continuous.kind = ContinuousCovariance::Kind::none;
    } else if (kind == "squared_exponential" || kind == "exponential") {
      model.continuous.kind = kind == "exponential" ? ContinuousCovariance::Kind::exponential
                                                    : ContinuousCovariance::Kind::squared_exponential;
      if (!get_number(cj, cpath, "sigma2", model.continuous.sigma2, out, true) ||
          !get_number(cj, cpath, "ell", model.continuous.ell, out, true))
        return false;
    } else {
      add_diag(out, cpath + ".kind", "unknown covariance kind '" + kind + "'",
               "use none, squared_exponential, or exponential");
      return false;
    }
  }

  if (!j.contains("map")) {
    add_diag(out, path + ".map", "missing required key", "add an elliptic map");
    return false;
  }
  std::optional<EllipticMap> map;
  if (!parse_map(j.at("map"), path + ".map", map, out)) return false;

  ResonanceLattice lattice;
  if (rationals.empty()) {
    lattice.atoms = 0;
  } else {
    lattice = kernel_basis(FrequencySet::scalar(rationals));
  }

  try {
    model.validate();
  } catch (const std::exception& e) {
    add_diag(out, path, e.what(), "fix the spectrum parameters");
    return false;
  }
  parts = GaussianModelParts{std::move(model), std::move(lattice), map};
  return true;
}

inline bool parse_coords(const nlohmann::json& j, const std::string& path,
                         const GaussianModelParts& parts, ComponentCoordinates& coords,
                         std::vector<Diagnostic>& out) {
  if (!want_object(j, path, out)) return false;
  check_keys(j, path, {"channels"}, out);
  if (!j.contains("channels") || !j.at("channels").is_array() ||
      static_cast<int>(j.at("channels").size()) != parts.model.channels) {
    add_diag(out, path + ".channels",
             "must list exactly " + std::to_string(parts.model.channels) + " channel coordinates",
             "one {x0, r, phi} object per channel");
    return false;
  }
  const int n = parts.model.atomic.atom_count();
  coords.channels.clear();
  for (std::size_t c = 0; c < j.at("channels").size(); ++c) {
    const std::string cpath = path + ".channels[" + std::to_string(c) + "]";
    const auto& cj = j.at("channels").at(c);
    if (!want_object(cj, cpath, out)) return false;
    check_keys(cj, cpath, {"x0", "r", "phi"}, out);
    ChannelCoordinates ch;
    get_number(cj, cpath, "x0", ch.x0, out, false, 0.0);
    for (const char* key : {"r", "phi"}) {
      if (!cj.contains(key) || !cj.at(key).is_array() ||
          static_cast<int>(cj.at(key).size()) != n) {
        add_diag(out, cpath + "." + key,
                 "must be an array of " + std::to_string(n) + " numbers (one per atom)",
                 "match the atom count");
        return false;
      }
      for (const auto& v : cj.at(key))
        if (!v.is_number()) {
          add_diag(out, cpath + "." + key, "entries must be numbers", "use numeric literals");
          return false;
        }
    }
    for (const auto& v : cj.at("r")) ch.r.push_back(v.get<double>());
    for (const auto& v : cj.at("phi")) ch.phi.push_back(v.get<double>());
    for (double r : ch.r)
      if (!(r >= 0.0)) {
        add_diag(out, cpath + ".r", "amplitudes must be >= 0", "fix the negative entry");
        return false;
      }
    ch.eta = invariant_phases(parts.lattice, ch.phi);
    coords.channels.push_back(std::move(ch));
  }
  return true;
}

inline bool parse_measure(const nlohmann::json& j, const std::string& path, int dim,
                          std::optional<StationaryMeasureSpec>& measure,
                          std::vector<Diagnostic>& out) {
  if (!want_object(j, path, out)) return false;
  std::string type;
  if (!get_string(j, path, "type", type, out, true)) return false;

  if (type == "gaussian") {
    check_keys(j, path, {"type", "model"}, out);
    if (!j.contains("model")) {
      add_diag(out, path + ".model", "missing required key", "describe the Gaussian model");
      return false;
    }
    GaussianModelParts parts;
    if (!parse_gaussian_model(j.at("model"), path + ".model", dim, parts, out)) return false;
    measure = StationaryMeasureSpec{GaussianRelatedSpec{parts.model, parts.lattice, *parts.map}};
    return true;
  }
  if (type != "mixture") {
    add_diag(out, path + ".type", "unknown measure type '" + type + "'",
             "use mixture or gaussian");
    return false;
  }

  check_keys(j, path, {"type", "components"}, out);
  if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty()) {
    add_diag(out, path + ".components", "must be a non-empty array", "list the mixture entries");
    return false;
  }
  MixtureSpec mix;
  double weight_sum = 0.0;
  bool weights_ok = true;
  for (std::size_t k = 0; k < j.at("components").size(); ++k) {
    const std::string cpath = path + ".components[" + std::to_string(k) + "]";
    const auto& cj = j.at("components").at(k);
    if (!want_object(cj, cpath, out)) return false;
    double weight = 0.0;
    if (!get_number(cj, cpath, "weight", weight, out, true))
      weights_ok = false;
    else
      weight_sum += weight;
    std::string ctype;
    if (!get_string(cj, cpath, "type", ctype, out, true)) return false;

    if (ctype == "constant") {
      check_keys(cj, cpath, {"weight", "type", "value", "matrix"}, out);
      SymMat m(dim);
      if (cj.contains("matrix")) {
        if (!parse_matrix(cj.at("matrix"), cpath + ".matrix", dim, m, out)) return false;
      } else {
        double value = 0.0;
        if (!get_number(cj, cpath, "value", value, out, true)) return false;
        m = SymMat::identity(dim, value);
      }
      mix.entries.push_back({weight, ConstantComponent{m}});
    } else if (ctype == "periodic") {
      check_keys(cj, cpath, {"weight", "type", "pattern", "random_shift"}, out);
      if (!cj.contains("pattern")) {
        add_diag(out, cpath + ".pattern", "missing required key", "describe the periodic pattern");
        return false;
      }
      std::optional<CoefficientField> pattern;
      if (!parse_pattern(cj.at("pattern"), cpath + ".pattern", dim, pattern, out)) return false;
      bool shift = true;
      if (cj.contains("random_shift")) {
        if (!cj.at("random_shift").is_boolean()) {
          add_diag(out, cpath + ".random_shift", "must be a boolean", "use true or false");
          return false;
        }
        shift = cj.at("random_shift").get<bool>();
      }
      if (shift)
        mix.entries.push_back({weight, ShiftedPeriodicComponent{std::move(*pattern), true}});
      else
        mix.entries.push_back({weight, PeriodicComponent{std::move(*pattern)}});
    } else if (ctype == "gaussian") {
      check_keys(cj, cpath, {"weight", "type", "model", "coords"}, out);
      if (!cj.contains("model") || !cj.contains("coords")) {
        add_diag(out, cpath, "gaussian mixture entries need model and coords",
                 "add both keys (coords pins the ergodic component)");
        return false;
      }
      GaussianModelParts parts;
      if (!parse_gaussian_model(cj.at("model"), cpath + ".model", dim, parts, out)) return false;
      ComponentCoordinates coords;
      if (!parse_coords(cj.at("coords"), cpath + ".coords", parts, coords, out)) return false;
      mix.entries.push_back(
          {weight, GaussianComponent{parts.model, parts.lattice, *parts.map, std::move(coords)}});
    } else {
      add_diag(out, cpath + ".type", "unknown component type '" + ctype + "'",
               "use constant, periodic, or gaussian");
      return false;
    }
  }
  if (weights_ok && std::abs(weight_sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "weights sum to " << weight_sum;
    add_diag(out, path + ".components", msg.str(), "make the weights sum to 1");
    return false;
  }
  measure = StationaryMeasureSpec{std::move(mix)};
  return true;
}

}  // namespace detail

/// Read a config file into JSON; throws std::invalid_argument naming the file.
inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: '" + path + "' is not valid JSON: " + e.what());
  }
}

/**
 * @brief Validate a JSON config and decode it into an ExperimentConfig.
 *
 * Returns all diagnostics (empty iff the run would pass validation). On an
 * empty result, *decoded holds the typed configuration. Unknown keys, missing
 * sections for the chosen command, non-normalized weights, and a missing
 * master_seed are all reported with key paths and remedies.
 */
inline std::vector<Diagnostic> validate_config(const nlohmann::json& root,
                                               ExperimentConfig* decoded = nullptr) {
  std::vector<Diagnostic> out;
  ExperimentConfig cfg;
  if (!root.is_object()) {
    detail::add_diag(out, "(root)", "config must be a JSON object", "wrap the config in { ... }");
    return out;
  }
  detail::check_keys(root, "",
                     {"schema", "command", "master_seed", "output_dir", "grid", "solver",
                      "samples", "measure", "resonance", "study"},
                     out);

  std::int64_t schema = 0;
  if (!detail::get_int(root, "(root)", "schema", schema, out, true) || schema != 1) {
    if (root.contains("schema") && schema != 1)
      detail::add_diag(out, "(root).schema", "unsupported schema " + std::to_string(schema),
                       "this toolkit reads schema = 1");
  }

  static const std::set<std::string> commands = {"homogenize", "law", "resonance", "converge",
                                                 "sample-field"};
  detail::get_string(root, "(root)", "command", cfg.command, out, true);
  if (!cfg.command.empty() && commands.find(cfg.command) == commands.end())
    detail::add_diag(out, "(root).command", "unknown command '" + cfg.command + "'",
                     "use homogenize, law, resonance, converge, or sample-field");

  if (!root.contains("master_seed")) {
    detail::add_diag(out, "(root).master_seed", "missing master_seed",
                     "seed every run explicitly; wall-clock seeding is not supported");
  } else if (!root.at("master_seed").is_number_unsigned() &&
             !root.at("master_seed").is_number_integer()) {
    detail::add_diag(out, "(root).master_seed", "must be a non-negative integer",
                     "use a 64-bit unsigned seed");
  } else {
    const auto& ms = root.at("master_seed");
    if (ms.is_number_integer() && ms.get<std::int64_t>() < 0)
      detail::add_diag(out, "(root).master_seed", "must be a non-negative integer",
                       "use a 64-bit unsigned seed");
    else
      cfg.master_seed = ms.get<std::uint64_t>();
  }

  detail::get_string(root, "(root)", "output_dir", cfg.output_dir, out, false, "out");

  const bool needs_grid = cfg.command != "resonance";
  if (root.contains("grid")) {
    const auto& gj = root.at("grid");
    if (detail::want_object(gj, "grid", out)) {
      detail::check_keys(gj, "grid", {"dim", "cells", "length"}, out);
      std::int64_t dim = 0, cells = 0;
      double length = 1.0;
      detail::get_int(gj, "grid", "dim", dim, out, true, 1);
      detail::get_int(gj, "grid", "cells", cells, out, true, 0);
      detail::get_number(gj, "grid", "length", length, out, false, 1.0);
      if (dim < 1 || dim > 3)
        detail::add_diag(out, "grid.dim", "dim must be 1, 2, or 3", "fix the dimension");
      else if (cells < 2)
        detail::add_diag(out, "grid.cells", "need at least 2 cells per axis", "raise cells");
      else if (!(length > 0.0))
        detail::add_diag(out, "grid.length", "length must be > 0", "fix the torus side");
      else {
        cfg.grid.dim = static_cast<int>(dim);
        cfg.grid.cells = {1, 1, 1};
        for (int t = 0; t < cfg.grid.dim; ++t)
          cfg.grid.cells[static_cast<std::size_t>(t)] = cells;
        cfg.grid.h = length / static_cast<double>(cells);
        cfg.grid.periodic = true;
      }
    }
  } else if (needs_grid && !cfg.command.empty()) {
    detail::add_diag(out, "grid", "missing grid section for command '" + cfg.command + "'",
                     "add grid = {dim, cells, length}");
  }

  if (root.contains("solver")) {
    const auto& sj = root.at("solver");
    if (detail::want_object(sj, "solver", out)) {
      detail::check_keys(sj, "solver", {"tol", "max_iter"}, out);
      std::int64_t it = 0;
      detail::get_number(sj, "solver", "tol", cfg.solver_tol, out, false, 1e-9);
      detail::get_int(sj, "solver", "max_iter", it, out, false, 10000);
      cfg.solver_max_iter = static_cast<int>(it);
      if (!(cfg.solver_tol > 0.0) || cfg.solver_tol >= 1.0)
        detail::add_diag(out, "solver.tol", "tol must lie in (0, 1)", "use a small positive tolerance");
      if (cfg.solver_max_iter < 1)
        detail::add_diag(out, "solver.max_iter", "must be >= 1", "raise the iteration cap");
    }
  }

  if (root.contains("samples")) {
    std::int64_t m = 0;
    detail::get_int(root, "(root)", "samples", m, out, false, 1);
    if (m < 1)
      detail::add_diag(out, "(root).samples", "must be >= 1", "request at least one sample");
    else
      cfg.samples = static_cast<int>(m);
  } else if (cfg.command == "law") {
    detail::add_diag(out, "(root).samples", "missing sample count for command 'law'",
                     "add samples = M");
  }

  const bool needs_measure = cfg.command == "homogenize" || cfg.command == "law" ||
                             cfg.command == "converge" || cfg.command == "sample-field";
  if (root.contains("measure")) {
    if (cfg.grid.dim >= 1)
      detail::parse_measure(root.at("measure"), "measure", cfg.grid.dim, cfg.measure, out);
  } else if (needs_measure && !cfg.command.empty()) {
    detail::add_diag(out, "measure", "missing measure section for command '" + cfg.command + "'",
                     "describe the stationary measure");
  }

  if (root.contains("resonance")) {
    const auto& rj = root.at("resonance");
    if (detail::want_object(rj, "resonance", out)) {
      detail::check_keys(rj, "resonance", {"rationals", "generator"}, out);
      if (!rj.contains("rationals") || !rj.at("rationals").is_array() ||
          rj.at("rationals").empty()) {
        detail::add_diag(out, "resonance.rationals", "must be a non-empty array of rationals",
                         "list the frequency multipliers, e.g. [\"1\", \"2\", \"3/2\"]");
      } else {
        std::vector<Rational> q;
        bool ok = true;
        for (std::size_t k = 0; k < rj.at("rationals").size(); ++k) {
          const auto& item = rj.at("rationals").at(k);
          if (!item.is_string()) {
            detail::add_diag(out, "resonance.rationals[" + std::to_string(k) + "]",
                             "must be a string", "write the multiplier as 'p' or 'p/q'");
            ok = false;
            break;
          }
          try {
            q.push_back(Rational::parse(item.get<std::string>()));
          } catch (const std::exception& e) {
            detail::add_diag(out, "resonance.rationals[" + std::to_string(k) + "]", e.what(),
                             "write the multiplier as 'p' or 'p/q'");
            ok = false;
            break;
          }
        }
        std::string generator = "b1";
        detail::get_string(rj, "resonance", "generator", generator, out, false, "b1");
        if (ok) cfg.frequencies = FrequencySet::scalar(std::move(q), generator);
      }
    }
  } else if (cfg.command == "resonance") {
    detail::add_diag(out, "resonance", "missing resonance section for command 'resonance'",
                     "add resonance = {rationals}");
  }

  if (root.contains("study")) {
    const auto& tj = root.at("study");
    if (detail::want_object(tj, "study", out)) {
      detail::check_keys(tj, "study", {"eps", "cells_per_eps", "tol", "max_iter", "length"}, out);
      if (!tj.contains("eps") || !tj.at("eps").is_array() || tj.at("eps").empty()) {
        detail::add_diag(out, "study.eps", "must be a non-empty array of scales",
                         "list the eps ladder, largest first");
      } else {
        bool ok = true;
        for (const auto& e : tj.at("eps")) {
          if (!e.is_number() || !(e.get<double>() > 0.0) || e.get<double>() > 1.0) {
            detail::add_diag(out, "study.eps", "entries must lie in (0, 1]", "fix the eps values");
            ok = false;
            break;
          }
          cfg.study_eps.push_back(e.get<double>());
        }
        if (ok)
          for (std::size_t k = 1; k < cfg.study_eps.size(); ++k)
            if (!(cfg.study_eps[k] < cfg.study_eps[k - 1])) {
              detail::add_diag(out, "study.eps", "eps list is not strictly decreasing",
                               "order the ladder from coarse to fine");
              break;
            }
      }
      std::int64_t cpe = 0, it = 0;
      detail::get_int(tj, "study", "cells_per_eps", cpe, out, false, 16);
      detail::get_number(tj, "study", "tol", cfg.study_tol, out, false, 1e-10);
      detail::get_int(tj, "study", "max_iter", it, out, false, 20000);
      detail::get_number(tj, "study", "length", cfg.study_length, out, false, 1.0);
      cfg.study_cells_per_eps = static_cast<int>(cpe);
      cfg.study_max_iter = static_cast<int>(it);
      if (cfg.study_cells_per_eps < 8)
        detail::add_diag(out, "study.cells_per_eps", "must be >= 8 to resolve the oscillations",
                         "raise cells_per_eps");
      if (!(cfg.study_length > 0.0))
        detail::add_diag(out, "study.length", "must be > 0", "fix the domain side");
    }
  } else if (cfg.command == "converge") {
    detail::add_diag(out, "study", "missing study section for command 'converge'",
                     "add study = {eps, cells_per_eps}");
  }

  if (out.empty() && cfg.measure) {
    try {
      cfg.measure->validate();
    } catch (const std::exception& e) {
      detail::add_diag(out, "measure", e.what(), "fix the measure definition");
    }
  }

  if (out.empty() && decoded) *decoded = std::move(cfg);
  return out;
}

/// Decode or throw: the first diagnostic becomes the exception message.
inline ExperimentConfig parse_config(const nlohmann::json& root) {
  ExperimentConfig cfg;
  const std::vector<Diagnostic> diags = validate_config(root, &cfg);
  if (!diags.empty()) throw std::invalid_argument("config: " + diags.front().format());
  return cfg;
}

}  // namespace stohom
