#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stohom/corrector.hpp"
#include "stohom/elliptic_map.hpp"
#include "stohom/field.hpp"
#include "stohom/gaussian.hpp"
#include "stohom/grid.hpp"
#include "stohom/resonance.hpp"
#include "stohom/rng.hpp"
#include "stohom/symmat.hpp"
#include "stohom/table.hpp"
#include "stohom/thread_pool.hpp"

namespace stohom {

/// Deterministic law: every realization is the same constant matrix.
struct ConstantComponent {
  SymMat matrix{1};
};

/// Deterministic tiling of a fixed periodic pattern, anchored at the origin.
struct PeriodicComponent {
  CoefficientField pattern;
};

/**
 * @brief Periodic pattern shifted by a uniform random phase, the classical
 *        stationarization of a periodic medium. With random_phase false it
 *        degenerates to the anchored tiling.
 */
struct ShiftedPeriodicComponent {
  CoefficientField pattern;
  bool random_phase = true;
};

/**
 * @brief One ergodic piece of a Gaussian-related law: the component
 *        coordinates are frozen, randomness is the continuous part plus a
 *        uniform spatial shift.
 */
struct GaussianComponent {
  GaussianFieldModel model;
  ResonanceLattice lattice;
  EllipticMap map;
  ComponentCoordinates coords;
};

using ErgodicComponentSpec =
    std::variant<ConstantComponent, PeriodicComponent, ShiftedPeriodicComponent,
                 GaussianComponent>;

struct MixtureEntry {
  double weight = 0.0;
  ErgodicComponentSpec component;
};

/// Finite convex combination of ergodic laws.
struct MixtureSpec {
  std::vector<MixtureEntry> entries;
};

/// Gaussian field model pushed through a pointwise elliptic map.
struct GaussianRelatedSpec {
  GaussianFieldModel model;
  ResonanceLattice lattice;
  EllipticMap map;
};

namespace detail {

inline void validate_component(const ErgodicComponentSpec& c) {
  if (const auto* cc = std::get_if<ConstantComponent>(&c)) {
    if (!(cc->matrix.eig_range()[0] > 0.0))
      throw std::invalid_argument("ConstantComponent: matrix must be positive definite");
    return;
  }
  if (const auto* pc = std::get_if<PeriodicComponent>(&c)) {
    pc->pattern.grid().validate();
    return;
  }
  if (const auto* sc = std::get_if<ShiftedPeriodicComponent>(&c)) {
    sc->pattern.grid().validate();
    return;
  }
  const auto& gc = std::get<GaussianComponent>(c);
  gc.model.validate();
  if (gc.lattice.atoms != gc.model.atomic.atom_count())
    throw std::invalid_argument("GaussianComponent: lattice atom count mismatch");
  if (static_cast<int>(gc.coords.channels.size()) != gc.model.channels)
    throw std::invalid_argument("GaussianComponent: coordinate channel count mismatch");
  for (const auto& ch : gc.coords.channels)
    if (static_cast<int>(ch.r.size()) != gc.model.atomic.atom_count() ||
        ch.phi.size() != ch.r.size())
      throw std::invalid_argument("GaussianComponent: coordinate atom count mismatch");
}

}  // namespace detail

/**
 * @brief A stationary law of coefficient fields: either a finite mixture of
 *        ergodic components or a Gaussian-related construction whose
 *        components arise by freezing the non-ergodic coordinates.
 */
struct StationaryMeasureSpec {
  std::variant<MixtureSpec, GaussianRelatedSpec> law;

  void validate() const {
    if (const auto* mix = std::get_if<MixtureSpec>(&law)) {
      if (mix->entries.empty())
        throw std::invalid_argument("StationaryMeasureSpec: mixture needs a component");
      double sum = 0.0;
      for (const auto& e : mix->entries) {
        if (!(e.weight >= 0.0 && e.weight <= 1.0))
          throw std::invalid_argument("StationaryMeasureSpec: weight outside [0,1]");
        sum += e.weight;
        detail::validate_component(e.component);
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("StationaryMeasureSpec: weights must sum to 1");
      return;
    }
    const auto& g = std::get<GaussianRelatedSpec>(law);
    g.model.validate();
    if (g.lattice.atoms != g.model.atomic.atom_count())
      throw std::invalid_argument("StationaryMeasureSpec: lattice atom count mismatch");
  }
};

/**
 * @brief Identifier of an ergodic component: the mixture index, or the
 *        sampled coordinates for Gaussian-related laws.
 */
struct ComponentLabel {
  int index = -1;
  std::optional<ComponentCoordinates> coords;
};

/**
 * @brief Same-component test: mixture labels compare by index; coordinate
 *        labels compare the translation invariants x0, r, and eta (phases
 *        are not invariants and are ignored).
 */
inline bool labels_match(const ComponentLabel& a, const ComponentLabel& b, double tol = 1e-9) {
  if (a.index != b.index) return false;
  if (a.coords.has_value() != b.coords.has_value()) return false;
  if (!a.coords) return true;
  const auto& ca = *a.coords;
  const auto& cb = *b.coords;
  if (ca.channels.size() != cb.channels.size()) return false;
  for (std::size_t c = 0; c < ca.channels.size(); ++c) {
    const auto& u = ca.channels[c];
    const auto& v = cb.channels[c];
    if (u.r.size() != v.r.size() || u.eta.size() != v.eta.size()) return false;
    if (std::abs(u.x0 - v.x0) > tol) return false;
    for (std::size_t j = 0; j < u.r.size(); ++j)
      if (std::abs(u.r[j] - v.r[j]) > tol) return false;
    for (std::size_t j = 0; j < u.eta.size(); ++j) {
      constexpr double two_pi = 2.0 * std::numbers::pi;
      double d = std::abs(u.eta[j] - v.eta[j]);
      d = std::min(d, two_pi - d);
      if (d > tol) return false;
    }
  }
  return true;
}

/// Produces one realization of the component's law on the requested grid.
using FieldGenerator = std::function<CoefficientField(const GridSpec&, Rng&)>;

struct SampledComponent {
  ComponentLabel label;
  FieldGenerator generate;
};

namespace detail {

/// Tile a periodic pattern onto a (finer or equal) grid, shifted by y.
inline CoefficientField tile_pattern(const CoefficientField& pattern, const GridSpec& grid,
                                     const std::array<double, 3>& y) {
  const GridSpec& pg = pattern.grid();
  if (pg.dim != grid.dim) throw std::invalid_argument("tile_pattern: dimension mismatch");
  CoefficientField out(grid, pattern.bounds());
  for (Index id = 0; id < grid.cell_count(); ++id) {
    const auto iv = grid.unflatten(id);
    std::array<Index, 3> jv{0, 0, 0};
    for (int t = 0; t < grid.dim; ++t) {
      const double period = pg.side(t);
      double u = std::fmod(grid.cell_center(t, iv[static_cast<std::size_t>(t)]) -
                               y[static_cast<std::size_t>(t)],
                           period);
      if (u < 0.0) u += period;
      const Index j = static_cast<Index>(std::floor(u / pg.h));
      jv[static_cast<std::size_t>(t)] =
          std::min<Index>(pg.cells[static_cast<std::size_t>(t)] - 1, std::max<Index>(0, j));
    }
    out.set_cell(id, pattern.cell(pg.flat(jv)));
  }
  return out;
}

inline CoefficientField constant_field(const GridSpec& grid, const SymMat& m) {
  const auto eig = m.eig_range();
  CoefficientField out(grid, {eig[0], eig[1]});
  for (Index id = 0; id < grid.cell_count(); ++id) out.set_cell(id, m);
  return out;
}

/**
 * @brief Field generator for one ergodic component. Draw order within a
 *        generator call is fixed: spatial shift first (one uniform per
 *        axis), then the continuous Gaussian part.
 */
inline FieldGenerator component_generator(const ErgodicComponentSpec& c) {
  if (const auto* cc = std::get_if<ConstantComponent>(&c)) {
    const SymMat m = cc->matrix;
    return [m](const GridSpec& grid, Rng&) {
      grid.validate();
      if (grid.dim != m.dim()) throw std::invalid_argument("component: dimension mismatch");
      return constant_field(grid, m);
    };
  }
  if (const auto* pc = std::get_if<PeriodicComponent>(&c)) {
    const CoefficientField pattern = pc->pattern;
    return [pattern](const GridSpec& grid, Rng&) {
      grid.validate();
      return tile_pattern(pattern, grid, {0.0, 0.0, 0.0});
    };
  }
  if (const auto* sc = std::get_if<ShiftedPeriodicComponent>(&c)) {
    const CoefficientField pattern = sc->pattern;
    const bool random_phase = sc->random_phase;
    return [pattern, random_phase](const GridSpec& grid, Rng& rng) {
      grid.validate();
      std::array<double, 3> y{0.0, 0.0, 0.0};
      if (random_phase)
        for (int t = 0; t < pattern.grid().dim; ++t)
          y[static_cast<std::size_t>(t)] = rng.uniform(0.0, pattern.grid().side(t));
      return tile_pattern(pattern, grid, y);
    };
  }
  const GaussianComponent gc = std::get<GaussianComponent>(c);
  return [gc](const GridSpec& grid, Rng& rng) {
    grid.validate();
    if (grid.dim != gc.model.dim())
      throw std::invalid_argument("component: dimension mismatch");
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int t = 0; t < grid.dim; ++t)
      y[static_cast<std::size_t>(t)] = rng.uniform(0.0, grid.side(t));
    const ComponentCoordinates shifted =
        translate_coordinates(gc.coords, gc.model.atomic, gc.lattice, y);
    std::vector<ScalarField> channels = synth_atomic(shifted, gc.model.atomic, grid);
    if (gc.model.continuous.kind != ContinuousCovariance::Kind::none) {
      CirculantSampler sampler(gc.model.continuous, grid);
      for (auto& ch : channels) {
        const ScalarField xc = sampler.sample(rng);
        for (std::size_t i = 0; i < ch.size(); ++i) ch[i] += xc[i];
      }
    }
    return map_field(grid, channels, gc.map);
  };
}

}  // namespace detail

/**
 * @brief Draw one ergodic component of the law together with a generator of
 *        realizations under that component.
 *
 * Mixtures draw the index with the given weights; Gaussian-related laws draw
 * the component coordinates and freeze them in the generator.
 */
inline SampledComponent sample_component(const StationaryMeasureSpec& spec, Rng& rng) {
  spec.validate();
  SampledComponent out;
  if (const auto* mix = std::get_if<MixtureSpec>(&spec.law)) {
    const double u = rng.uniform01();
    double cum = 0.0;
    std::size_t k = mix->entries.size() - 1;
    for (std::size_t i = 0; i < mix->entries.size(); ++i) {
      cum += mix->entries[i].weight;
      if (u < cum) {
        k = i;
        break;
      }
    }
    out.label.index = static_cast<int>(k);
    if (const auto* gc = std::get_if<GaussianComponent>(&mix->entries[k].component))
      out.label.coords = gc->coords;
    out.generate = detail::component_generator(mix->entries[k].component);
    return out;
  }
  const auto& g = std::get<GaussianRelatedSpec>(spec.law);
  const ComponentCoordinates coords = sample_component(g.model, g.lattice, rng);
  out.label.index = 0;
  out.label.coords = coords;
  out.generate =
      detail::component_generator(GaussianComponent{g.model, g.lattice, g.map, coords});
  return out;
}

/// Torus and solver settings for one homogenization solve.
struct SolverConfig {
  GridSpec grid;
  double tol = 1e-9;
  int max_iter = 10000;
};

struct LawSample {
  std::int64_t seed_index = 0;
  double weight = 0.0;
  SymMat matrix{1};
  ComponentLabel label;
};

/**
 * @brief Monte Carlo estimate of the law of the homogenized matrix: one
 *        component per sample, one realization per component, weights
 *        uniform over the successful solves.
 */
struct EmpiricalLaw {
  std::vector<LawSample> samples;
  std::vector<std::int64_t> aborted;
  std::vector<std::string> abort_messages;
  std::uint64_t master_seed = 0;
  GridSpec grid;
  double tol = 1e-9;
  int requested = 0;
};

namespace detail {
/// Stream tag separating law-estimation draws from other consumers.
constexpr std::uint64_t kLawStreamTag = 0x4c41575354524d31ULL;
}  // namespace detail

/**
 * @brief Estimate the law of the homogenized matrix over M sampled
 *        components.
 *
 * Sample i draws everything from the dedicated stream (master_seed, i), so
 * the result is byte-identical for any thread count and any scheduling.
 * Solver failures abort only their sample and are recorded; more than 1%
 * aborted samples fails the run.
 */
inline EmpiricalLaw estimate_law(const StationaryMeasureSpec& spec, int M,
                                 const SolverConfig& solver, std::uint64_t master_seed,
                                 int threads = 1) {
  spec.validate();
  solver.grid.validate();
  if (M < 1) throw std::invalid_argument("estimate_law: sample count must be positive");

  struct Slot {
    bool ok = false;
    SymMat matrix{1};
    ComponentLabel label;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(M));

  parallel_for(threads, M, [&](std::int64_t i) {
    Slot& slot = slots[static_cast<std::size_t>(i)];
    Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(i), detail::kLawStreamTag);
    try {
      SampledComponent sc = sample_component(spec, rng);
      const CoefficientField field = sc.generate(solver.grid, rng);
      const CorrectorSolution sol = solve_correctors(field, solver.tol, solver.max_iter);
      slot.matrix = homogenized_matrix(field, sol);
      slot.label = std::move(sc.label);
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  EmpiricalLaw law;
  law.master_seed = master_seed;
  law.grid = solver.grid;
  law.tol = solver.tol;
  law.requested = M;
  for (std::int64_t i = 0; i < M; ++i) {
    const Slot& slot = slots[static_cast<std::size_t>(i)];
    if (!slot.ok) {
      law.aborted.push_back(i);
      law.abort_messages.push_back(slot.error);
    }
  }
  const std::size_t failures = law.aborted.size();
  if (static_cast<double>(failures) > 0.01 * static_cast<double>(M))
    throw std::runtime_error("estimate_law: " + std::to_string(failures) + " of " +
                             std::to_string(M) + " samples aborted; first: " +
                             law.abort_messages.front());
  const double weight = 1.0 / static_cast<double>(M - static_cast<std::int64_t>(failures));
  for (std::int64_t i = 0; i < M; ++i) {
    Slot& slot = slots[static_cast<std::size_t>(i)];
    if (!slot.ok) continue;
    LawSample s;
    s.seed_index = i;
    s.weight = weight;
    s.matrix = slot.matrix;
    s.label = std::move(slot.label);
    law.samples.push_back(std::move(s));
  }
  return law;
}

/**
 * @brief Serialize the law as a text table: seed_index, weight, then the
 *        upper-triangle matrix entries, 17 significant digits.
 */
inline void write_law_table(const EmpiricalLaw& law, std::ostream& os) {
  const int d = law.grid.dim;
  std::vector<std::string> cols{"seed_index", "weight"};
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      cols.push_back("a_" + std::to_string(i) + std::to_string(j));
  TextTable table(cols);
  for (const auto& s : law.samples) {
    std::vector<std::string> row{format_index(s.seed_index), format_sig17(s.weight)};
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) row.push_back(format_sig17(s.matrix(i, j)));
    table.add_row(std::move(row));
  }
  table.write(os);
}

/**
 * @brief Spatial averages of a cellwise statistic over centered boxes of
 *        half-width R, one value per requested radius.
 *
 * The box at radius R collects the cells whose centers lie within R of the
 * domain midpoint on every axis.
 */
inline std::vector<double> birkhoff_average(const CoefficientField& field,
                                            const std::function<double(const SymMat&)>& statistic,
                                            const std::vector<double>& radii) {
  const GridSpec& grid = field.grid();
  grid.validate();
  if (radii.empty()) throw std::invalid_argument("birkhoff_average: no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw std::invalid_argument("birkhoff_average: radii must be positive");
    if (k && !(radii[k] > radii[k - 1]))
      throw std::invalid_argument("birkhoff_average: radii must increase");
  }
  for (int t = 0; t < grid.dim; ++t)
    if (radii.back() > 0.5 * grid.side(t) * (1.0 + 1e-12))
      throw std::invalid_argument("birkhoff_average: radius exceeds the domain");

  std::vector<double> out;
  out.reserve(radii.size());
  for (const double radius : radii) {
    const double w = radius / grid.h;
    std::array<std::vector<Index>, 3> window;
    for (int t = 0; t < grid.dim; ++t) {
      const double mid = 0.5 * static_cast<double>(grid.cells[static_cast<std::size_t>(t)]);
      for (Index i = 0; i < grid.cells[static_cast<std::size_t>(t)]; ++i)
        if (std::abs(static_cast<double>(i) + 0.5 - mid) <= w)
          window[static_cast<std::size_t>(t)].push_back(i);
      if (window[static_cast<std::size_t>(t)].empty())
        throw std::invalid_argument("birkhoff_average: radius below one cell");
    }
    detail::KahanSum sum;
    std::int64_t count = 0;
    std::array<std::size_t, 3> pos{0, 0, 0};
    std::array<Index, 3> iv{0, 0, 0};
    const int d = grid.dim;
    for (;;) {
      for (int t = 0; t < d; ++t)
        iv[static_cast<std::size_t>(t)] =
            window[static_cast<std::size_t>(t)][pos[static_cast<std::size_t>(t)]];
      sum.add(statistic(field.cell(grid.flat(iv))));
      ++count;
      int t = d - 1;
      for (; t >= 0; --t) {
        if (++pos[static_cast<std::size_t>(t)] < window[static_cast<std::size_t>(t)].size())
          break;
        pos[static_cast<std::size_t>(t)] = 0;
      }
      if (t < 0) break;
    }
    out.push_back(sum.value() / static_cast<double>(count));
  }
  return out;
}

/// Cellwise statistic trace/d, the mean diagonal entry.
inline double mean_diagonal(const SymMat& m) {
  return m.trace() / static_cast<double>(m.dim());
}

constexpr int kUnclassified = -1;

/**
 * @brief Assign a realization to the nearest reference statistic by its
 *        Birkhoff average at the largest radius; kUnclassified when no
 *        reference lies within tol. References must be separated by at
 *        least 4 tol so nearest-within-tol is unambiguous.
 */
inline int classify_component(const CoefficientField& field,
                              const std::function<double(const SymMat&)>& statistic,
                              const std::vector<double>& references,
                              const std::vector<double>& radii, double tol) {
  if (references.empty()) throw std::invalid_argument("classify_component: no references");
  if (!(tol > 0.0)) throw std::invalid_argument("classify_component: tol must be positive");
  for (std::size_t i = 0; i < references.size(); ++i)
    for (std::size_t j = i + 1; j < references.size(); ++j)
      if (std::abs(references[i] - references[j]) < 4.0 * tol)
        throw std::invalid_argument("classify_component: references closer than 4 tol");

  const double v = birkhoff_average(field, statistic, radii).back();
  int best = kUnclassified;
  double best_dist = tol;
  for (std::size_t k = 0; k < references.size(); ++k) {
    const double dist = std::abs(v - references[k]);
    if (dist <= best_dist) {
      best = static_cast<int>(k);
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace stohom
