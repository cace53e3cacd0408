#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/corrector.hpp"
#include "stohom/dirichlet.hpp"
#include "stohom/field.hpp"
#include "stohom/grid.hpp"
#include "stohom/measure.hpp"
#include "stohom/rng.hpp"
#include "stohom/symmat.hpp"
#include "stohom/table.hpp"

namespace stohom {

/**
 * @brief Settings of one oscillation-to-limit comparison: the problem, the
 *        eps ladder, the realization torus, and the mesh policy (cells per
 *        eps-period; the mesh is the unit box scaled by eps / cells_per_eps).
 */
struct StudyConfig {
  DirichletProblem problem;
  std::vector<double> epsilons;
  GridSpec torus;
  int cells_per_eps = 16;
  double corrector_tol = 1e-9;
  int corrector_max_iter = 10000;
  double dirichlet_tol = 1e-10;
  int dirichlet_max_iter = 20000;
  std::array<double, 3> lengths{1.0, 1.0, 1.0};

  void validate() const {
    if (problem.dim < 1 || problem.dim > 3)
      throw std::invalid_argument("StudyConfig: dim must be 1, 2, or 3");
    torus.validate();
    if (torus.dim != problem.dim)
      throw std::invalid_argument("StudyConfig: torus dimension mismatch");
    if (epsilons.empty()) throw std::invalid_argument("StudyConfig: no epsilons");
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
      if (!(epsilons[k] > 0.0 && epsilons[k] <= 1.0))
        throw std::invalid_argument("StudyConfig: eps must be in (0,1]");
      if (k && !(epsilons[k] < epsilons[k - 1]))
        throw std::invalid_argument("StudyConfig: epsilons must decrease strictly");
    }
    if (cells_per_eps < 8)
      throw std::invalid_argument("StudyConfig: need at least 8 cells per eps");
    for (int t = 0; t < problem.dim; ++t)
      if (!(lengths[static_cast<std::size_t>(t)] > 0.0))
        throw std::invalid_argument("StudyConfig: box lengths must be positive");
  }

  /// Mesh for one eps: h = eps / cells_per_eps, box commensurability enforced.
  GridSpec mesh_for(double eps) const {
    GridSpec mesh;
    mesh.dim = problem.dim;
    mesh.periodic = false;
    mesh.h = eps / static_cast<double>(cells_per_eps);
    for (int t = 0; t < problem.dim; ++t) {
      const double want = lengths[static_cast<std::size_t>(t)] / mesh.h;
      const Index n = static_cast<Index>(std::llround(want));
      if (std::abs(want - static_cast<double>(n)) > 1e-9 * want || n < 2)
        throw std::invalid_argument("StudyConfig: box side not commensurate with the mesh");
      mesh.cells[static_cast<std::size_t>(t)] = n;
    }
    return mesh;
  }
};

/**
 * @brief Per-eps diagnostics of the study: relative L2 distance to the
 *        homogenized solution and the H1 seminorm of the oscillating solve.
 */
struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<double> l2_errors;
  std::vector<double> h1_seminorms;
  SymMat matrix{1};  ///< limit matrix used for the homogenized solves
};

/**
 * @brief Run the eps ladder for one fixed realization against a prescribed
 *        limit matrix: u_eps and u_h are solved on the same mesh per eps and
 *        compared in relative L2.
 */
inline ConvergenceReport convergence_study(const CoefficientField& realization,
                                           const SymMat& limit, const StudyConfig& cfg) {
  cfg.validate();
  if (realization.grid().dim != cfg.problem.dim)
    throw std::invalid_argument("convergence_study: realization dimension mismatch");
  ConvergenceReport report;
  report.matrix = limit;
  for (const double eps : cfg.epsilons) {
    const GridSpec mesh = cfg.mesh_for(eps);
    const ScalarField u_eps = solve_eps(cfg.problem, realization, eps, mesh, cfg.dirichlet_tol,
                                        cfg.dirichlet_max_iter);
    const ScalarField u_hom =
        solve_hom(cfg.problem, limit, mesh, cfg.dirichlet_tol, cfg.dirichlet_max_iter);
    ScalarField diff(u_eps.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u_eps[i] - u_hom[i];
    const double ref = l2_norm(mesh, u_hom);
    if (!(ref > 0.0))
      throw std::runtime_error("convergence_study: homogenized solution vanishes");
    report.epsilons.push_back(eps);
    report.l2_errors.push_back(l2_norm(mesh, diff) / ref);
    report.h1_seminorms.push_back(h1_seminorm(mesh, u_eps));
  }
  return report;
}

/// Study for a fixed realization; the limit matrix is its corrector solve.
inline ConvergenceReport convergence_study(const CoefficientField& realization,
                                           const StudyConfig& cfg) {
  cfg.validate();
  const CorrectorSolution corr =
      solve_correctors(realization, cfg.corrector_tol, cfg.corrector_max_iter);
  return convergence_study(realization, homogenized_matrix(realization, corr), cfg);
}

/**
 * @brief Study for a sampled component of a stationary law: one component
 *        and one realization are drawn, then held fixed across the ladder.
 */
inline ConvergenceReport convergence_study(const StationaryMeasureSpec& spec,
                                           const StudyConfig& cfg, Rng& rng) {
  cfg.validate();
  const SampledComponent sc = sample_component(spec, rng);
  const CoefficientField realization = sc.generate(cfg.torus, rng);
  return convergence_study(realization, cfg);
}

/// Table form: columns eps, l2_error, h1_seminorm, 17 significant digits.
inline void write_convergence_table(const ConvergenceReport& report, std::ostream& os) {
  TextTable table({"eps", "l2_error", "h1_seminorm"});
  for (std::size_t k = 0; k < report.epsilons.size(); ++k)
    table.add_row({format_sig17(report.epsilons[k]), format_sig17(report.l2_errors[k]),
                   format_sig17(report.h1_seminorms[k])});
  table.write(os);
}

/// Comma-separated plot data with the same columns, for gnuplot/CSV tools.
inline void write_convergence_csv(const ConvergenceReport& report, std::ostream& os) {
  os << "eps,l2_error,h1_seminorm\n";
  for (std::size_t k = 0; k < report.epsilons.size(); ++k)
    os << format_sig17(report.epsilons[k]) << ',' << format_sig17(report.l2_errors[k]) << ','
       << format_sig17(report.h1_seminorms[k]) << '\n';
}

}  // namespace stohom
