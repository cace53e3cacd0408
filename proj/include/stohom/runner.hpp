#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stohom/config.hpp"
#include "stohom/convergence.hpp"
#include "stohom/corrector.hpp"
#include "stohom/manifest.hpp"
#include "stohom/measure.hpp"
#include "stohom/resonance.hpp"
#include "stohom/table.hpp"

namespace stohom {

/// Command-line overrides applied on top of the config file.
struct RunOptions {
  std::string config_path;
  std::string expected_command;  ///< positional CLI command; must match the config
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads;
  std::optional<std::string> output_dir;
};

namespace detail {

/// --threads wins; the environment variable is read only in its absence.
inline int resolve_threads(const RunOptions& opt, std::vector<Diagnostic>& diags) {
  if (opt.threads) {
    if (*opt.threads < 1)
      add_diag(diags, "--threads", "must be >= 1", "request at least one worker");
    return *opt.threads;
  }
  const char* env = std::getenv("STOHOM_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    add_diag(diags, "STOHOM_THREADS", "environment value '" + std::string(env) +
                                          "' is not a positive integer",
             "unset it or use --threads");
    return 1;
  }
  return static_cast<int>(v);
}

inline std::vector<std::string> matrix_columns(int dim) {
  std::vector<std::string> cols;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) cols.push_back("a_" + std::to_string(i) + std::to_string(j));
  return cols;
}

inline std::vector<std::string> matrix_row(const SymMat& m) {
  std::vector<std::string> row;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j) row.push_back(format_sig17(m(i, j)));
  return row;
}

/// Write a result table and record it in the manifest.
inline void emit(const std::string& dir, const std::string& name, const std::string& body,
                 RunManifest& manifest) {
  std::ofstream os(dir + "/" + name, std::ios::binary);
  if (!os) throw std::runtime_error("runner: cannot write " + name);
  os << body;
  os.close();
  manifest.add_file(dir, name);
}

struct RunLog {
  std::vector<std::string> lines;
  void add(const std::string& line) { lines.push_back(line); }
  std::string body() const {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s;
  }
};

inline void run_homogenize(const ExperimentConfig& cfg, const std::string& dir,
                           RunManifest& manifest, RunLog& log, std::ostream& out) {
  Rng rng = Rng::stream(cfg.master_seed, 0, kLawStreamTag);
  manifest.sample_seeds.push_back(Rng::stream_seed(cfg.master_seed, 0, kLawStreamTag));
  SampledComponent sc = sample_component(*cfg.measure, rng);
  const CoefficientField field = sc.generate(cfg.grid, rng);
  const CorrectorSolution sol = solve_correctors(field, cfg.solver_tol, cfg.solver_max_iter);
  const SymMat a = homogenized_matrix(field, sol);

  std::ostringstream stats;
  stats << "corrector iterations=" << sol.iterations << " residual=" << format_sig17(sol.residual)
        << " component=" << sc.label.index;
  log.add(stats.str());

  TextTable table(matrix_columns(cfg.grid.dim));
  table.add_row(matrix_row(a));
  std::ostringstream body;
  table.write(body);
  emit(dir, "homogenized.txt", body.str(), manifest);
  out << "homogenized matrix written to " << dir << "/homogenized.txt\n";
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j)
      out << "  a_" << i << j << " = " << format_sig17(a(i, j)) << "\n";
}

inline void run_law(const ExperimentConfig& cfg, const std::string& dir, int threads,
                    RunManifest& manifest, RunLog& log, std::ostream& out) {
  SolverConfig solver;
  solver.grid = cfg.grid;
  solver.tol = cfg.solver_tol;
  solver.max_iter = cfg.solver_max_iter;
  const EmpiricalLaw law = estimate_law(*cfg.measure, cfg.samples, solver, cfg.master_seed,
                                        threads);
  for (int i = 0; i < cfg.samples; ++i)
    manifest.sample_seeds.push_back(
        Rng::stream_seed(cfg.master_seed, static_cast<std::uint64_t>(i), kLawStreamTag));

  std::ostringstream stats;
  stats << "samples=" << law.requested << " aborted=" << law.aborted.size();
  log.add(stats.str());
  for (std::size_t k = 0; k < law.aborted.size(); ++k)
    log.add("aborted sample " + std::to_string(law.aborted[k]) + ": " + law.abort_messages[k]);

  std::ostringstream body;
  write_law_table(law, body);
  emit(dir, "law.txt", body.str(), manifest);
  out << "law table (" << law.samples.size() << " rows) written to " << dir << "/law.txt\n";
}

inline void run_resonance(const ExperimentConfig& cfg, const std::string& dir,
                          RunManifest& manifest, RunLog& log, std::ostream& out) {
  const FrequencySet& freqs = *cfg.frequencies;
  const ResonanceLattice lattice = kernel_basis(freqs);
  for (const auto& row : lattice.basis)
    if (!verify_relation(freqs, row))
      throw std::runtime_error("resonance: basis row fails exact verification");
  const bool saturated = is_saturated(lattice);

  std::ostringstream body;
  body << "atoms " << lattice.atoms << "\n";
  body << "rank " << lattice.rank() << "\n";
  body << "saturated " << (saturated ? "true" : "false") << "\n";
  for (const auto& row : lattice.basis) {
    body << "basis_row";
    for (std::int64_t k : row) body << " " << k;
    body << "\n";
  }
  emit(dir, "resonance.txt", body.str(), manifest);

  log.add("resonance atoms=" + std::to_string(lattice.atoms) +
          " rank=" + std::to_string(lattice.rank()) +
          " saturated=" + (saturated ? std::string("true") : std::string("false")));
  out << "resonance lattice: rank " << lattice.rank() << " over " << lattice.atoms << " atoms\n";
  for (const auto& row : lattice.basis) {
    out << "  basis row:";
    for (std::int64_t k : row) out << " " << k;
    out << "\n";
  }
}

inline void run_converge(const ExperimentConfig& cfg, const std::string& dir,
                         RunManifest& manifest, RunLog& log, std::ostream& out) {
  StudyConfig study;
  study.problem.dim = cfg.grid.dim;
  study.epsilons = cfg.study_eps;
  study.torus = cfg.grid;
  study.cells_per_eps = cfg.study_cells_per_eps;
  study.corrector_tol = cfg.solver_tol;
  study.corrector_max_iter = cfg.solver_max_iter;
  study.dirichlet_tol = cfg.study_tol;
  study.dirichlet_max_iter = cfg.study_max_iter;
  study.lengths = {cfg.study_length, cfg.study_length, cfg.study_length};

  Rng rng = Rng::stream(cfg.master_seed, 0, kLawStreamTag);
  manifest.sample_seeds.push_back(Rng::stream_seed(cfg.master_seed, 0, kLawStreamTag));
  const ConvergenceReport report = convergence_study(*cfg.measure, study, rng);

  for (std::size_t k = 0; k < report.epsilons.size(); ++k)
    log.add("eps=" + format_sig17(report.epsilons[k]) +
            " l2_error=" + format_sig17(report.l2_errors[k]) +
            " h1_seminorm=" + format_sig17(report.h1_seminorms[k]));

  std::ostringstream table, csv;
  write_convergence_table(report, table);
  write_convergence_csv(report, csv);
  emit(dir, "convergence.txt", table.str(), manifest);
  emit(dir, "convergence.csv", csv.str(), manifest);
  out << "convergence study (" << report.epsilons.size() << " scales) written to " << dir
      << "/convergence.txt\n";
}

inline void run_sample_field(const ExperimentConfig& cfg, const std::string& dir,
                             RunManifest& manifest, RunLog& log, std::ostream& out) {
  Rng rng = Rng::stream(cfg.master_seed, 0, kLawStreamTag);
  manifest.sample_seeds.push_back(Rng::stream_seed(cfg.master_seed, 0, kLawStreamTag));
  SampledComponent sc = sample_component(*cfg.measure, rng);
  const CoefficientField field = sc.generate(cfg.grid, rng);

  save_field(field, dir + "/field.hmfd");
  std::map<std::string, std::string> sidecar;
  sidecar["dim"] = std::to_string(field.dim());
  sidecar["cells_per_axis"] = std::to_string(cfg.grid.cells[0]);
  sidecar["h"] = format_sig17(cfg.grid.h);
  sidecar["component_index"] = std::to_string(sc.label.index);
  sidecar["lambda"] = format_sig17(field.bounds().lambda);
  sidecar["Lambda"] = format_sig17(field.bounds().Lambda);
  save_sidecar(dir + "/field.hmfd", sidecar);
  manifest.add_file(dir, "field.hmfd");
  manifest.add_file(dir, "field.hmfd.txt");

  log.add("sampled component index=" + std::to_string(sc.label.index) +
          " cells=" + std::to_string(field.cell_count()));
  out << "realization written to " << dir << "/field.hmfd\n";
}

}  // namespace detail

/**
 * @brief Load, validate, and execute one experiment.
 *
 * Exit status 0 on success, 1 on validation failure (every diagnostic is
 * printed with its key path), 2 on numerical failure. All result tables,
 * run.log, and manifest.json land in the output directory; the manifest
 * lists every written file with a content hash.
 */
inline int run_experiment(const RunOptions& opt, std::ostream& out = std::cout,
                          std::ostream& err = std::cerr) {
  nlohmann::json raw;
  try {
    raw = load_config_file(opt.config_path);
  } catch (const std::exception& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  }

  ExperimentConfig cfg;
  std::vector<Diagnostic> diags = validate_config(raw, &cfg);
  const int threads = detail::resolve_threads(opt, diags);
  if (diags.empty() && !opt.expected_command.empty() && cfg.command != opt.expected_command)
    detail::add_diag(diags, "(root).command",
                     "config says '" + cfg.command + "' but the command line says '" +
                         opt.expected_command + "'",
                     "make them agree");
  if (!diags.empty()) {
    for (const auto& d : diags) err << "validation error: " << d.format() << "\n";
    return 1;
  }
  if (opt.seed_override) cfg.master_seed = *opt.seed_override;
  if (opt.output_dir) cfg.output_dir = *opt.output_dir;

  RunManifest manifest;
  manifest.config_file = opt.config_path;
  manifest.config_digest = config_hash(raw);
  manifest.command = cfg.command;
  manifest.master_seed = cfg.master_seed;
  manifest.threads = threads;
  manifest.started_utc = utc_now();

  detail::RunLog log;
  log.add("command=" + cfg.command);
  log.add("config_digest=" + manifest.config_digest);
  log.add("master_seed=" + std::to_string(cfg.master_seed));
  log.add("threads=" + std::to_string(threads));

  try {
    std::filesystem::create_directories(cfg.output_dir);
    if (cfg.command == "homogenize")
      detail::run_homogenize(cfg, cfg.output_dir, manifest, log, out);
    else if (cfg.command == "law")
      detail::run_law(cfg, cfg.output_dir, threads, manifest, log, out);
    else if (cfg.command == "resonance")
      detail::run_resonance(cfg, cfg.output_dir, manifest, log, out);
    else if (cfg.command == "converge")
      detail::run_converge(cfg, cfg.output_dir, manifest, log, out);
    else
      detail::run_sample_field(cfg, cfg.output_dir, manifest, log, out);
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }

  try {
    detail::emit(cfg.output_dir, "run.log", log.body(), manifest);
    manifest.finished_utc = utc_now();
    manifest.write(cfg.output_dir);
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace stohom
