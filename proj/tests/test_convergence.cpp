#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "stohom/convergence.hpp"
#include "stohom/dirichlet.hpp"
#include "stohom/measure.hpp"

using namespace stohom;

namespace {

GridSpec torus(int dim, Index n, double length = 1.0) {
  GridSpec g;
  g.dim = dim;
  g.cells = {1, 1, 1};
  for (int t = 0; t < dim; ++t) g.cells[static_cast<std::size_t>(t)] = n;
  g.h = length / static_cast<double>(n);
  return g;
}

GridSpec mesh1d(Index n) {
  GridSpec m = torus(1, n);
  m.periodic = false;
  return m;
}

CoefficientField constant_torus(int dim, Index n, double c) {
  const GridSpec g = torus(dim, n);
  CoefficientField f(g, {c, c});
  for (Index id = 0; id < g.cell_count(); ++id) f.set_cell(id, SymMat::identity(dim, c));
  return f;
}

/// Two-phase {1,4} on equal halves of the unit torus, cell-aligned.
CoefficientField two_phase_torus(Index n) {
  const GridSpec g = torus(1, n);
  CoefficientField f(g, {1.0, 4.0});
  for (Index i = 0; i < n; ++i)
    f.set_cell(i, SymMat::identity(1, i < n / 2 ? 1.0 : 4.0));
  return f;
}

/// Center value of the unit-square Poisson problem (A = Id, f = 1).
double poisson_square_center() {
  double s = 0.0;
  for (int m = 1; m < 400; m += 2)
    for (int n = 1; n < 400; n += 2) {
      const double sign = (((m - 1) / 2 + (n - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
      s += sign / (static_cast<double>(m) * n * (static_cast<double>(m) * m + static_cast<double>(n) * n));
    }
  return 16.0 / std::pow(std::numbers::pi, 4) * s;
}

}  // namespace

TEST_CASE("constant-coefficient 1D solve reproduces the parabola") {
  DirichletProblem prob;
  prob.dim = 1;
  const double alpha = 2.5;
  const CoefficientField a = constant_torus(1, 8, alpha);
  const GridSpec mesh = mesh1d(64);
  const ScalarField u = solve_eps(prob, a, 1.0, mesh);
  REQUIRE(u.size() == 63);
  double sup = 0.0;
  for (Index j = 1; j < 64; ++j) {
    const double x = static_cast<double>(j) * mesh.h;
    sup = std::max(sup, std::abs(u[static_cast<std::size_t>(j - 1)] -
                                 x * (1.0 - x) / (2.0 * alpha)));
  }
  CHECK(sup < mesh.h * mesh.h);
}

TEST_CASE("zero right-hand side gives the zero solution") {
  DirichletProblem prob;
  prob.dim = 1;
  prob.rhs = [](const std::array<double, 3>&) { return 0.0; };
  const ScalarField u = solve_eps(prob, constant_torus(1, 8, 1.0), 1.0, mesh1d(32));
  for (double v : u) CHECK(v == 0.0);
}

TEST_CASE("two-phase flux balances the load cellwise") {
  DirichletProblem prob;
  prob.dim = 1;
  const GridSpec mesh = mesh1d(128);
  const double eps = 0.125;
  const CoefficientField a = two_phase_torus(16);
  const ScalarField u = solve_eps(prob, a, eps, mesh);
  const std::vector<SymMat> cells = unroll_coefficient(a, mesh, eps);

  const Index n = mesh.cells[0];
  auto node_value = [&](Index j) {
    return (j == 0 || j == n) ? 0.0 : u[static_cast<std::size_t>(j - 1)];
  };
  for (Index j = 1; j < n; ++j) {
    const double flux_left =
        cells[static_cast<std::size_t>(j - 1)](0, 0) * (node_value(j) - node_value(j - 1)) / mesh.h;
    const double flux_right =
        cells[static_cast<std::size_t>(j)](0, 0) * (node_value(j + 1) - node_value(j)) / mesh.h;
    // equilibrium at node j: flux jump equals the lumped load h * f
    CHECK(std::abs(flux_right - flux_left + mesh.h) < 1e-9);
  }
}

TEST_CASE("resolution and input guards fire") {
  DirichletProblem prob;
  prob.dim = 1;
  const CoefficientField a = constant_torus(1, 8, 1.0);
  CHECK_THROWS_AS(solve_eps(prob, a, 0.125, mesh1d(16), 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(solve_eps(prob, a, 1.5, mesh1d(64)), std::invalid_argument);

  GridSpec periodic_mesh = torus(1, 64);
  CHECK_THROWS_AS(solve_eps(prob, a, 1.0, periodic_mesh), std::invalid_argument);

  DirichletProblem bad;
  bad.dim = 1;
  bad.rhs = [](const std::array<double, 3>&) { return std::nan(""); };
  CHECK_THROWS_AS(solve_eps(bad, a, 1.0, mesh1d(64)), std::invalid_argument);

  SymMat sing(1);
  CHECK_THROWS_AS(solve_hom(prob, sing, mesh1d(64)), std::invalid_argument);
}

TEST_CASE("homogenized 2D solve matches the series oracle at the center") {
  DirichletProblem prob;
  prob.dim = 2;
  GridSpec mesh = torus(2, 64);
  mesh.periodic = false;
  DirichletStats stats;
  const ScalarField u = solve_hom(prob, SymMat::identity(2, 1.0), mesh, 1e-10, 20000, &stats);
  CHECK(stats.iterations <= 2);  // exact preconditioner for constant coefficients
  const Index m = 63;
  const double center = u[static_cast<std::size_t>((m / 2) * m + m / 2)];
  CHECK(std::abs(center - poisson_square_center()) < 5e-4);

  const ScalarField u2 = solve_hom(prob, SymMat::identity(2, 2.0), mesh);
  const double center2 = u2[static_cast<std::size_t>((m / 2) * m + m / 2)];
  CHECK(std::abs(center2 - center / 2.0) < 1e-9);
}

TEST_CASE("anisotropic matrices are accepted by the 2D solver") {
  DirichletProblem prob;
  prob.dim = 2;
  GridSpec mesh = torus(2, 32);
  mesh.periodic = false;
  SymMat a(2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  a(0, 1) = 0.3;
  DirichletStats stats;
  const ScalarField u = solve_hom(prob, a, mesh, 1e-10, 20000, &stats);
  CHECK(stats.residual <= 1e-10);
  double mx = 0.0;
  for (double v : u) mx = std::max(mx, v);
  CHECK(mx > 0.0);
}

TEST_CASE("study of a constant component has vanishing errors") {
  StudyConfig cfg;
  cfg.problem.dim = 1;
  cfg.epsilons = {0.5, 0.25};
  cfg.torus = torus(1, 8);
  const ConvergenceReport rep = convergence_study(constant_torus(1, 8, 3.0), cfg);
  REQUIRE(rep.l2_errors.size() == 2);
  for (double e : rep.l2_errors) CHECK(e <= 1e-8);
  CHECK(std::abs(rep.matrix(0, 0) - 3.0) < 1e-12);
}

TEST_CASE("two-phase study converges to the harmonic-mean limit") {
  StudyConfig cfg;
  cfg.problem.dim = 1;
  cfg.epsilons = {0.125, 0.0625, 0.03125};
  cfg.torus = torus(1, 16);
  cfg.cells_per_eps = 16;
  const CoefficientField realization = two_phase_torus(16);
  const ConvergenceReport rep = convergence_study(realization, cfg);

  CHECK(std::abs(rep.matrix(0, 0) - 1.6) < 1e-8);
  REQUIRE(rep.l2_errors.size() == 3);
  CHECK(rep.l2_errors[1] < rep.l2_errors[0]);
  CHECK(rep.l2_errors[2] < rep.l2_errors[1]);
  CHECK(rep.l2_errors[2] < 0.02);

  // discrete a-priori energy bound with the unit-box Poincare constant
  const double bound = 1.0 / std::numbers::pi;
  for (double s : rep.h1_seminorms) CHECK(s <= 1.1 * bound);

  // the Voigt matrix is the wrong limit and the study notices
  const VoigtReussBounds vr = voigt_reuss_bounds(realization);
  const ConvergenceReport voigt = convergence_study(realization, vr.upper, cfg);
  CHECK(voigt.l2_errors.back() > 5.0 * rep.l2_errors.back());
}

TEST_CASE("conditioning a mixture on the drawn component replays exactly") {
  CoefficientField pattern(torus(1, 2), {1.0, 4.0});
  pattern.set_cell(0, SymMat::identity(1, 1.0));
  pattern.set_cell(1, SymMat::identity(1, 4.0));

  MixtureSpec mix;
  mix.entries.push_back({0.5, ShiftedPeriodicComponent{pattern, true}});
  mix.entries.push_back({0.5, ConstantComponent{SymMat::identity(1, 2.0)}});
  const StationaryMeasureSpec spec{mix};

  StudyConfig cfg;
  cfg.problem.dim = 1;
  cfg.epsilons = {0.25, 0.125};
  cfg.torus = torus(1, 16);

  const std::uint64_t seed = 99;
  Rng probe(seed);
  const int k = sample_component(spec, probe).label.index;

  MixtureSpec conditioned;
  conditioned.entries.push_back({1.0, mix.entries[static_cast<std::size_t>(k)].component});

  Rng r1(seed), r2(seed);
  const ConvergenceReport full = convergence_study(spec, cfg, r1);
  const ConvergenceReport cond =
      convergence_study(StationaryMeasureSpec{conditioned}, cfg, r2);
  REQUIRE(full.l2_errors.size() == cond.l2_errors.size());
  for (std::size_t i = 0; i < full.l2_errors.size(); ++i) {
    CHECK(full.l2_errors[i] == cond.l2_errors[i]);
    CHECK(full.h1_seminorms[i] == cond.h1_seminorms[i]);
  }
}

TEST_CASE("study configuration is validated") {
  StudyConfig cfg;
  cfg.problem.dim = 1;
  cfg.torus = torus(1, 8);

  cfg.epsilons = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilons = {0.25, 0.25};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilons = {0.25, 0.125};
  cfg.cells_per_eps = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.cells_per_eps = 16;
  CHECK_NOTHROW(cfg.validate());

  cfg.lengths[0] = 0.37;  // not commensurate with eps/cells_per_eps
  CHECK_THROWS_AS(cfg.mesh_for(0.25), std::invalid_argument);
}

TEST_CASE("convergence tables and plot data render all rows") {
  ConvergenceReport rep;
  rep.epsilons = {0.25, 0.125};
  rep.l2_errors = {0.04, 0.02};
  rep.h1_seminorms = {0.3, 0.31};
  std::ostringstream table, csv;
  write_convergence_table(rep, table);
  write_convergence_csv(rep, csv);
  const std::string text = table.str();
  const std::string plot = csv.str();
  CHECK(text.substr(0, text.find('\n')) == "eps l2_error h1_seminorm");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(plot.substr(0, plot.find('\n')) == "eps,l2_error,h1_seminorm");
  CHECK(plot.find(',') != std::string::npos);
}
