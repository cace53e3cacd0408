#include <cstdio>
#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "stohom/elliptic_map.hpp"
#include "stohom/field.hpp"
#include "stohom/rng.hpp"

using namespace stohom;

namespace {
GridSpec small_grid() { return GridSpec{.dim = 2, .cells = {3, 4, 1}, .h = 0.25}; }
}  // namespace

TEST_CASE("CoefficientField stores and returns cell matrices") {
  CoefficientField f(small_grid(), {0.5, 5.0});
  SymMat m(2);
  m(0, 0) = 2.0;
  m(0, 1) = -0.5;
  m(1, 1) = 3.0;
  f.set_cell(7, m);
  CHECK(f.cell(7) == m);
  CHECK(f.cell(0) == SymMat(2));
  CHECK(f.tri_entry(7, 1) == -0.5);
  SymMat wrong(3);
  CHECK_THROWS_AS(f.set_cell(0, wrong), std::invalid_argument);
}

TEST_CASE("check_ellipticity scans eigenvalues and asymmetry") {
  GridSpec g{.dim = 2, .cells = {2, 2, 1}, .h = 1.0};
  std::vector<double> full(4 * 4, 0.0);
  for (int c = 0; c < 4; ++c) {
    full[c * 4 + 0] = 2.0;
    full[c * 4 + 3] = 2.0;
  }
  full[2 * 4 + 1] = 1.0;  // symmetric off-diagonal pair on cell 2
  full[2 * 4 + 2] = 1.0;
  auto rep = check_ellipticity(g, full, {1.0, 3.0});
  CHECK(rep.symmetric);
  CHECK(rep.min_eig == Catch::Approx(1.0));
  CHECK(rep.max_eig == Catch::Approx(3.0));

  full[3 * 4 + 1] = 0.5;  // unmatched entry: asymmetric cell 3
  rep = check_ellipticity(g, full, {1.0, 3.0});
  CHECK_FALSE(rep.symmetric);
  CHECK(rep.max_asymmetry == Catch::Approx(0.5));

  CHECK_THROWS_AS(check_ellipticity(g, std::vector<double>(5), EllipticityBounds{1.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("field container round-trips through disk") {
  const auto dir = std::filesystem::temp_directory_path() / "stohom_field_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "f.hmfd").string();

  CoefficientField f(GridSpec{.dim = 3, .cells = {3, 2, 4}, .h = 0.125, .periodic = true},
                     {0.25, 8.0});
  Rng r(5);
  for (Index c = 0; c < f.cell_count(); ++c) {
    SymMat m = SymMat::identity(3, 1.0 + r.uniform01());
    m(0, 2) = 0.1 * r.uniform01();
    f.set_cell(c, m);
  }
  save_field(f, path);
  const CoefficientField g = load_field(path);
  CHECK(g.grid() == f.grid());
  CHECK(g.bounds().lambda == f.bounds().lambda);
  CHECK(g.bounds().Lambda == f.bounds().Lambda);
  CHECK(g.raw() == f.raw());

  save_sidecar(path, {{"kind", "test"}, {"seed", "5"}});
  std::ifstream side(path + ".txt");
  std::string line;
  std::getline(side, line);
  CHECK(line == "kind = test");

  std::ofstream bad(path, std::ios::binary);
  bad << "NOPE";
  bad.close();
  CHECK_THROWS_AS(load_field(path), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("EllipticMap variants hit their stated windows") {
  const auto aff = EllipticMap::affine_clamped(1.0, 4.0, 2.0, 1.0);
  CHECK(aff(10.0) == 4.0);
  CHECK(aff(-5.0) == 1.0);
  CHECK(aff(0.0) == Catch::Approx(2.0));
  CHECK(aff(1.5) == Catch::Approx(3.5));
  CHECK(aff.continuous());

  const auto logi = EllipticMap::logistic(1.0, 3.0);
  CHECK(logi(0.0) == Catch::Approx(2.0));
  CHECK(logi(100.0) == Catch::Approx(3.0));
  CHECK(logi(-100.0) == Catch::Approx(1.0));
  CHECK(logi.continuous());

  const auto tp = EllipticMap::two_phase(1.0, 4.0, 0.0);
  CHECK(tp(-1e-300) == 1.0);
  CHECK(tp(0.0) == 4.0);
  CHECK_FALSE(tp.continuous());
  CHECK(tp.bounds().lambda == 1.0);
  CHECK(tp.bounds().Lambda == 4.0);
  CHECK(tp.describe().find("non-continuous") != std::string::npos);

  CHECK_THROWS_AS(EllipticMap::logistic(1.0, 4.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(EllipticMap::two_phase(0.0, 4.0, 0.0), std::invalid_argument);
}

TEST_CASE("map_field applies pointwise and validates input") {
  const GridSpec g{.dim = 1, .cells = {4, 1, 1}, .h = 0.25};
  const auto tp = EllipticMap::two_phase(1.0, 4.0, 0.0);
  const ScalarField x{-1.0, 1.0, -0.5, 0.5};
  const auto f = map_field(g, x, tp);
  CHECK(f.cell(0)(0, 0) == 1.0);
  CHECK(f.cell(1)(0, 0) == 4.0);
  CHECK(f.cell(2)(0, 0) == 1.0);
  CHECK(f.cell(3)(0, 0) == 4.0);

  CHECK_THROWS_WITH(map_field(g, ScalarField{0.0, 1.0, std::nan(""), 0.0}, tp),
                    Catch::Matchers::ContainsSubstring("cell 2"));
  CHECK_THROWS_AS(map_field(g, ScalarField{1.0}, tp), std::invalid_argument);
}

TEST_CASE("map_field averages channels before mapping") {
  const GridSpec g{.dim = 1, .cells = {2, 1, 1}, .h = 0.5};
  const auto aff = EllipticMap::affine_clamped(1.0, 3.0, 1.5, 1.0);
  const std::vector<ScalarField> chans{{0.0, 1.0}, {1.0, 0.0}, {0.5, 0.5}};
  const auto f = map_field(g, chans, aff);
  CHECK(f.cell(0)(0, 0) == Catch::Approx(2.0));
  CHECK(f.cell(1)(0, 0) == Catch::Approx(2.0));
  CHECK_THROWS_AS(map_field(g, std::vector<ScalarField>{}, aff), std::invalid_argument);
  CHECK_THROWS_AS(map_field(g, std::vector<ScalarField>{{1.0, 2.0}, {1.0}}, aff),
                  std::invalid_argument);
}
