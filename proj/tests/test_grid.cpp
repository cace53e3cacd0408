#include <catch2/catch_amalgamated.hpp>

#include "stohom/grid.hpp"

using namespace stohom;

TEST_CASE("GridSpec validate rejects bad parameters") {
  GridSpec g;
  g.dim = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.dim = 4;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GridSpec{};
  g.h = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GridSpec{};
  g.cells = {1, 1, 1};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GridSpec{.dim = 2, .cells = {4, 4, 2}};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = GridSpec{.dim = 3, .cells = {4, 3, 2}, .h = 0.25};
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("GridSpec flat and unflatten are inverse, last axis contiguous") {
  GridSpec g{.dim = 3, .cells = {4, 3, 5}, .h = 1.0};
  CHECK(g.cell_count() == 60);
  CHECK(g.flat({0, 0, 0}) == 0);
  CHECK(g.flat({0, 0, 1}) == 1);
  CHECK(g.flat({0, 1, 0}) == 5);
  CHECK(g.flat({1, 0, 0}) == 15);
  for (Index id = 0; id < g.cell_count(); ++id) {
    const auto iv = g.unflatten(id);
    CHECK(g.flat(iv) == id);
    for (int t = 0; t < 3; ++t) {
      CHECK(iv[t] >= 0);
      CHECK(iv[t] < g.cells[t]);
    }
  }
}

TEST_CASE("GridSpec geometry helpers") {
  GridSpec g{.dim = 2, .cells = {8, 4, 1}, .h = 0.5};
  CHECK(g.side(0) == Catch::Approx(4.0));
  CHECK(g.side(1) == Catch::Approx(2.0));
  CHECK(g.cell_center(0, 0) == Catch::Approx(0.25));
  CHECK(g.cell_center(0, 7) == Catch::Approx(3.75));
}

TEST_CASE("GridSpec wrap handles negative indices") {
  GridSpec g{.dim = 1, .cells = {8, 1, 1}, .h = 1.0};
  CHECK(g.wrap(0, 0) == 0);
  CHECK(g.wrap(0, 8) == 0);
  CHECK(g.wrap(0, -1) == 7);
  CHECK(g.wrap(0, -17) == 7);
  CHECK(g.wrap(0, 13) == 5);
}
