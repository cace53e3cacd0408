#include <algorithm>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "stohom/resonance.hpp"
#include "stohom/rng.hpp"

using namespace stohom;

namespace {

FrequencySet random_rational_set(Rng& rng, int max_atoms) {
  FrequencySet f;
  f.dim = 1 + static_cast<int>(rng.below(2));
  const int gens = 1 + static_cast<int>(rng.below(2));
  for (int g = 0; g < gens; ++g) f.generators.push_back("b" + std::to_string(g + 1));
  const int atoms = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms - 1)));
  f.coeffs.resize(atoms);
  for (int i = 0; i < atoms; ++i) {
    f.coeffs[i].resize(f.dim);
    bool nonzero = false;
    for (int t = 0; t < f.dim; ++t) {
      for (int g = 0; g < gens; ++g) {
        const std::int64_t num = static_cast<std::int64_t>(rng.below(7)) - 3;
        const std::int64_t den = 1 + static_cast<std::int64_t>(rng.below(3));
        f.coeffs[i][t].emplace_back(num, den);
        nonzero = nonzero || num != 0;
      }
    }
    if (!nonzero) f.coeffs[i][0][0] = Rational(1);
  }
  return f;
}

ResonanceLattice make_lattice(int atoms, std::vector<std::vector<std::int64_t>> rows) {
  ResonanceLattice l;
  l.atoms = atoms;
  l.basis = std::move(rows);
  return l;
}

}  // namespace

TEST_CASE("kernel_basis on incommensurable generators is trivial") {
  FrequencySet f;
  f.dim = 1;
  f.generators = {"b1", "b2"};
  f.coeffs = {{{Rational(1), Rational(0)}}, {{Rational(0), Rational(1)}}};
  const auto lat = kernel_basis(f);
  CHECK(lat.atoms == 2);
  CHECK(lat.rank() == 0);
}

TEST_CASE("kernel_basis on {1, 2} finds the single relation") {
  const auto lat = kernel_basis(FrequencySet::scalar({Rational(1), Rational(2)}));
  REQUIRE(lat.rank() == 1);
  const std::vector<std::int64_t> expect{2, -1};
  const std::vector<std::int64_t> expect_neg{-2, 1};
  CHECK((lat.basis[0] == expect || lat.basis[0] == expect_neg));
}

TEST_CASE("kernel_basis on {1, 2, 3} spans the reference lattice") {
  const auto lat = kernel_basis(FrequencySet::scalar({Rational(1), Rational(2), Rational(3)}));
  REQUIRE(lat.rank() == 2);
  const auto ref = make_lattice(3, {{-2, 1, 0}, {-3, 0, 1}});
  CHECK(lattice_equal(lat, ref));
  CHECK(is_saturated(lat));
  for (const auto& row : lat.basis)
    CHECK(verify_relation(FrequencySet::scalar({Rational(1), Rational(2), Rational(3)}), row));
}

TEST_CASE("kernel_basis output is Hermite-reduced and deterministic") {
  const auto f = FrequencySet::scalar({Rational(2, 3), Rational(4, 3), Rational(2)});
  const auto a = kernel_basis(f);
  const auto b = kernel_basis(f);
  CHECK(a.basis == b.basis);
  for (const auto& row : a.basis) {
    int p = 0;
    while (p < a.atoms && row[p] == 0) ++p;
    REQUIRE(p < a.atoms);
    CHECK(row[p] > 0);
  }
}

TEST_CASE("brute_force_kernel enumerates exactly") {
  const auto f12 = FrequencySet::scalar({Rational(1), Rational(2)});
  auto ks = brute_force_kernel(f12, 3);
  std::set<std::vector<std::int64_t>> got(ks.begin(), ks.end());
  const std::set<std::vector<std::int64_t>> expect{{0, 0}, {2, -1}, {-2, 1}};
  CHECK(got == expect);

  FrequencySet f2;
  f2.dim = 1;
  f2.generators = {"b1", "b2"};
  f2.coeffs = {{{Rational(1), Rational(0)}}, {{Rational(0), Rational(1)}}};
  CHECK(brute_force_kernel(f2, 5).size() == 1);

  const auto fh = FrequencySet::scalar({Rational(1), Rational(1, 2)});
  ks = brute_force_kernel(fh, 2);
  got = {ks.begin(), ks.end()};
  CHECK(got.count({1, -2}) == 1);
  CHECK(got.count({-1, 2}) == 1);

  FrequencySet big = FrequencySet::scalar(std::vector<Rational>(12, Rational(1)));
  CHECK_THROWS_AS(brute_force_kernel(big, 6), std::runtime_error);
}

TEST_CASE("invariant_phases reduces to [0, 2pi)") {
  const auto lat = make_lattice(2, {{2, -1}});
  const double pi = std::numbers::pi;
  auto eta = invariant_phases(lat, {pi / 2.0, pi});
  REQUIRE(eta.size() == 1);
  CHECK(eta[0] == Catch::Approx(0.0).margin(1e-15));
  eta = invariant_phases(lat, {0.0, pi / 2.0});
  CHECK(eta[0] == Catch::Approx(3.0 * pi / 2.0));
  eta = invariant_phases(lat, {0.0, 0.0});
  CHECK(eta[0] == 0.0);
  CHECK_THROWS_AS(invariant_phases(lat, {0.0}), std::invalid_argument);
}

TEST_CASE("in_lattice and lattice_equal handle non-reduced bases") {
  const auto a = make_lattice(3, {{-2, 1, 0}, {-3, 0, 1}});
  const auto b = make_lattice(3, {{1, 1, -1}, {-2, 1, 0}});
  CHECK(lattice_equal(a, b));
  CHECK(in_lattice(a, {0, 0, 0}));
  CHECK(in_lattice(a, {-5, 1, 1}));
  CHECK_FALSE(in_lattice(a, {1, 0, 0}));
  const auto doubled = make_lattice(2, {{4, -2}});
  CHECK_FALSE(in_lattice(doubled, {2, -1}));
  CHECK_FALSE(is_saturated(doubled));
}

TEST_CASE("smith_divisors on known matrices") {
  CHECK(smith_divisors({{2, 0}, {0, 3}}) == std::vector<std::int64_t>{1, 6});
  CHECK(smith_divisors({{2, 4}, {4, 8}}) == std::vector<std::int64_t>{2});
  CHECK(smith_divisors({{1, 0, 0}}) == std::vector<std::int64_t>{1});
  CHECK(smith_divisors({}).empty());
}

TEST_CASE("random frequency sets: oracle equivalence and saturation") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = random_rational_set(rng, 4);
    const auto lat = kernel_basis(f);
    CHECK(is_saturated(lat));
    for (const auto& row : lat.basis) CHECK(verify_relation(f, row));

    const auto brute = brute_force_kernel(f, 6);
    for (const auto& k : brute) CHECK(in_lattice(lat, k));
    for (const auto& row : lat.basis) {
      const bool within =
          std::all_of(row.begin(), row.end(), [](std::int64_t v) { return std::abs(v) <= 6; });
      if (within) CHECK(std::count(brute.begin(), brute.end(), row) == 1);
    }
  }
}

TEST_CASE("FrequencySet validation") {
  FrequencySet f;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f = FrequencySet::scalar({Rational(0)});
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f = FrequencySet::scalar({Rational(1)});
  CHECK_NOTHROW(f.validate());
  f.coeffs[0].push_back({Rational(1)});
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}
