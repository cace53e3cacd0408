#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "stohom/gaussian.hpp"

using namespace stohom;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

GaussianFieldModel atoms_model(int dim, double c0, std::vector<AtomicSpectrum::Atom> atoms,
                               int channels = 1) {
  GaussianFieldModel m;
  m.atomic.dim = dim;
  m.atomic.c0 = c0;
  m.atomic.atoms = std::move(atoms);
  m.channels = channels;
  return m;
}

ResonanceLattice trivial_lattice(int atoms) {
  ResonanceLattice l;
  l.atoms = atoms;
  return l;
}

}  // namespace

TEST_CASE("AtomicSpectrum validation") {
  AtomicSpectrum s;
  s.dim = 1;
  s.c0 = 1.0;
  CHECK_NOTHROW(s.validate());
  s.atoms.push_back({{0.0, 0.0, 0.0}, 1.0});
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.atoms[0].omega[0] = 2.0;
  CHECK_NOTHROW(s.validate());
  s.atoms.push_back({{2.0, 0.0, 0.0}, 0.5});
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.atoms[1].omega[0] = 3.0;
  s.atoms[1].c = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.atoms[1].c = 0.5;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("sample_component degenerate and moment checks") {
  const auto degenerate = atoms_model(1, 0.0, {{{1.0, 0.0, 0.0}, 1.0}});
  GaussianFieldModel zero_atoms = degenerate;
  zero_atoms.atomic.atoms.clear();
  zero_atoms.atomic.c0 = 1.0;

  Rng r0(11);
  GaussianFieldModel pure_offset = zero_atoms;
  pure_offset.atomic.c0 = 0.0;
  CHECK_THROWS_AS(sample_component(pure_offset, trivial_lattice(0), r0), std::invalid_argument);

  auto coords = sample_component(atoms_model(1, 0.0, {{{1.0, 0.0, 0.0}, 1.0}}),
                                 trivial_lattice(1), r0);
  REQUIRE(coords.channels.size() == 1);
  CHECK(coords.channels[0].x0 == 0.0);
  CHECK(coords.channels[0].r.size() == 1);
  CHECK(coords.channels[0].eta.empty());

  Rng r1(123);
  double mean = 0.0, var = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_component(zero_atoms, trivial_lattice(0), r1);
    mean += c.channels[0].x0;
    var += c.channels[0].x0 * c.channels[0].x0;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.97);
  CHECK(var < 1.03);

  Rng r2(321);
  const auto one_atom = atoms_model(1, 0.0, {{{1.0, 0.0, 0.0}, 2.0}});
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_component(one_atom, trivial_lattice(1), r2);
    m2 += c.channels[0].r[0] * c.channels[0].r[0];
  }
  m2 /= n;
  CHECK(m2 > 3.92);
  CHECK(m2 < 4.08);
}

TEST_CASE("synth_atomic evaluates the cosine sum at cell centers") {
  GridSpec g{.dim = 2, .cells = {3, 2, 1}, .h = 1.0 / 3.0};

  ComponentCoordinates constant;
  constant.channels.push_back({5.0, {}, {}, {}});
  AtomicSpectrum empty;
  empty.dim = 2;
  empty.c0 = 1.0;
  auto f = synth_atomic(constant, empty, g);
  REQUIRE(f.size() == 1);
  for (double v : f[0]) CHECK(v == 5.0);

  AtomicSpectrum one;
  one.dim = 2;
  one.atoms = {{{kTwoPi, 0.0, 0.0}, 1.0}};
  ComponentCoordinates c;
  c.channels.push_back({0.0, {1.0}, {0.0}, {}});
  f = synth_atomic(c, one, g);
  // cells with axis-0 index 1 sit at x0 = 0.5: cos(2 pi 0.5) = -1
  CHECK(f[0][g.flat({1, 0, 0})] == Catch::Approx(-1.0));
  CHECK(f[0][g.flat({1, 1, 0})] == Catch::Approx(-1.0));

  AtomicSpectrum two;
  two.dim = 1;
  two.atoms = {{{1.0, 0.0, 0.0}, 1.0}, {{2.0, 0.0, 0.0}, 1.0}};
  GridSpec g1{.dim = 1, .cells = {4, 1, 1}, .h = 0.25};
  ComponentCoordinates c2;
  c2.channels.push_back({1.0, {1.0, 1.0}, {0.0, 0.0}, {}});
  f = synth_atomic(c2, two, g1);
  for (Index i = 0; i < 4; ++i) {
    const double x = g1.cell_center(0, i);
    CHECK(f[0][static_cast<std::size_t>(i)] ==
          Catch::Approx(1.0 + std::cos(x) + std::cos(2.0 * x)));
  }
}

TEST_CASE("synth_continuous matches variance and one-lag correlation") {
  ContinuousCovariance cov;
  cov.kind = ContinuousCovariance::Kind::squared_exponential;
  cov.sigma2 = 1.0;
  cov.ell = 0.125;
  GridSpec g{.dim = 1, .cells = {64, 1, 1}, .h = 1.0 / 64.0};

  ContinuousCovariance none;
  Rng rz(1);
  auto zero = synth_continuous(none, g, rz);
  for (double v : zero[0]) CHECK(v == 0.0);

  CirculantSampler sampler(cov, g);
  Rng rng(777);
  const int m = 10000;
  const Index lag = 8;  // = ell / h
  double var = 0.0, cross = 0.0;
  for (int s = 0; s < m; ++s) {
    const auto f = sampler.sample(rng);
    var += f[0] * f[0];
    cross += f[0] * f[static_cast<std::size_t>(lag)];
  }
  var /= m;
  cross /= m;
  CHECK(var == Catch::Approx(1.0).margin(0.05));
  CHECK(cross / var == Catch::Approx(std::exp(-0.5)).margin(0.05));
}

TEST_CASE("synth_continuous is deterministic given the stream") {
  ContinuousCovariance cov;
  cov.kind = ContinuousCovariance::Kind::exponential;
  cov.sigma2 = 2.0;
  cov.ell = 0.1;
  GridSpec g{.dim = 2, .cells = {16, 16, 1}, .h = 1.0 / 16.0};
  Rng a = Rng::stream(99, 4, 1);
  Rng b = Rng::stream(99, 4, 1);
  const auto fa = synth_continuous(cov, g, a);
  const auto fb = synth_continuous(cov, g, b);
  CHECK(fa[0] == fb[0]);
}

TEST_CASE("sample_field composes the parts and reports coordinates") {
  GridSpec g{.dim = 1, .cells = {8, 1, 1}, .h = 1.0 / 8.0};

  auto offset_only = atoms_model(1, 1.0, {});
  Rng r(5);
  const auto s = sample_field(offset_only, trivial_lattice(0), g, r);
  for (double v : s.channels[0]) CHECK(v == s.coords.channels[0].x0);

  GaussianFieldModel full = atoms_model(1, 0.5, {{{kTwoPi, 0.0, 0.0}, 1.0}});
  full.continuous.kind = ContinuousCovariance::Kind::squared_exponential;
  full.continuous.sigma2 = 0.8;
  full.continuous.ell = 0.25;
  const auto lat = trivial_lattice(1);

  Rng d1 = Rng::stream(42, 7, 0);
  Rng d2 = Rng::stream(42, 7, 0);
  CirculantSampler cs(full.continuous, g);
  const auto fa = sample_field(full, lat, g, d1, &cs);
  const auto fb = sample_field(full, lat, g, d2);
  CHECK(fa.channels[0] == fb.channels[0]);

  Rng mc(2718);
  CirculantSampler cs2(full.continuous, g);
  const int m = 100000;
  double var = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto f = sample_field(full, lat, g, mc, &cs2);
    var += f.channels[0][0] * f.channels[0][0];
  }
  var /= m;
  const double target = 0.5 + 1.0 + 0.8;
  CHECK(var == Catch::Approx(target).epsilon(0.05));
}

TEST_CASE("empirical_autocovariance recovers the atomic law") {
  GridSpec g{.dim = 1, .cells = {16, 1, 1}, .h = 1.0 / 16.0};

  const std::vector<ScalarField> zeros(3, ScalarField(16, 0.0));
  auto est = empirical_autocovariance(zeros, g, {{0, 0, 0}, {4, 0, 0}});
  CHECK(est[0] == 0.0);
  CHECK(est[1] == 0.0);
  CHECK_THROWS_AS(empirical_autocovariance({zeros[0]}, g, {{0, 0, 0}}),
                  std::invalid_argument);

  const auto model = atoms_model(1, 0.0, {{{kTwoPi, 0.0, 0.0}, 2.0}});
  const auto lat = trivial_lattice(1);
  Rng rng(1000);
  std::vector<ScalarField> samples;
  for (int i = 0; i < 2000; ++i)
    samples.push_back(sample_field(model, lat, g, rng).channels[0]);
  // lag 8 cells = 0.5, where omega . x = pi
  est = empirical_autocovariance(samples, g, {{0, 0, 0}, {8, 0, 0}});
  CHECK(est[0] == Catch::Approx(2.0).margin(0.15));
  CHECK(est[1] == Catch::Approx(-2.0).margin(0.15));
  CHECK(atomic_autocovariance(model.atomic, {0.5, 0.0, 0.0}) == Catch::Approx(-2.0));
}

TEST_CASE("invariant phases survive spatial translation") {
  // omega = (2 pi, 4 pi, 6 pi): rational over one generator, rank 2 lattice.
  const auto freqs = FrequencySet::scalar({Rational(1), Rational(2), Rational(3)});
  const auto lat = kernel_basis(freqs);
  REQUIRE(lat.rank() == 2);

  AtomicSpectrum atoms;
  atoms.dim = 1;
  atoms.atoms = {{{kTwoPi, 0.0, 0.0}, 1.0},
                 {{2.0 * kTwoPi, 0.0, 0.0}, 1.0},
                 {{3.0 * kTwoPi, 0.0, 0.0}, 1.0}};

  GaussianFieldModel model;
  model.atomic = atoms;

  Rng rng(314);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto coords = sample_component(model, lat, rng);
    const std::array<double, 3> y{rng.uniform(-2.0, 2.0), 0.0, 0.0};
    const auto shifted = translate_coordinates(coords, atoms, lat, y);
    for (int j = 0; j < lat.rank(); ++j) {
      CHECK(circular_distance(coords.channels[0].eta[static_cast<std::size_t>(j)],
                              shifted.channels[0].eta[static_cast<std::size_t>(j)]) < 1e-12);
    }
  }
}

TEST_CASE("multi-channel draws are independent and ordered") {
  const auto model = atoms_model(1, 1.0, {{{1.0, 0.0, 0.0}, 1.0}}, 3);
  Rng a(9), b(9);
  const auto c1 = sample_component(model, trivial_lattice(1), a);
  const auto c2 = sample_component(model, trivial_lattice(1), b);
  REQUIRE(c1.channels.size() == 3);
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(c1.channels[ch].x0 == c2.channels[ch].x0);
    CHECK(c1.channels[ch].phi == c2.channels[ch].phi);
  }
  CHECK(c1.channels[0].x0 != c1.channels[1].x0);
}
