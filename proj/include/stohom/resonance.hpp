#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/rational.hpp"

namespace stohom {

namespace detail {

inline std::int64_t chk(__int128 v) {
  if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
    throw std::overflow_error("resonance: integer overflow");
  return static_cast<std::int64_t>(v);
}

inline std::int64_t mul_i64(std::int64_t a, std::int64_t b) {
  return chk(static_cast<__int128>(a) * b);
}

inline std::int64_t sub_mul(std::int64_t a, std::int64_t q, std::int64_t b) {
  return chk(static_cast<__int128>(a) - static_cast<__int128>(q) * b);
}

/// Floor division (rounds toward -infinity), for Hermite reduction.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace detail

/**
 * @brief Atom frequencies declared exactly: rational coordinates over a set
 *        of symbolic, pairwise-incommensurable positive generators.
 *
 * coeffs[i][t][m] is the rational coefficient of generator m in axis t of
 * frequency i, so that omega_i[t] = sum_m coeffs[i][t][m] * beta_m. Only the
 * rational structure matters here; numeric generator values live with the
 * spectrum that references these frequencies.
 */
struct FrequencySet {
  int dim = 1;
  std::vector<std::string> generators;
  std::vector<std::vector<std::vector<Rational>>> coeffs;

  int atom_count() const { return static_cast<int>(coeffs.size()); }
  int generator_count() const { return static_cast<int>(generators.size()); }

  /// One generator, one axis: the scalar case.
  static FrequencySet scalar(std::vector<Rational> q, std::string generator = "b1") {
    FrequencySet f;
    f.dim = 1;
    f.generators = {std::move(generator)};
    f.coeffs.reserve(q.size());
    for (const auto& v : q) f.coeffs.push_back({{v}});
    return f;
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("FrequencySet: dim must be 1, 2, or 3");
    if (generators.empty()) throw std::invalid_argument("FrequencySet: need at least one generator");
    if (coeffs.empty()) throw std::invalid_argument("FrequencySet: no frequencies");
    for (const auto& atom : coeffs) {
      if (static_cast<int>(atom.size()) != dim)
        throw std::invalid_argument("FrequencySet: axis count mismatch");
      bool nonzero = false;
      for (const auto& axis : atom) {
        if (axis.size() != generators.size())
          throw std::invalid_argument("FrequencySet: generator count mismatch");
        for (const auto& q : axis) nonzero = nonzero || !q.is_zero();
      }
      if (!nonzero) throw std::invalid_argument("FrequencySet: zero frequency vector");
    }
  }
};

/**
 * @brief Saturated integer basis of the resonance lattice
 *        {k in Z^N : sum_i k_i omega_i = 0}.
 *
 * Rows are in Hermite normal form (positive pivots, entries above a pivot
 * reduced into [0, pivot)), sorted lexicographically descending, so equal
 * lattices from equal inputs print identically.
 */
struct ResonanceLattice {
  int atoms = 0;
  std::vector<std::vector<std::int64_t>> basis;

  int rank() const { return static_cast<int>(basis.size()); }
};

namespace detail {

/// In-place row Hermite normal form with positive pivots.
inline void hermite_rows(std::vector<std::vector<std::int64_t>>& b, int n) {
  const int r = static_cast<int>(b.size());
  int row = 0;
  for (int col = 0; col < n && row < r; ++col) {
    while (true) {
      int best = -1;
      for (int i = row; i < r; ++i)
        if (b[i][col] != 0 && (best < 0 || std::abs(b[i][col]) < std::abs(b[best][col])))
          best = i;
      if (best < 0) break;
      std::swap(b[row], b[best]);
      bool clean = true;
      for (int i = row + 1; i < r; ++i) {
        if (b[i][col] == 0) continue;
        const std::int64_t q = b[i][col] / b[row][col];
        if (q != 0)
          for (int j = 0; j < n; ++j) b[i][j] = sub_mul(b[i][j], q, b[row][j]);
        clean = clean && b[i][col] == 0;
      }
      if (clean) {
        if (b[row][col] < 0)
          for (int j = 0; j < n; ++j) b[row][j] = chk(-static_cast<__int128>(b[row][j]));
        for (int i = 0; i < row; ++i) {
          const std::int64_t q = floor_div(b[i][col], b[row][col]);
          if (q != 0)
            for (int j = 0; j < n; ++j) b[i][j] = sub_mul(b[i][j], q, b[row][j]);
        }
        ++row;
        break;
      }
    }
  }
}

}  // namespace detail

/**
 * @brief Exact integer kernel of the frequency relation, as a saturated
 *        Hermite-reduced basis.
 *
 * Denominators are cleared per (axis, generator) constraint, the integer
 * kernel is extracted by unimodular column reduction (which makes saturation
 * automatic), and the rows are Hermite-normalized.
 */
inline ResonanceLattice kernel_basis(const FrequencySet& freqs) {
  freqs.validate();
  const int n = freqs.atom_count();
  const int m = freqs.generator_count();

  // One integer constraint row per (axis, generator) pair.
  std::vector<std::vector<std::int64_t>> c;
  for (int t = 0; t < freqs.dim; ++t) {
    for (int g = 0; g < m; ++g) {
      std::int64_t l = 1;
      for (int i = 0; i < n; ++i)
        l = detail::mul_i64(l / std::gcd(l, freqs.coeffs[i][t][g].den()),
                            freqs.coeffs[i][t][g].den());
      std::vector<std::int64_t> row(n);
      bool any = false;
      for (int i = 0; i < n; ++i) {
        const Rational& q = freqs.coeffs[i][t][g];
        row[i] = detail::mul_i64(q.num(), l / q.den());
        any = any || row[i] != 0;
      }
      if (any) c.push_back(std::move(row));
    }
  }

  // Column reduction of c with the unimodular transform accumulated in u.
  std::vector<std::vector<std::int64_t>> u(n, std::vector<std::int64_t>(n, 0));
  for (int i = 0; i < n; ++i) u[i][i] = 1;
  auto col_sub = [&](int dst, std::int64_t q, int src) {
    for (auto& row : c) row[dst] = detail::sub_mul(row[dst], q, row[src]);
    for (auto& row : u) row[dst] = detail::sub_mul(row[dst], q, row[src]);
  };
  auto col_swap = [&](int a, int b) {
    for (auto& row : c) std::swap(row[a], row[b]);
    for (auto& row : u) std::swap(row[a], row[b]);
  };

  int npiv = 0;
  for (std::size_t r = 0; r < c.size() && npiv < n; ++r) {
    while (true) {
      int best = -1;
      for (int j = npiv; j < n; ++j)
        if (c[r][j] != 0 && (best < 0 || std::abs(c[r][j]) < std::abs(c[r][best]))) best = j;
      if (best < 0) break;
      col_swap(best, npiv);
      bool clean = true;
      for (int j = npiv + 1; j < n; ++j) {
        if (c[r][j] == 0) continue;
        const std::int64_t q = c[r][j] / c[r][npiv];
        if (q != 0) col_sub(j, q, npiv);
        clean = clean && c[r][j] == 0;
      }
      if (clean) {
        ++npiv;
        break;
      }
    }
  }

  ResonanceLattice lat;
  lat.atoms = n;
  for (int j = npiv; j < n; ++j) {
    std::vector<std::int64_t> v(n);
    for (int i = 0; i < n; ++i) v[i] = u[i][j];
    lat.basis.push_back(std::move(v));
  }
  detail::hermite_rows(lat.basis, n);
  std::sort(lat.basis.begin(), lat.basis.end(),
            [](const auto& a, const auto& b) { return b < a; });
  return lat;
}

/// Exact check that sum_i k_i omega_i = 0, per axis and generator.
inline bool verify_relation(const FrequencySet& freqs, const std::vector<std::int64_t>& k) {
  if (static_cast<int>(k.size()) != freqs.atom_count())
    throw std::invalid_argument("verify_relation: length mismatch");
  for (int t = 0; t < freqs.dim; ++t) {
    for (int g = 0; g < freqs.generator_count(); ++g) {
      Rational s;
      for (int i = 0; i < freqs.atom_count(); ++i)
        s += freqs.coeffs[i][t][g] * Rational(k[i]);
      if (!s.is_zero()) return false;
    }
  }
  return true;
}

/**
 * @brief Enumeration oracle: every k with max|k_i| <= bound satisfying the
 *        frequency relation exactly. Includes the zero vector.
 */
inline std::vector<std::vector<std::int64_t>> brute_force_kernel(const FrequencySet& freqs,
                                                                 std::int64_t bound) {
  freqs.validate();
  if (bound < 1) throw std::invalid_argument("brute_force_kernel: bound must be >= 1");
  const int n = freqs.atom_count();
  double budget = static_cast<double>(n);
  for (int i = 0; i < n; ++i) budget *= static_cast<double>(2 * bound + 1);
  if (budget > 1e8) throw std::runtime_error("brute_force_kernel: enumeration budget exceeded");

  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> k(n, -bound);
  while (true) {
    if (verify_relation(freqs, k)) out.push_back(k);
    int t = n - 1;
    while (t >= 0 && k[t] == bound) k[t--] = -bound;
    if (t < 0) break;
    ++k[t];
  }
  return out;
}

/// Invariant phase combinations eta_j = sum_i v^j_i phi_i mod 2 pi.
inline std::vector<double> invariant_phases(const ResonanceLattice& lattice,
                                            const std::vector<double>& phi) {
  if (static_cast<int>(phi.size()) != lattice.atoms)
    throw std::invalid_argument("invariant_phases: phase count mismatch");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> eta;
  eta.reserve(lattice.basis.size());
  for (const auto& v : lattice.basis) {
    double s = 0.0;
    for (int i = 0; i < lattice.atoms; ++i) s += static_cast<double>(v[i]) * phi[i];
    double e = std::fmod(s, two_pi);
    if (e < 0.0) e += two_pi;
    if (e >= two_pi) e -= two_pi;
    eta.push_back(e);
  }
  return eta;
}

/// Membership of k in the integer span of the basis rows (any basis shape).
inline bool in_lattice(const ResonanceLattice& lattice, std::vector<std::int64_t> k) {
  if (static_cast<int>(k.size()) != lattice.atoms)
    throw std::invalid_argument("in_lattice: length mismatch");
  auto rows = lattice.basis;
  detail::hermite_rows(rows, lattice.atoms);
  // Echelon structure forces the coefficient of each row at its pivot.
  for (const auto& v : rows) {
    int p = 0;
    while (p < lattice.atoms && v[p] == 0) ++p;
    if (p == lattice.atoms) continue;
    if (k[p] % v[p] != 0) return false;
    const std::int64_t q = k[p] / v[p];
    if (q != 0)
      for (int j = 0; j < lattice.atoms; ++j) k[j] = detail::sub_mul(k[j], q, v[j]);
  }
  return std::all_of(k.begin(), k.end(), [](std::int64_t x) { return x == 0; });
}

/// Lattice equality: mutual membership of all basis rows.
inline bool lattice_equal(const ResonanceLattice& a, const ResonanceLattice& b) {
  if (a.atoms != b.atoms || a.rank() != b.rank()) return false;
  for (const auto& v : a.basis)
    if (!in_lattice(b, v)) return false;
  for (const auto& v : b.basis)
    if (!in_lattice(a, v)) return false;
  return true;
}

/**
 * @brief Elementary divisors (Smith normal form diagonal) of an integer
 *        matrix, nonnegative, each dividing the next.
 */
inline std::vector<std::int64_t> smith_divisors(std::vector<std::vector<std::int64_t>> a) {
  if (a.empty()) return {};
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(a[0].size());
  std::vector<std::int64_t> divisors;
  int t = 0;
  while (t < rows && t < cols) {
    int pi = -1, pj = -1;
    for (int i = t; i < rows; ++i)
      for (int j = t; j < cols; ++j)
        if (a[i][j] != 0 && (pi < 0 || std::abs(a[i][j]) < std::abs(a[pi][pj]))) {
          pi = i;
          pj = j;
        }
    if (pi < 0) break;
    std::swap(a[t], a[pi]);
    for (int i = 0; i < rows; ++i) std::swap(a[i][t], a[i][pj]);

    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (int i = t + 1; i < rows; ++i) {
        if (a[i][t] == 0) continue;
        const std::int64_t q = a[i][t] / a[t][t];
        for (int j = t; j < cols; ++j) a[i][j] = detail::sub_mul(a[i][j], q, a[t][j]);
        if (a[i][t] != 0) {
          std::swap(a[t], a[i]);
          dirty = true;
        }
      }
      for (int j = t + 1; j < cols; ++j) {
        if (a[t][j] == 0) continue;
        const std::int64_t q = a[t][j] / a[t][t];
        for (int i = t; i < rows; ++i) a[i][j] = detail::sub_mul(a[i][j], q, a[i][t]);
        if (a[t][j] != 0) {
          for (int i = t; i < rows; ++i) std::swap(a[i][t], a[i][j]);
          dirty = true;
        }
      }
      if (!dirty) {
        // Divisibility sweep: a[t][t] must divide the rest of the block.
        for (int i = t + 1; i < rows && !dirty; ++i)
          for (int j = t + 1; j < cols && !dirty; ++j)
            if (a[i][j] % a[t][t] != 0) {
              for (int jj = t; jj < cols; ++jj)
                a[t][jj] = detail::chk(static_cast<__int128>(a[t][jj]) + a[i][jj]);
              dirty = true;
            }
      }
    }
    divisors.push_back(std::abs(a[t][t]));
    ++t;
  }
  return divisors;
}

/// Saturation check: a basis spans kernel-cap-Z^N iff all divisors are 1.
inline bool is_saturated(const ResonanceLattice& lattice) {
  if (lattice.basis.empty()) return true;
  const auto d = smith_divisors(lattice.basis);
  return std::all_of(d.begin(), d.end(), [](std::int64_t v) { return v == 1; });
}

}  // namespace stohom
