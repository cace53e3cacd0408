#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/fft.hpp"
#include "stohom/field.hpp"
#include "stohom/grid.hpp"
#include "stohom/symmat.hpp"

namespace stohom {

/**
 * @brief Correctors phi_i (nodal fields, one per direction), with the worst
 *        relative residual over directions and total iteration count.
 */
struct CorrectorSolution {
  std::vector<ScalarField> phi;
  double residual = 0.0;
  int iterations = 0;
};

using HomogenizedMatrix = SymMat;

namespace detail {

/// Compensated (Kahan) accumulator: error independent of the term count.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/**
 * @brief Q1 element geometry on the torus: multilinear shape functions on
 *        cells, nodes identified with cells by periodicity.
 *
 * Precomputes the unit-cell gradient integrals
 *   G[s][t][p][q] = int_{[0,1]^d} dN_p/du_s dN_q/du_t du
 * so the stiffness of a cell with constant coefficient a is
 *   K = h^{d-2} sum_{s,t} a_st G[s][t],
 * and the 2^d-point Gauss rule (exact for these integrands).
 */
class Q1Kernel {
 public:
  explicit Q1Kernel(const GridSpec& grid)
      : grid_(grid),
        d_(grid.dim),
        nloc_(1 << grid.dim),
        stiff_scale_(std::pow(grid.h, grid.dim - 2)),
        load_scale_(-std::pow(grid.h, grid.dim - 1) * std::pow(0.5, grid.dim - 1)),
        gauss_w_(std::pow(grid.h, grid.dim) / static_cast<double>(1 << grid.dim)) {
    for (int p = 0; p < nloc_; ++p)
      for (int t = 0; t < d_; ++t) corner_[p][t] = (p >> t) & 1;

    // Pairwise 1D integrals of the hat pair (b0, b1) = (1-u, u):
    // int b_a b_b = 1/3 if a == b else 1/6; int b'_a b_b = sign(a)/2;
    // int b'_a b'_b = sign(a) sign(b).
    auto ii = [](int a, int b) { return a == b ? 1.0 / 3.0 : 1.0 / 6.0; };
    auto sgn = [](int a) { return a == 0 ? -1.0 : 1.0; };
    for (int s = 0; s < d_; ++s) {
      for (int t = 0; t < d_; ++t) {
        for (int p = 0; p < nloc_; ++p) {
          for (int q = 0; q < nloc_; ++q) {
            double v = 1.0;
            for (int ax = 0; ax < d_; ++ax) {
              const int pa = corner_[p][ax], qa = corner_[q][ax];
              if (ax == s && ax == t)
                v *= sgn(pa) * sgn(qa);
              else if (ax == s)
                v *= sgn(pa) * 0.5;
              else if (ax == t)
                v *= sgn(qa) * 0.5;
              else
                v *= ii(pa, qa);
            }
            g_[s][t][p][q] = v;
          }
        }
      }
    }

    // Gauss points (2 per axis) and local gradients there, on the unit cell.
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    for (int k = 0; k < nloc_; ++k) {
      std::array<double, 3> u{0.5, 0.5, 0.5};
      for (int t = 0; t < d_; ++t) u[t] = gp[(k >> t) & 1];
      for (int p = 0; p < nloc_; ++p) {
        for (int s = 0; s < d_; ++s) {
          double v = 1.0;
          for (int ax = 0; ax < d_; ++ax) {
            const int pa = corner_[p][ax];
            if (ax == s)
              v *= sgn(pa);
            else
              v *= pa == 0 ? 1.0 - u[ax] : u[ax];
          }
          grad_at_gauss_[k][p][s] = v;
        }
      }
    }
  }

  const GridSpec& grid() const { return grid_; }
  int local_nodes() const { return nloc_; }

  /// Flat node ids of the 2^d corners of cell `cell` (periodic wrap).
  void corner_nodes(Index cell, Index* nodes) const {
    const auto iv = grid_.unflatten(cell);
    for (int p = 0; p < nloc_; ++p) {
      std::array<Index, 3> jv{0, 0, 0};
      for (int t = 0; t < d_; ++t) jv[t] = grid_.wrap(t, iv[t] + corner_[p][t]);
      nodes[p] = grid_.flat(jv);
    }
  }

  /// Element stiffness for constant coefficient a (times h^{d-2}).
  void element_stiffness(const SymMat& a, double* k) const {
    const double scale = stiff_scale_;
    for (int p = 0; p < nloc_; ++p)
      for (int q = 0; q < nloc_; ++q) {
        double v = 0.0;
        for (int s = 0; s < d_; ++s)
          for (int t = 0; t < d_; ++t) v += a(s, t) * g_[s][t][p][q];
        k[p * nloc_ + q] = scale * v;
      }
  }

  /// Element load for unit macroscopic gradient e_i: l_p = -int grad N_p . a e_i.
  void element_load(const SymMat& a, int dir, double* l) const {
    const double scale = load_scale_;
    for (int p = 0; p < nloc_; ++p) {
      double v = 0.0;
      for (int s = 0; s < d_; ++s) v += (corner_[p][s] == 0 ? -1.0 : 1.0) * a(s, dir);
      l[p] = scale * v;
    }
  }

  /// Physical gradient of the local field at Gauss point k (divide ref by h).
  void gauss_gradient(int k, const double* local, double* grad) const {
    for (int s = 0; s < d_; ++s) {
      double v = 0.0;
      for (int p = 0; p < nloc_; ++p) v += local[p] * grad_at_gauss_[k][p][s];
      grad[s] = v / grid_.h;
    }
  }

  /// Gauss weight in physical coordinates (uniform rule).
  double gauss_weight() const { return gauss_w_; }

 private:
  GridSpec grid_;
  int d_;
  int nloc_;
  double stiff_scale_;
  double load_scale_;
  double gauss_w_;
  int corner_[8][3] = {};
  double g_[3][3][8][8] = {};
  double grad_at_gauss_[8][8][3] = {};
};

/// y = K(field) x, assembled cell by cell.
inline void apply_stiffness(const Q1Kernel& kern, const CoefficientField& field,
                            const ScalarField& x, ScalarField& y) {
  const Index n = kern.grid().cell_count();
  const int nloc = kern.local_nodes();
  std::fill(y.begin(), y.end(), 0.0);
  Index nodes[8];
  double ke[64], xl[8];
  for (Index c = 0; c < n; ++c) {
    kern.corner_nodes(c, nodes);
    kern.element_stiffness(field.cell(c), ke);
    for (int p = 0; p < nloc; ++p) xl[p] = x[static_cast<std::size_t>(nodes[p])];
    for (int p = 0; p < nloc; ++p) {
      double v = 0.0;
      for (int q = 0; q < nloc; ++q) v += ke[p * nloc + q] * xl[q];
      y[static_cast<std::size_t>(nodes[p])] += v;
    }
  }
}

/**
 * @brief Exact inverse of the constant-reference operator, applied spectrally.
 *
 * The reference stiffness (coefficient ref . Id) is a translation-invariant
 * stencil on the torus, so it diagonalizes in the DFT basis; its symbol is
 * read off by transforming the operator's response to a delta. The inverse
 * zeroes the constant mode, matching the zero-mean gauge.
 */
class SpectralPreconditioner {
 public:
  SpectralPreconditioner(const Q1Kernel& kern, double ref)
      : fft_(kern.grid()), inv_symbol_(static_cast<std::size_t>(fft_.complex_size())) {
    const GridSpec& grid = kern.grid();
    const Index n = grid.cell_count();
    CoefficientField unit(grid, {ref, ref});
    for (Index c = 0; c < n; ++c) unit.set_cell(c, SymMat::identity(grid.dim, ref));
    ScalarField delta(static_cast<std::size_t>(n), 0.0), resp(static_cast<std::size_t>(n), 0.0);
    delta[0] = 1.0;
    apply_stiffness(kern, unit, delta, resp);
    double* in = fft_.real_data();
    for (Index i = 0; i < n; ++i) in[i] = resp[static_cast<std::size_t>(i)];
    fft_.forward();
    const std::complex<double>* sym = fft_.complex_data();
    double max_sym = 0.0;
    for (Index k = 0; k < fft_.complex_size(); ++k)
      max_sym = std::max(max_sym, std::abs(sym[k].real()));
    for (Index k = 0; k < fft_.complex_size(); ++k) {
      const double s = sym[k].real();
      inv_symbol_[static_cast<std::size_t>(k)] = s > 1e-14 * max_sym ? 1.0 / s : 0.0;
    }
  }

  void apply(const ScalarField& r, ScalarField& z) {
    const Index n = fft_.real_size();
    double* in = fft_.real_data();
    for (Index i = 0; i < n; ++i) in[i] = r[static_cast<std::size_t>(i)];
    fft_.forward();
    std::complex<double>* spec = fft_.complex_data();
    for (Index k = 0; k < fft_.complex_size(); ++k)
      spec[k] *= inv_symbol_[static_cast<std::size_t>(k)];
    fft_.backward();
    const double* out = fft_.real_data();
    for (Index i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = out[i];
  }

 private:
  FftTorus fft_;
  std::vector<double> inv_symbol_;
};

inline double dot(const ScalarField& a, const ScalarField& b) {
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

inline void subtract_mean(ScalarField& x) {
  KahanSum s;
  for (double v : x) s.add(v);
  const double mean = s.value() / static_cast<double>(x.size());
  for (double& v : x) v -= mean;
}

}  // namespace detail

/**
 * @brief Solve the periodic cell problems: find mean-zero nodal phi_i with
 *        K(a) phi_i = b_i, the Q1 weak form of -div a (grad phi_i + e_i) = 0.
 *
 * Preconditioned conjugate gradients; the preconditioner is the exact
 * spectral inverse of the reference medium (lambda + Lambda)/2 . Id, so the
 * iteration count is governed by the contrast, not the grid size.
 */
inline CorrectorSolution solve_correctors(const CoefficientField& field, double tol = 1e-9,
                                          int max_iter = 10000) {
  const GridSpec& grid = field.grid();
  if (!grid.periodic) throw std::invalid_argument("solve_correctors: grid must be periodic");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("solve_correctors: tol in (0,1)");
  const int d = grid.dim;
  const Index n = grid.cell_count();
  const std::size_t nn = static_cast<std::size_t>(n);

  const detail::Q1Kernel kern(grid);
  const double ref = 0.5 * (field.bounds().lambda + field.bounds().Lambda);
  detail::SpectralPreconditioner prec(kern, ref);

  CorrectorSolution sol;
  sol.phi.assign(static_cast<std::size_t>(d), ScalarField(nn, 0.0));

  ScalarField b(nn), r(nn), z(nn), p(nn), ap(nn);
  Index nodes[8];
  double le[8];

  for (int dir = 0; dir < d; ++dir) {
    std::fill(b.begin(), b.end(), 0.0);
    for (Index c = 0; c < n; ++c) {
      kern.corner_nodes(c, nodes);
      kern.element_load(field.cell(c), dir, le);
      for (int q = 0; q < kern.local_nodes(); ++q)
        b[static_cast<std::size_t>(nodes[q])] += le[q];
    }
    // Compatibility: the load sums to zero over the torus, but rounding can
    // leave a constant-mode residue that no mean-zero iterate reduces.
    detail::subtract_mean(b);
    const double bnorm = std::sqrt(detail::dot(b, b));
    ScalarField& x = sol.phi[static_cast<std::size_t>(dir)];
    if (bnorm == 0.0) continue;

    r = b;
    prec.apply(r, z);
    p = z;
    double rz = detail::dot(r, z);
    double rel = 1.0;
    int it = 0;
    for (; it < max_iter; ++it) {
      detail::apply_stiffness(kern, field, p, ap);
      const double pap = detail::dot(p, ap);
      if (!(pap > 0.0)) throw std::runtime_error("solve_correctors: lost positive definiteness");
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < nn; ++i) x[i] += alpha * p[i];
      for (std::size_t i = 0; i < nn; ++i) r[i] -= alpha * ap[i];
      rel = std::sqrt(detail::dot(r, r)) / bnorm;
      if (rel <= tol) {
        ++it;
        break;
      }
      prec.apply(r, z);
      const double rz_new = detail::dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < nn; ++i) p[i] = z[i] + beta * p[i];
    }
    if (rel > tol) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "solve_correctors: no convergence in %d iterations, residual %.3e",
                    max_iter, rel);
      throw std::runtime_error(buf);
    }
    detail::subtract_mean(x);
    sol.iterations += it;
    sol.residual = std::max(sol.residual, rel);
  }
  return sol;
}

/**
 * @brief Volume-averaged energy form
 *        A_ij = avg (e_i + grad phi_i) . a (e_j + grad phi_j),
 * integrated exactly per cell by the 2^d Gauss rule, compensated summation
 * across cells. Symmetric up to rounding by construction; asymmetry beyond
 * 1e-8 relative (impossible for a consistent solution) is a hard error.
 */
inline HomogenizedMatrix homogenized_matrix(const CoefficientField& field,
                                            const CorrectorSolution& corr) {
  const GridSpec& grid = field.grid();
  const int d = grid.dim;
  if (static_cast<int>(corr.phi.size()) != d)
    throw std::invalid_argument("homogenized_matrix: direction count mismatch");
  const Index n = grid.cell_count();
  for (const auto& f : corr.phi)
    if (f.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("homogenized_matrix: grid mismatch");

  const detail::Q1Kernel kern(grid);
  const int nloc = kern.local_nodes();
  const double w = kern.gauss_weight();

  double full[3][3];
  detail::KahanSum acc[3][3];
  Index nodes[8];
  double local[3][8];
  double u[3][3];  // per-direction gradients at one Gauss point, +e_i

  for (Index c = 0; c < n; ++c) {
    kern.corner_nodes(c, nodes);
    const SymMat a = field.cell(c);
    for (int i = 0; i < d; ++i)
      for (int p = 0; p < nloc; ++p)
        local[i][p] = corr.phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(nodes[p])];
    for (int g = 0; g < nloc; ++g) {
      for (int i = 0; i < d; ++i) {
        kern.gauss_gradient(g, local[i], u[i]);
        u[i][i] += 1.0;
      }
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          double v = 0.0;
          for (int s = 0; s < d; ++s)
            for (int t = 0; t < d; ++t) v += u[i][s] * a(s, t) * u[j][t];
          acc[i][j].add(w * v);
        }
      }
    }
  }

  const double volume = static_cast<double>(n) * std::pow(grid.h, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) full[i][j] = acc[i][j].value() / volume;
  double norm = 0.0, asym = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      norm = std::max(norm, std::abs(full[i][j]));
      asym = std::max(asym, std::abs(full[i][j] - full[j][i]));
    }
  if (asym > 1e-8 * norm)
    throw std::runtime_error("homogenized_matrix: asymmetry beyond solver slack");

  HomogenizedMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out(i, j) = 0.5 * (full[i][j] + full[j][i]);
  return out;
}

/**
 * @brief Cross-check form: column j is avg a (e_j + grad phi_j), no gradient
 *        on the test side. Agrees with the energy form at convergence; the
 *        gap is first order in the solver residual.
 */
inline SymMat flux_average_matrix(const CoefficientField& field, const CorrectorSolution& corr) {
  const GridSpec& grid = field.grid();
  const int d = grid.dim;
  const Index n = grid.cell_count();
  const detail::Q1Kernel kern(grid);
  const int nloc = kern.local_nodes();
  const double w = kern.gauss_weight();

  detail::KahanSum acc[3][3];
  Index nodes[8];
  double local[8], u[3];
  for (Index c = 0; c < n; ++c) {
    kern.corner_nodes(c, nodes);
    const SymMat a = field.cell(c);
    for (int j = 0; j < d; ++j) {
      for (int p = 0; p < nloc; ++p)
        local[p] = corr.phi[static_cast<std::size_t>(j)][static_cast<std::size_t>(nodes[p])];
      for (int g = 0; g < nloc; ++g) {
        kern.gauss_gradient(g, local, u);
        u[j] += 1.0;
        for (int i = 0; i < d; ++i) {
          double v = 0.0;
          for (int t = 0; t < d; ++t) v += a(i, t) * u[t];
          acc[i][j].add(w * v);
        }
      }
    }
  }
  const double volume = static_cast<double>(n) * std::pow(grid.h, grid.dim);
  SymMat out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      out(i, j) = 0.5 * (acc[i][j].value() + acc[j][i].value()) / volume;
  return out;
}

struct VoigtReussBounds {
  SymMat lower;  ///< harmonic mean: inverse of the mean inverse
  SymMat upper;  ///< arithmetic mean
};

inline VoigtReussBounds voigt_reuss_bounds(const CoefficientField& field) {
  const int d = field.dim();
  const Index n = field.cell_count();
  const int tri = SymMat::tri_size(d);
  detail::KahanSum mean[6], mean_inv[6];
  for (Index c = 0; c < n; ++c) {
    const SymMat a = field.cell(c);
    const SymMat ai = a.inverse();
    for (int k = 0; k < tri; ++k) {
      mean[k].add(a.data()[k]);
      mean_inv[k].add(ai.data()[k]);
    }
  }
  VoigtReussBounds out{SymMat(d), SymMat(d)};
  SymMat inv_mean(d);
  for (int k = 0; k < tri; ++k) {
    out.upper.data()[k] = mean[k].value() / static_cast<double>(n);
    inv_mean.data()[k] = mean_inv[k].value() / static_cast<double>(n);
  }
  out.lower = inv_mean.inverse();
  return out;
}

}  // namespace stohom
