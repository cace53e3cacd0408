#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "stohom/corrector.hpp"
#include "stohom/fft.hpp"
#include "stohom/field.hpp"
#include "stohom/grid.hpp"
#include "stohom/symmat.hpp"

namespace stohom {

/**
 * @brief Source problem -div a grad u = f on an axis-aligned box with
 *        homogeneous Dirichlet boundary values. A null rhs means f = 1.
 */
struct DirichletProblem {
  int dim = 1;
  std::function<double(const std::array<double, 3>&)> rhs;

  double rhs_at(const std::array<double, 3>& x) const { return rhs ? rhs(x) : 1.0; }
};

/// Interior-node count of a Dirichlet mesh (nodes per axis = cells - 1).
inline Index interior_count(const GridSpec& mesh) {
  Index n = 1;
  for (int t = 0; t < mesh.dim; ++t) n *= mesh.cells[static_cast<std::size_t>(t)] - 1;
  return n;
}

struct DirichletStats {
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

/// Flat index of interior node (j_1,..,j_d), each j_t in [1, n_t - 1].
inline Index interior_flat(const GridSpec& mesh, const std::array<Index, 3>& j) {
  Index id = 0;
  for (int t = 0; t < mesh.dim; ++t)
    id = id * (mesh.cells[static_cast<std::size_t>(t)] - 1) +
         (j[static_cast<std::size_t>(t)] - 1);
  return id;
}

/// Corner nodes of a cell on the Dirichlet mesh; boundary corners get -1.
inline void dirichlet_corners(const GridSpec& mesh, Index cell, const Q1Kernel& kern,
                              Index* nodes) {
  const auto iv = mesh.unflatten(cell);
  const int nloc = kern.local_nodes();
  for (int p = 0; p < nloc; ++p) {
    std::array<Index, 3> j{0, 0, 0};
    bool interior = true;
    for (int t = 0; t < mesh.dim; ++t) {
      j[static_cast<std::size_t>(t)] = iv[static_cast<std::size_t>(t)] + ((p >> t) & 1);
      if (j[static_cast<std::size_t>(t)] == 0 ||
          j[static_cast<std::size_t>(t)] == mesh.cells[static_cast<std::size_t>(t)])
        interior = false;
    }
    nodes[p] = interior ? interior_flat(mesh, j) : -1;
  }
}

/// y = K x on the interior nodes, zero Dirichlet boundary.
inline void apply_dirichlet_stiffness(const GridSpec& mesh, const Q1Kernel& kern,
                                      const std::vector<SymMat>& cells, const ScalarField& x,
                                      ScalarField& y) {
  std::fill(y.begin(), y.end(), 0.0);
  const int nloc = kern.local_nodes();
  Index nodes[8];
  double ke[64], xl[8];
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    dirichlet_corners(mesh, c, kern, nodes);
    kern.element_stiffness(cells[static_cast<std::size_t>(c)], ke);
    for (int p = 0; p < nloc; ++p)
      xl[p] = nodes[p] >= 0 ? x[static_cast<std::size_t>(nodes[p])] : 0.0;
    for (int p = 0; p < nloc; ++p) {
      if (nodes[p] < 0) continue;
      double v = 0.0;
      for (int q = 0; q < nloc; ++q) v += ke[p * nloc + q] * xl[q];
      y[static_cast<std::size_t>(nodes[p])] += v;
    }
  }
}

/**
 * @brief Exact inverse of the constant-reference Dirichlet operator in the
 *        sine basis (DST-I diagonalizes every tensor factor).
 *
 * The reference stiffness factors as ref h^{d-2} sum_s prod_ax (S or M),
 * with S = tridiag(-1,2,-1) and M = tridiag(1/6,2/3,1/6) from the Q1 unit
 * integrals; the sine modes are eigenvectors of both.
 */
class SinePreconditioner {
 public:
  SinePreconditioner(const GridSpec& mesh, double ref) : mesh_(mesh) {
    const int d = mesh.dim;
    Index n = 1;
    int dims[3] = {1, 1, 1};
    fftw_r2r_kind kinds[3];
    for (int t = 0; t < d; ++t) {
      dims[t] = static_cast<int>(mesh.cells[static_cast<std::size_t>(t)] - 1);
      kinds[t] = FFTW_RODFT00;
      n *= dims[t];
    }
    size_ = n;
    buf_ = fftw_alloc_real(static_cast<std::size_t>(n));
    if (!buf_) throw std::bad_alloc();
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      plan_ = fftw_plan_r2r(d, dims, buf_, buf_, kinds, FFTW_ESTIMATE);
    }
    if (!plan_) {
      fftw_free(buf_);
      throw std::runtime_error("SinePreconditioner: plan creation failed");
    }

    // inverse symbol per sine mode, with the double-DST normalization folded in
    double norm = 1.0;
    for (int t = 0; t < d; ++t)
      norm *= 2.0 * static_cast<double>(mesh.cells[static_cast<std::size_t>(t)]);
    const double scale = ref * std::pow(mesh.h, d - 2);
    inv_symbol_.resize(static_cast<std::size_t>(n));
    std::array<double, 3> s{}, m{};
    std::array<Index, 3> k{0, 0, 0};
    for (Index id = 0; id < n; ++id) {
      Index rem = id;
      for (int t = d - 1; t >= 0; --t) {
        k[static_cast<std::size_t>(t)] = rem % dims[t] + 1;
        rem /= dims[t];
      }
      double sym = 0.0;
      for (int t = 0; t < d; ++t) {
        const double angle =
            std::numbers::pi * static_cast<double>(k[static_cast<std::size_t>(t)]) /
            static_cast<double>(mesh.cells[static_cast<std::size_t>(t)]);
        s[static_cast<std::size_t>(t)] = 2.0 - 2.0 * std::cos(angle);
        m[static_cast<std::size_t>(t)] = 2.0 / 3.0 + std::cos(angle) / 3.0;
      }
      for (int sd = 0; sd < d; ++sd) {
        double term = 1.0;
        for (int t = 0; t < d; ++t)
          term *= t == sd ? s[static_cast<std::size_t>(t)] : m[static_cast<std::size_t>(t)];
        sym += term;
      }
      inv_symbol_[static_cast<std::size_t>(id)] = 1.0 / (scale * sym * norm);
    }
  }

  SinePreconditioner(const SinePreconditioner&) = delete;
  SinePreconditioner& operator=(const SinePreconditioner&) = delete;

  ~SinePreconditioner() {
    {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buf_);
  }

  void apply(const ScalarField& r, ScalarField& z) {
    for (Index i = 0; i < size_; ++i) buf_[i] = r[static_cast<std::size_t>(i)];
    fftw_execute(plan_);
    for (Index i = 0; i < size_; ++i) buf_[i] *= inv_symbol_[static_cast<std::size_t>(i)];
    fftw_execute(plan_);
    for (Index i = 0; i < size_; ++i) z[static_cast<std::size_t>(i)] = buf_[i];
  }

 private:
  GridSpec mesh_;
  Index size_ = 0;
  double* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
  std::vector<double> inv_symbol_;
};

/// Tridiagonal direct solve for the 1D Dirichlet problem (Thomas sweep).
inline ScalarField solve_tridiagonal_1d(const GridSpec& mesh, const std::vector<SymMat>& cells,
                                        const ScalarField& b) {
  const Index m = mesh.cells[0] - 1;
  std::vector<double> diag(static_cast<std::size_t>(m)), upper(static_cast<std::size_t>(m));
  ScalarField u(b);
  const double inv_h = 1.0 / mesh.h;
  for (Index j = 0; j < m; ++j) {
    const double left = cells[static_cast<std::size_t>(j)](0, 0);
    const double right = cells[static_cast<std::size_t>(j + 1)](0, 0);
    diag[static_cast<std::size_t>(j)] = (left + right) * inv_h;
    upper[static_cast<std::size_t>(j)] = -right * inv_h;
  }
  for (Index j = 1; j < m; ++j) {
    const double w = upper[static_cast<std::size_t>(j - 1)] / diag[static_cast<std::size_t>(j - 1)];
    diag[static_cast<std::size_t>(j)] -= w * upper[static_cast<std::size_t>(j - 1)];
    u[static_cast<std::size_t>(j)] -= w * u[static_cast<std::size_t>(j - 1)];
  }
  u[static_cast<std::size_t>(m - 1)] /= diag[static_cast<std::size_t>(m - 1)];
  for (Index j = m - 2; j >= 0; --j)
    u[static_cast<std::size_t>(j)] =
        (u[static_cast<std::size_t>(j)] -
         upper[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j + 1)]) /
        diag[static_cast<std::size_t>(j)];
  return u;
}

/// PCG for the Dirichlet system; throws when tol is not reached.
inline ScalarField solve_dirichlet_system(const GridSpec& mesh, const std::vector<SymMat>& cells,
                                          const ScalarField& b, double lambda, double Lambda,
                                          double tol, int max_iter, DirichletStats* stats) {
  const std::size_t nn = b.size();
  ScalarField x(nn, 0.0);
  const Q1Kernel kern(mesh);

  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }

  if (mesh.dim == 1) {
    x = solve_tridiagonal_1d(mesh, cells, b);
    ScalarField kx(nn);
    apply_dirichlet_stiffness(mesh, kern, cells, x, kx);
    double rn = 0.0, xn = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      rn += (kx[i] - b[i]) * (kx[i] - b[i]);
      xn += x[i] * x[i];
    }
    const double rel = std::sqrt(rn) / bnorm;
    // The factorization is backward stable, so its residual sits at the
    // roundoff floor eps_mach |K| |u|, which outgrows tol on fine meshes;
    // a wrong solve is orders of magnitude above either bound.
    const double knorm = 4.0 * Lambda / mesh.h;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * knorm * std::sqrt(xn) /
                         bnorm;
    if (rel > std::max(tol, floor))
      throw std::runtime_error("solve_dirichlet_system: direct solve residual high");
    if (stats) *stats = {1, rel};
    return x;
  }

  SinePreconditioner prec(mesh, 0.5 * (lambda + Lambda));
  ScalarField r(b), z(nn), p(nn), ap(nn);
  prec.apply(r, z);
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    apply_dirichlet_stiffness(mesh, kern, cells, p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0))
      throw std::runtime_error("solve_dirichlet_system: lost positive definiteness");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < nn; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < nn; ++i) r[i] -= alpha * ap[i];
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (rel <= tol) {
      ++it;
      break;
    }
    prec.apply(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < nn; ++i) p[i] = z[i] + beta * p[i];
  }
  if (rel > tol) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "solve_dirichlet_system: no convergence in %d iterations, residual %.3e",
                  max_iter, rel);
    throw std::runtime_error(buf);
  }
  if (stats) *stats = {it, rel};
  return x;
}

/// Nodal load vector: f sampled at cell centers, Q1 lumping per corner.
inline ScalarField assemble_load(const GridSpec& mesh, const DirichletProblem& problem,
                                 const Q1Kernel& kern) {
  ScalarField b(static_cast<std::size_t>(interior_count(mesh)), 0.0);
  const int nloc = kern.local_nodes();
  const double w = std::pow(mesh.h, mesh.dim) / static_cast<double>(nloc);
  Index nodes[8];
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    const auto iv = mesh.unflatten(c);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int t = 0; t < mesh.dim; ++t)
      x[static_cast<std::size_t>(t)] = mesh.cell_center(t, iv[static_cast<std::size_t>(t)]);
    const double f = problem.rhs_at(x);
    if (!std::isfinite(f))
      throw std::invalid_argument("assemble_load: rhs not finite at cell " + std::to_string(c));
    dirichlet_corners(mesh, c, kern, nodes);
    for (int p = 0; p < nloc; ++p)
      if (nodes[p] >= 0) b[static_cast<std::size_t>(nodes[p])] += w * f;
  }
  return b;
}

inline void check_mesh(const DirichletProblem& problem, const GridSpec& mesh) {
  mesh.validate();
  if (mesh.dim != problem.dim)
    throw std::invalid_argument("dirichlet: mesh dimension does not match the problem");
  if (mesh.periodic)
    throw std::invalid_argument("dirichlet: mesh must be non-periodic");
  for (int t = 0; t < mesh.dim; ++t)
    if (mesh.cells[static_cast<std::size_t>(t)] < 2)
      throw std::invalid_argument("dirichlet: mesh needs at least 2 cells per axis");
}

}  // namespace detail

/**
 * @brief Coefficient a(x/eps) on the mesh: the periodic torus realization is
 *        unrolled by wrapping x/eps into the torus and reading the cell.
 */
inline std::vector<SymMat> unroll_coefficient(const CoefficientField& realization,
                                              const GridSpec& mesh, double eps) {
  const GridSpec& tg = realization.grid();
  if (!tg.periodic)
    throw std::invalid_argument("unroll_coefficient: realization must be periodic");
  if (tg.dim != mesh.dim)
    throw std::invalid_argument("unroll_coefficient: dimension mismatch");
  std::vector<SymMat> cells;
  cells.reserve(static_cast<std::size_t>(mesh.cell_count()));
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    const auto iv = mesh.unflatten(c);
    std::array<Index, 3> jv{0, 0, 0};
    for (int t = 0; t < mesh.dim; ++t) {
      const double y =
          mesh.cell_center(t, iv[static_cast<std::size_t>(t)]) / eps;
      const double side = tg.side(t);
      double u = std::fmod(y, side);
      if (u < 0.0) u += side;
      const Index j = static_cast<Index>(std::floor(u / tg.h));
      jv[static_cast<std::size_t>(t)] =
          std::min<Index>(tg.cells[static_cast<std::size_t>(t)] - 1, std::max<Index>(0, j));
    }
    cells.push_back(realization.cell(tg.flat(jv)));
  }
  return cells;
}

/**
 * @brief Solve -div a(x/eps) grad u = f with zero boundary values on the
 *        mesh. The mesh must resolve the oscillation: at least 8 cells per
 *        eps-period. Returns the interior nodal values.
 */
inline ScalarField solve_eps(const DirichletProblem& problem, const CoefficientField& realization,
                             double eps, const GridSpec& mesh, double tol = 1e-10,
                             int max_iter = 20000, DirichletStats* stats = nullptr) {
  detail::check_mesh(problem, mesh);
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("solve_eps: eps must be in (0,1]");
  if (eps / mesh.h < 8.0 * (1.0 - 1e-12))
    throw std::invalid_argument("solve_eps: mesh under-resolved, need 8 cells per eps");
  const std::vector<SymMat> cells = unroll_coefficient(realization, mesh, eps);
  const detail::Q1Kernel kern(mesh);
  const ScalarField b = detail::assemble_load(mesh, problem, kern);
  return detail::solve_dirichlet_system(mesh, cells, b, realization.bounds().lambda,
                                        realization.bounds().Lambda, tol, max_iter, stats);
}

/// Solve -div A grad u = f with constant elliptic A, zero boundary values.
inline ScalarField solve_hom(const DirichletProblem& problem, const SymMat& a,
                             const GridSpec& mesh, double tol = 1e-10, int max_iter = 20000,
                             DirichletStats* stats = nullptr) {
  detail::check_mesh(problem, mesh);
  if (a.dim() != mesh.dim) throw std::invalid_argument("solve_hom: matrix dimension mismatch");
  const auto eig = a.eig_range();
  if (!(eig[0] > 0.0)) throw std::invalid_argument("solve_hom: matrix must be elliptic");
  const std::vector<SymMat> cells(static_cast<std::size_t>(mesh.cell_count()), a);
  const detail::Q1Kernel kern(mesh);
  const ScalarField b = detail::assemble_load(mesh, problem, kern);
  return detail::solve_dirichlet_system(mesh, cells, b, eig[0], eig[1], tol, max_iter, stats);
}

/// Nodal-quadrature L2 norm of an interior nodal field.
inline double l2_norm(const GridSpec& mesh, const ScalarField& u) {
  if (u.size() != static_cast<std::size_t>(interior_count(mesh)))
    throw std::invalid_argument("l2_norm: field size does not match the mesh");
  detail::KahanSum s;
  for (double v : u) s.add(v * v);
  return std::sqrt(s.value() * std::pow(mesh.h, mesh.dim));
}

/// Element-quadrature H1 seminorm (the L2 norm of the gradient).
inline double h1_seminorm(const GridSpec& mesh, const ScalarField& u) {
  if (u.size() != static_cast<std::size_t>(interior_count(mesh)))
    throw std::invalid_argument("h1_seminorm: field size does not match the mesh");
  const detail::Q1Kernel kern(mesh);
  const int nloc = kern.local_nodes();
  const double w = kern.gauss_weight();
  detail::KahanSum s;
  Index nodes[8];
  double local[8], grad[3];
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    detail::dirichlet_corners(mesh, c, kern, nodes);
    for (int p = 0; p < nloc; ++p)
      local[p] = nodes[p] >= 0 ? u[static_cast<std::size_t>(nodes[p])] : 0.0;
    for (int g = 0; g < nloc; ++g) {
      kern.gauss_gradient(g, local, grad);
      double v = 0.0;
      for (int t = 0; t < mesh.dim; ++t) v += grad[t] * grad[t];
      s.add(w * v);
    }
  }
  return std::sqrt(s.value());
}

}  // namespace stohom
