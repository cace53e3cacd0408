#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/grid.hpp"
#include "stohom/symmat.hpp"

namespace stohom {

/// Uniform ellipticity window: all cell eigenvalues must lie in [lambda, Lambda].
struct EllipticityBounds {
  double lambda = 1.0;
  double Lambda = 1.0;

  void validate() const {
    if (!(lambda > 0.0) || !(Lambda >= lambda))
      throw std::invalid_argument("EllipticityBounds: need 0 < lambda <= Lambda");
  }
};

/// Scalar field on the grid, one value per cell in canonical layout.
using ScalarField = std::vector<double>;

/**
 * @brief Symmetric-matrix-valued coefficient field sampled cellwise.
 *
 * Values are stored as d(d+1)/2 upper-triangle entries per cell, contiguous
 * in canonical cell order; symmetry is structural. Immutable after
 * construction by convention: any number of readers may share a field.
 */
class CoefficientField {
 public:
  CoefficientField(GridSpec grid, EllipticityBounds bounds)
      : grid_(grid), bounds_(bounds), tri_(SymMat::tri_size(grid.dim)) {
    grid_.validate();
    bounds_.validate();
    values_.assign(static_cast<std::size_t>(grid_.cell_count()) * tri_, 0.0);
  }

  const GridSpec& grid() const { return grid_; }
  const EllipticityBounds& bounds() const { return bounds_; }
  int dim() const { return grid_.dim; }
  Index cell_count() const { return grid_.cell_count(); }

  SymMat cell(Index id) const {
    SymMat m(grid_.dim);
    std::memcpy(m.data(), values_.data() + static_cast<std::size_t>(id) * tri_,
                sizeof(double) * tri_);
    return m;
  }

  void set_cell(Index id, const SymMat& m) {
    if (m.dim() != grid_.dim) throw std::invalid_argument("CoefficientField: dim mismatch");
    std::memcpy(values_.data() + static_cast<std::size_t>(id) * tri_, m.data(),
                sizeof(double) * tri_);
  }

  /// Triangle entry k of cell id, without materializing a SymMat.
  double tri_entry(Index id, int k) const { return values_[static_cast<std::size_t>(id) * tri_ + k]; }

  const std::vector<double>& raw() const { return values_; }
  std::vector<double>& raw() { return values_; }

 private:
  GridSpec grid_;
  EllipticityBounds bounds_;
  int tri_;
  std::vector<double> values_;
};

struct EllipticityReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool symmetric = true;
  double max_asymmetry = 0.0;  ///< max over cells of max |m_ij - m_ji|
};

/**
 * @brief Diagnostic scan of full (row-major d x d) per-cell matrices, as they
 *        arrive from outside the canonical triangle storage.
 *
 * min/max eigenvalues are taken over the symmetrized part of every cell;
 * `symmetric` is true iff the worst cellwise asymmetry is below
 * 1e-12 * Lambda.
 */
inline EllipticityReport check_ellipticity(const GridSpec& grid, const std::vector<double>& full,
                                           const EllipticityBounds& bounds) {
  const int d = grid.dim;
  const Index n = grid.cell_count();
  if (full.size() != static_cast<std::size_t>(n) * d * d)
    throw std::invalid_argument("check_ellipticity: value buffer size mismatch");
  EllipticityReport rep;
  rep.min_eig = std::numeric_limits<double>::infinity();
  rep.max_eig = -std::numeric_limits<double>::infinity();
  for (Index c = 0; c < n; ++c) {
    const double* m = full.data() + static_cast<std::size_t>(c) * d * d;
    SymMat s(d);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        s(i, j) = 0.5 * (m[i * d + j] + m[j * d + i]);
        rep.max_asymmetry = std::max(rep.max_asymmetry, std::abs(m[i * d + j] - m[j * d + i]));
      }
    }
    const auto [lo, hi] = s.eig_range();
    rep.min_eig = std::min(rep.min_eig, lo);
    rep.max_eig = std::max(rep.max_eig, hi);
  }
  rep.symmetric = rep.max_asymmetry < 1e-12 * bounds.Lambda;
  return rep;
}

inline EllipticityReport check_ellipticity(const CoefficientField& field) {
  EllipticityReport rep;
  rep.min_eig = std::numeric_limits<double>::infinity();
  rep.max_eig = -std::numeric_limits<double>::infinity();
  for (Index c = 0; c < field.cell_count(); ++c) {
    const auto [lo, hi] = field.cell(c).eig_range();
    rep.min_eig = std::min(rep.min_eig, lo);
    rep.max_eig = std::max(rep.max_eig, hi);
  }
  rep.symmetric = true;
  rep.max_asymmetry = 0.0;
  return rep;
}

// --- binary container ------------------------------------------------------
//
// Layout (little-endian, version 1):
//   "HMFD" | u32 version | u32 dim | u32 periodic | u32 cells[dim]
//   | f64 h | f64 lambda | f64 Lambda | f64 cell data (triangles, canonical
//   cell order)

namespace detail {
static_assert(std::endian::native == std::endian::little,
              "field container assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("field container: truncated file");
  return v;
}
}  // namespace detail

inline void save_field(const CoefficientField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  os.write("HMFD", 4);
  detail::put<std::uint32_t>(os, 1);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(field.dim()));
  detail::put<std::uint32_t>(os, field.grid().periodic ? 1 : 0);
  for (int t = 0; t < field.dim(); ++t)
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid().cells[t]));
  detail::put<double>(os, field.grid().h);
  detail::put<double>(os, field.bounds().lambda);
  detail::put<double>(os, field.bounds().Lambda);
  os.write(reinterpret_cast<const char*>(field.raw().data()),
           static_cast<std::streamsize>(field.raw().size() * sizeof(double)));
  if (!os) throw std::runtime_error("save_field: write failed for " + path);
}

inline CoefficientField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "HMFD", 4) != 0)
    throw std::runtime_error("load_field: bad magic in " + path);
  const auto version = detail::get<std::uint32_t>(is);
  if (version != 1) throw std::runtime_error("load_field: unsupported version");
  GridSpec grid;
  grid.dim = static_cast<int>(detail::get<std::uint32_t>(is));
  if (grid.dim < 1 || grid.dim > 3) throw std::runtime_error("load_field: bad dimension");
  grid.periodic = detail::get<std::uint32_t>(is) != 0;
  for (int t = 0; t < grid.dim; ++t)
    grid.cells[t] = static_cast<Index>(detail::get<std::uint32_t>(is));
  grid.h = detail::get<double>(is);
  EllipticityBounds bounds;
  bounds.lambda = detail::get<double>(is);
  bounds.Lambda = detail::get<double>(is);
  CoefficientField field(grid, bounds);
  is.read(reinterpret_cast<char*>(field.raw().data()),
          static_cast<std::streamsize>(field.raw().size() * sizeof(double)));
  if (!is) throw std::runtime_error("load_field: truncated cell data in " + path);
  return field;
}

/// Plain-text provenance sidecar, "key = value" per line.
inline void save_sidecar(const std::string& field_path,
                         const std::map<std::string, std::string>& entries) {
  std::ofstream os(field_path + ".txt");
  if (!os) throw std::runtime_error("save_sidecar: cannot open " + field_path + ".txt");
  for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
}

}  // namespace stohom
