#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace stohom {

using Index = std::int64_t;

/**
 * @brief Regular cell-centered grid on a box, optionally periodic (a torus).
 *
 * Cells are addressed in row-major axis order: axis 0 is the slowest index,
 * axis dim-1 is contiguous. This is the single canonical layout shared by
 * every module (fields, FFT, stencil operators). Cell centers sit at
 * (i + 1/2) * h along each axis; the box side along axis t is cells[t] * h.
 */
struct GridSpec {
  int dim = 1;
  std::array<Index, 3> cells{2, 1, 1};  ///< cells per axis; axes >= dim hold 1
  double h = 1.0;                       ///< cell size, identical on all axes
  bool periodic = true;

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1, 2, or 3");
    if (!(h > 0.0)) throw std::invalid_argument("GridSpec: h must be positive");
    for (int t = 0; t < dim; ++t) {
      if (cells[t] < 2)
        throw std::invalid_argument("GridSpec: cells_per_axis must be >= 2 on axis " +
                                    std::to_string(t));
    }
    for (int t = dim; t < 3; ++t) {
      if (cells[t] != 1) throw std::invalid_argument("GridSpec: unused axes must have 1 cell");
    }
  }

  Index cell_count() const {
    Index n = 1;
    for (int t = 0; t < dim; ++t) n *= cells[t];
    return n;
  }

  double side(int axis) const { return static_cast<double>(cells[axis]) * h; }

  double cell_center(int axis, Index i) const { return (static_cast<double>(i) + 0.5) * h; }

  /// Flat index of the cell at multi-index iv (iv must be in range).
  Index flat(const std::array<Index, 3>& iv) const {
    Index id = iv[0];
    for (int t = 1; t < dim; ++t) id = id * cells[t] + iv[t];
    return id;
  }

  std::array<Index, 3> unflatten(Index id) const {
    std::array<Index, 3> iv{0, 0, 0};
    for (int t = dim - 1; t >= 0; --t) {
      iv[t] = id % cells[t];
      id /= cells[t];
    }
    return iv;
  }

  /// Periodic wrap of a (possibly negative) index along one axis.
  Index wrap(int axis, Index i) const {
    const Index n = cells[axis];
    Index r = i % n;
    return r < 0 ? r + n : r;
  }

  bool operator==(const GridSpec&) const = default;
};

}  // namespace stohom
