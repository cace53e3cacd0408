#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace stohom {

/**
 * @brief Symmetric d x d matrix, d in {1,2,3}, stored as the d(d+1)/2
 *        upper-triangle entries. Symmetry is structural.
 *
 * Triangle order is row-major: (0,0), (0,1), ..., (0,d-1), (1,1), ...
 */
class SymMat {
 public:
  SymMat() : dim_(1) { v_.fill(0.0); }

  explicit SymMat(int dim) : dim_(dim) {
    check_dim(dim);
    v_.fill(0.0);
  }

  static SymMat identity(int dim, double scale = 1.0) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = scale;
    return m;
  }

  static constexpr int tri_size(int dim) { return dim * (dim + 1) / 2; }

  int dim() const { return dim_; }
  int size() const { return tri_size(dim_); }

  double& operator()(int i, int j) { return v_[tri_index(i, j)]; }
  double operator()(int i, int j) const { return v_[tri_index(i, j)]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  SymMat& operator+=(const SymMat& o) {
    for (int k = 0; k < size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  SymMat& operator*=(double s) {
    for (int k = 0; k < size(); ++k) v_[k] *= s;
    return *this;
  }
  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) {
    for (int k = 0; k < a.size(); ++k) a.v_[k] -= b.v_[k];
    return a;
  }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }

  bool operator==(const SymMat&) const = default;

  std::array<double, 3> apply(const std::array<double, 3>& x) const {
    std::array<double, 3> y{0, 0, 0};
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  double quad(const std::array<double, 3>& x) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) s += x[i] * (*this)(i, j) * x[j];
    return s;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (int k = 0; k < size(); ++k) m = std::max(m, std::abs(v_[k]));
    return m;
  }

  /// Extremal eigenvalues {min, max}. Closed form for d <= 2, cyclic Jacobi
  /// sweeps for d = 3.
  std::array<double, 2> eig_range() const {
    if (dim_ == 1) return {v_[0], v_[0]};
    if (dim_ == 2) {
      const double a = (*this)(0, 0), b = (*this)(0, 1), c = (*this)(1, 1);
      const double mean = 0.5 * (a + c);
      const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      return {mean - rad, mean + rad};
    }
    double m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = (*this)(i, j);
    for (int sweep = 0; sweep < 64; ++sweep) {
      double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
      double scale = std::abs(m[0][0]) + std::abs(m[1][1]) + std::abs(m[2][2]) + off;
      if (off <= 1e-15 * (scale > 0 ? scale : 1.0)) break;
      for (int p = 0; p < 2; ++p) {
        for (int q = p + 1; q < 3; ++q) {
          if (m[p][q] == 0.0) continue;
          const double theta = 0.5 * std::atan2(2.0 * m[p][q], m[q][q] - m[p][p]);
          const double c = std::cos(theta), s = std::sin(theta);
          for (int k = 0; k < 3; ++k) {
            const double mkp = m[k][p], mkq = m[k][q];
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
          }
          for (int k = 0; k < 3; ++k) {
            const double mpk = m[p][k], mqk = m[q][k];
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
          }
        }
      }
    }
    double lo = m[0][0], hi = m[0][0];
    for (int i = 1; i < 3; ++i) {
      lo = std::min(lo, m[i][i]);
      hi = std::max(hi, m[i][i]);
    }
    return {lo, hi};
  }

  double det() const {
    if (dim_ == 1) return v_[0];
    if (dim_ == 2) return (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(0, 1);
    const SymMat& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2)) -
           a(0, 1) * (a(0, 1) * a(2, 2) - a(1, 2) * a(0, 2)) +
           a(0, 2) * (a(0, 1) * a(1, 2) - a(1, 1) * a(0, 2));
  }

  SymMat inverse() const {
    const double d = det();
    if (d == 0.0 || !std::isfinite(1.0 / d)) throw std::runtime_error("SymMat: singular matrix");
    SymMat r(dim_);
    if (dim_ == 1) {
      r(0, 0) = 1.0 / v_[0];
    } else if (dim_ == 2) {
      r(0, 0) = (*this)(1, 1) / d;
      r(1, 1) = (*this)(0, 0) / d;
      r(0, 1) = -(*this)(0, 1) / d;
    } else {
      const SymMat& a = *this;
      r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2)) / d;
      r(0, 1) = (a(0, 2) * a(1, 2) - a(0, 1) * a(2, 2)) / d;
      r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
      r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(0, 2)) / d;
      r(1, 2) = (a(0, 2) * a(0, 1) - a(0, 0) * a(1, 2)) / d;
      r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1)) / d;
    }
    return r;
  }

 private:
  static void check_dim(int dim) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("SymMat: dim must be 1, 2, or 3");
  }

  int tri_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }

  int dim_;
  std::array<double, 6> v_;
};

/// a <= b in quadratic-form order, up to an absolute slack on eigenvalues.
inline bool quadratic_form_leq(const SymMat& a, const SymMat& b, double slack) {
  return (b - a).eig_range()[0] >= -slack;
}

}  // namespace stohom
