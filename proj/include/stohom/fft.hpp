#pragma once

#include <complex>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "stohom/grid.hpp"

namespace stohom {

namespace detail {
/// FFTW plan creation and destruction are not thread-safe; execution is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/**
 * @brief Real-to-complex FFT pair on the torus grid, with owned buffers.
 *
 * Plans are created with FFTW_ESTIMATE so the chosen algorithm (and hence
 * floating-point rounding) depends only on the transform size, never on
 * runtime measurement. One instance per thread; execution does not lock.
 *
 * backward() includes the 1/cell_count normalization, so
 * forward(); backward(); is the identity.
 */
class FftTorus {
 public:
  explicit FftTorus(const GridSpec& grid) : grid_(grid) {
    grid.validate();
    int n[3] = {1, 1, 1};
    for (int t = 0; t < grid.dim; ++t) n[t] = static_cast<int>(grid.cells[t]);
    nreal_ = grid.cell_count();
    ncplx_ = nreal_ / grid.cells[grid.dim - 1] * (grid.cells[grid.dim - 1] / 2 + 1);
    real_ = fftw_alloc_real(static_cast<std::size_t>(nreal_));
    cplx_ = fftw_alloc_complex(static_cast<std::size_t>(ncplx_));
    if (!real_ || !cplx_) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fwd_ = fftw_plan_dft_r2c(grid.dim, n, real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(grid.dim, n, cplx_, real_, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) {
      release();
      throw std::runtime_error("FftTorus: plan creation failed");
    }
  }

  FftTorus(const FftTorus&) = delete;
  FftTorus& operator=(const FftTorus&) = delete;

  ~FftTorus() { release(); }

  const GridSpec& grid() const { return grid_; }
  Index real_size() const { return nreal_; }
  Index complex_size() const { return ncplx_; }

  double* real_data() { return real_; }
  const double* real_data() const { return real_; }
  std::complex<double>* complex_data() {
    return reinterpret_cast<std::complex<double>*>(cplx_);
  }

  void forward() { fftw_execute(fwd_); }

  void backward() {
    fftw_execute(bwd_);
    const double inv = 1.0 / static_cast<double>(nreal_);
    for (Index i = 0; i < nreal_; ++i) real_[i] *= inv;
  }

  /// Multi-index of complex bin id, last axis truncated to n/2 + 1 bins.
  std::array<Index, 3> complex_unflatten(Index id) const {
    std::array<Index, 3> iv{0, 0, 0};
    const Index last = grid_.cells[grid_.dim - 1] / 2 + 1;
    iv[grid_.dim - 1] = id % last;
    id /= last;
    for (int t = grid_.dim - 2; t >= 0; --t) {
      iv[t] = id % grid_.cells[t];
      id /= grid_.cells[t];
    }
    return iv;
  }

 private:
  void release() {
    if (fwd_ || bwd_) {
      std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
      if (fwd_) fftw_destroy_plan(fwd_);
      if (bwd_) fftw_destroy_plan(bwd_);
      fwd_ = bwd_ = nullptr;
    }
    if (real_) fftw_free(real_);
    if (cplx_) fftw_free(cplx_);
    real_ = nullptr;
    cplx_ = nullptr;
  }

  GridSpec grid_;
  Index nreal_ = 0;
  Index ncplx_ = 0;
  double* real_ = nullptr;
  fftw_complex* cplx_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace stohom
