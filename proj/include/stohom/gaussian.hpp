#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/fft.hpp"
#include "stohom/field.hpp"
#include "stohom/grid.hpp"
#include "stohom/resonance.hpp"
#include "stohom/rng.hpp"

namespace stohom {

/**
 * @brief Finite atomic part of the spectral measure: weight c0 on the zero
 *        frequency plus N atoms (omega_j, c_j).
 *
 * The weight convention is fixed so the autocovariance closes: an atom with
 * weight c contributes c * cos(omega . x), which means amplitudes are
 * Rayleigh with E[r^2] = 2c and the zero-frequency offset is Normal(0, c0).
 */
struct AtomicSpectrum {
  struct Atom {
    std::array<double, 3> omega{0.0, 0.0, 0.0};
    double c = 1.0;
  };

  int dim = 1;
  double c0 = 0.0;
  std::vector<Atom> atoms;

  int atom_count() const { return static_cast<int>(atoms.size()); }

  double total_variance() const {
    double v = c0;
    for (const auto& a : atoms) v += a.c;
    return v;
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("AtomicSpectrum: dim must be 1, 2, or 3");
    if (!(c0 >= 0.0)) throw std::invalid_argument("AtomicSpectrum: c0 must be >= 0");
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const auto& a = atoms[j];
      if (!(a.c > 0.0)) throw std::invalid_argument("AtomicSpectrum: atom weights must be > 0");
      bool nonzero = false;
      for (int t = 0; t < dim; ++t) {
        if (!(a.omega[t] >= 0.0))
          throw std::invalid_argument("AtomicSpectrum: frequencies must be componentwise >= 0");
        nonzero = nonzero || a.omega[t] != 0.0;
      }
      if (!nonzero) throw std::invalid_argument("AtomicSpectrum: zero frequency atom (use c0)");
      for (std::size_t k = 0; k < j; ++k)
        if (atoms[k].omega == a.omega)
          throw std::invalid_argument("AtomicSpectrum: duplicate frequency");
    }
  }
};

/// Atom-free covariance of the ergodic part, isotropic in the lag.
struct ContinuousCovariance {
  enum class Kind { none, squared_exponential, exponential };

  Kind kind = Kind::none;
  double sigma2 = 0.0;
  double ell = 0.0;

  void validate() const {
    if (kind == Kind::none) return;
    if (!(sigma2 > 0.0) || !(ell > 0.0))
      throw std::invalid_argument("ContinuousCovariance: sigma2 and ell must be > 0");
  }

  double operator()(double r) const {
    switch (kind) {
      case Kind::none:
        return 0.0;
      case Kind::squared_exponential:
        return sigma2 * std::exp(-0.5 * (r / ell) * (r / ell));
      case Kind::exponential:
        return sigma2 * std::exp(-r / ell);
    }
    return 0.0;
  }
};

/// Full stationary Gaussian model X = X_c + X_a, n independent channels.
struct GaussianFieldModel {
  AtomicSpectrum atomic;
  ContinuousCovariance continuous;
  int channels = 1;

  int dim() const { return atomic.dim; }

  void validate() const {
    atomic.validate();
    continuous.validate();
    if (channels < 1) throw std::invalid_argument("GaussianFieldModel: channels must be >= 1");
    const double sigma2 = continuous.kind == ContinuousCovariance::Kind::none ? 0.0
                                                                              : continuous.sigma2;
    if (!(atomic.total_variance() + sigma2 > 0.0))
      throw std::invalid_argument("GaussianFieldModel: total variance must be positive");
  }
};

/**
 * @brief Coordinates of one ergodic component of the atomic part: the
 *        zero-frequency offset, the Rayleigh amplitudes, the phases, and the
 *        derived invariant phase combinations.
 */
struct ChannelCoordinates {
  double x0 = 0.0;
  std::vector<double> r;
  std::vector<double> phi;
  std::vector<double> eta;
};

struct ComponentCoordinates {
  std::vector<ChannelCoordinates> channels;
};

/**
 * @brief Draw component coordinates under the stationary law.
 *
 * Draw order per channel: x0, then (r_j, phi_j) per atom in declaration
 * order; channels in order. This order is part of the replay contract.
 */
inline ComponentCoordinates sample_component(const GaussianFieldModel& model,
                                             const ResonanceLattice& lattice, Rng& rng) {
  model.validate();
  if (lattice.atoms != model.atomic.atom_count())
    throw std::invalid_argument("sample_component: lattice and spectrum atom counts differ");
  ComponentCoordinates out;
  out.channels.resize(model.channels);
  for (auto& ch : out.channels) {
    ch.x0 = model.atomic.c0 > 0.0 ? rng.normal(model.atomic.c0) : 0.0;
    ch.r.reserve(model.atomic.atoms.size());
    ch.phi.reserve(model.atomic.atoms.size());
    for (const auto& atom : model.atomic.atoms) {
      ch.r.push_back(rng.rayleigh(atom.c));
      ch.phi.push_back(rng.phase());
    }
    ch.eta = invariant_phases(lattice, ch.phi);
  }
  return out;
}

/// Evaluate the atomic part x0 + sum_j r_j cos(omega_j . x + phi_j) at cell centers.
inline std::vector<ScalarField> synth_atomic(const ComponentCoordinates& coords,
                                             const AtomicSpectrum& atoms, const GridSpec& grid) {
  grid.validate();
  if (grid.dim != atoms.dim) throw std::invalid_argument("synth_atomic: dimension mismatch");
  const Index n = grid.cell_count();
  std::vector<ScalarField> out;
  out.reserve(coords.channels.size());
  for (const auto& ch : coords.channels) {
    if (ch.r.size() != atoms.atoms.size() || ch.phi.size() != atoms.atoms.size())
      throw std::invalid_argument("synth_atomic: coordinate length mismatch");
    ScalarField f(static_cast<std::size_t>(n), ch.x0);
    for (std::size_t j = 0; j < atoms.atoms.size(); ++j) {
      const auto& atom = atoms.atoms[j];
      if (ch.r[j] == 0.0) continue;
      for (Index id = 0; id < n; ++id) {
        const auto iv = grid.unflatten(id);
        double dot = 0.0;
        for (int t = 0; t < grid.dim; ++t) dot += atom.omega[t] * grid.cell_center(t, iv[t]);
        f[static_cast<std::size_t>(id)] += ch.r[j] * std::cos(dot + ch.phi[j]);
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

/**
 * @brief Spectral sampler for the continuous part on the torus.
 *
 * The target covariance is periodized over neighbouring images, its DFT gives
 * the circulant eigenvalues, and a sample is IDFT(sqrt(eig) . DFT(white)).
 * Eigenvalues in [-1e-10 sigma2, 0) are clipped to zero; anything more
 * negative is a hard error (the torus is too small for this correlation
 * length: enlarge the domain).
 */
class CirculantSampler {
 public:
  CirculantSampler(const ContinuousCovariance& cov, const GridSpec& grid)
      : grid_(grid), kind_(cov.kind), fft_(grid) {
    cov.validate();
    grid.validate();
    if (!grid.periodic)
      throw std::invalid_argument("CirculantSampler: grid must be periodic");
    if (kind_ == ContinuousCovariance::Kind::none) return;

    // Periodized covariance at lag = cell offset, images in {-1,0,1}^d.
    double* c = fft_.real_data();
    for (Index id = 0; id < grid.cell_count(); ++id) {
      const auto iv = grid.unflatten(id);
      double sum = 0.0;
      std::array<int, 3> img{0, 0, 0};
      const int lo = -1, hi = 1;
      for (img[0] = lo; img[0] <= hi; ++img[0]) {
        for (img[1] = grid.dim > 1 ? lo : 0; img[1] <= (grid.dim > 1 ? hi : 0); ++img[1]) {
          for (img[2] = grid.dim > 2 ? lo : 0; img[2] <= (grid.dim > 2 ? hi : 0); ++img[2]) {
            double r2 = 0.0;
            for (int t = 0; t < grid.dim; ++t) {
              const double dx = static_cast<double>(iv[t]) * grid.h +
                                static_cast<double>(img[t]) * grid.side(t);
              r2 += dx * dx;
            }
            sum += cov(std::sqrt(r2));
          }
        }
      }
      c[id] = sum;
    }
    fft_.forward();
    sqrt_eig_.resize(static_cast<std::size_t>(fft_.complex_size()));
    const std::complex<double>* spec = fft_.complex_data();
    for (Index k = 0; k < fft_.complex_size(); ++k) {
      const double eig = spec[k].real();
      if (eig < -1e-10 * cov.sigma2)
        throw std::runtime_error(
            "CirculantSampler: periodized covariance is not positive semidefinite; "
            "enlarge the embedding domain relative to the correlation length");
      sqrt_eig_[static_cast<std::size_t>(k)] = std::sqrt(std::max(eig, 0.0));
    }
  }

  const GridSpec& grid() const { return grid_; }

  /// One centered stationary sample; consumes cell_count normal draws.
  ScalarField sample(Rng& rng) {
    const Index n = grid_.cell_count();
    ScalarField f(static_cast<std::size_t>(n), 0.0);
    if (kind_ == ContinuousCovariance::Kind::none) return f;
    double* w = fft_.real_data();
    for (Index i = 0; i < n; ++i) w[i] = rng.normal(1.0);
    fft_.forward();
    std::complex<double>* spec = fft_.complex_data();
    for (Index k = 0; k < fft_.complex_size(); ++k)
      spec[k] *= sqrt_eig_[static_cast<std::size_t>(k)];
    fft_.backward();
    const double* out = fft_.real_data();
    for (Index i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = out[i];
    return f;
  }

 private:
  GridSpec grid_;
  ContinuousCovariance::Kind kind_;
  FftTorus fft_;
  std::vector<double> sqrt_eig_;
};

/// Sample the continuous part, one field per channel, channels in order.
inline std::vector<ScalarField> synth_continuous(const ContinuousCovariance& cov,
                                                 const GridSpec& grid, Rng& rng,
                                                 int channels = 1) {
  CirculantSampler sampler(cov, grid);
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(channels));
  for (int ch = 0; ch < channels; ++ch) out.push_back(sampler.sample(rng));
  return out;
}

/// One unconditional field draw with the coordinates it used.
struct FieldSample {
  std::vector<ScalarField> channels;
  ComponentCoordinates coords;
};

/**
 * @brief Full field draw X = X_c + X_a.
 *
 * Draw order: component coordinates first (all channels), then continuous
 * white noise per channel. Pass a prebuilt sampler to amortize the
 * eigenvalue setup across many draws; it must match model.continuous and
 * the grid.
 */
inline FieldSample sample_field(const GaussianFieldModel& model, const ResonanceLattice& lattice,
                                const GridSpec& grid, Rng& rng,
                                CirculantSampler* sampler = nullptr) {
  FieldSample s;
  s.coords = sample_component(model, lattice, rng);
  s.channels = synth_atomic(s.coords, model.atomic, grid);
  if (model.continuous.kind != ContinuousCovariance::Kind::none) {
    std::optional<CirculantSampler> local;
    if (!sampler) local.emplace(model.continuous, grid);
    CirculantSampler& cs = sampler ? *sampler : *local;
    for (auto& ch : s.channels) {
      const ScalarField xc = cs.sample(rng);
      for (std::size_t i = 0; i < ch.size(); ++i) ch[i] += xc[i];
    }
  }
  return s;
}

/**
 * @brief Shift component coordinates by a spatial translation y:
 *        phi_j -> phi_j + omega_j . y, with x0 and r frozen.
 *
 * The invariant phases are recomputed; by the lattice relations they change
 * only at rounding level.
 */
inline ComponentCoordinates translate_coordinates(const ComponentCoordinates& coords,
                                                  const AtomicSpectrum& atoms,
                                                  const ResonanceLattice& lattice,
                                                  const std::array<double, 3>& y) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ComponentCoordinates out = coords;
  for (auto& ch : out.channels) {
    for (std::size_t j = 0; j < ch.phi.size(); ++j) {
      double dot = 0.0;
      for (int t = 0; t < atoms.dim; ++t) dot += atoms.atoms[j].omega[t] * y[t];
      double p = std::fmod(ch.phi[j] + dot, two_pi);
      if (p < 0.0) p += two_pi;
      ch.phi[j] = p;
    }
    ch.eta = invariant_phases(lattice, ch.phi);
  }
  return out;
}

/**
 * @brief Raw cross-moment estimate of the autocovariance at integer cell
 *        lags, averaged over space (periodic wrap) and samples.
 */
inline std::vector<double> empirical_autocovariance(const std::vector<ScalarField>& samples,
                                                    const GridSpec& grid,
                                                    const std::vector<std::array<Index, 3>>& lags) {
  grid.validate();
  if (samples.size() < 2)
    throw std::invalid_argument("empirical_autocovariance: need at least 2 samples");
  const Index n = grid.cell_count();
  for (const auto& s : samples)
    if (s.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("empirical_autocovariance: sample size mismatch");

  std::vector<double> out;
  out.reserve(lags.size());
  for (const auto& lag : lags) {
    double acc = 0.0;
    for (const auto& s : samples) {
      double sum = 0.0;
      for (Index id = 0; id < n; ++id) {
        auto iv = grid.unflatten(id);
        std::array<Index, 3> jv{0, 0, 0};
        for (int t = 0; t < grid.dim; ++t) jv[t] = grid.wrap(t, iv[t] + lag[t]);
        sum += s[static_cast<std::size_t>(id)] * s[static_cast<std::size_t>(grid.flat(jv))];
      }
      acc += sum / static_cast<double>(n);
    }
    out.push_back(acc / static_cast<double>(samples.size()));
  }
  return out;
}

/// Exact atomic-part autocovariance c0 + sum_j c_j cos(omega_j . x) at a lag.
inline double atomic_autocovariance(const AtomicSpectrum& atoms, const std::array<double, 3>& x) {
  double c = atoms.c0;
  for (const auto& a : atoms.atoms) {
    double dot = 0.0;
    for (int t = 0; t < atoms.dim; ++t) dot += a.omega[t] * x[t];
    c += a.c * std::cos(dot);
  }
  return c;
}

}  // namespace stohom
