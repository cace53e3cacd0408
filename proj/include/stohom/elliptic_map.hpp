#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stohom/field.hpp"

namespace stohom {

/**
 * @brief Pointwise transform from scalar field values to elliptic coefficients.
 *
 * Every variant maps the whole real line into a known window [lambda, Lambda],
 * so fields built through a map satisfy uniform ellipticity by construction.
 * `continuous()` distinguishes the smooth transforms from thresholding ones.
 */
class EllipticMap {
 public:
  /// clamp(mu + slope * x, lambda, Lambda).
  static EllipticMap affine_clamped(double lambda, double Lambda, double mu, double slope) {
    if (!std::isfinite(mu) || !std::isfinite(slope))
      throw std::invalid_argument("affine_clamped: parameters must be finite");
    EllipticityBounds b{lambda, Lambda};
    b.validate();
    EllipticMap m;
    m.kind_ = Kind::AffineClamped;
    m.bounds_ = b;
    m.p0_ = mu;
    m.p1_ = slope;
    return m;
  }

  /// lambda + (Lambda - lambda) / (1 + exp(-rate (x - center))); midpoint at x = center.
  static EllipticMap logistic(double lambda, double Lambda, double center = 0.0,
                              double rate = 1.0) {
    if (!(rate > 0.0)) throw std::invalid_argument("logistic: need rate > 0");
    EllipticityBounds b{lambda, Lambda};
    b.validate();
    EllipticMap m;
    m.kind_ = Kind::Logistic;
    m.bounds_ = b;
    m.p0_ = center;
    m.p1_ = rate;
    return m;
  }

  /// a1 below the threshold, a2 at or above it.
  static EllipticMap two_phase(double a1, double a2, double threshold) {
    EllipticityBounds b{std::min(a1, a2), std::max(a1, a2)};
    b.validate();
    EllipticMap m;
    m.kind_ = Kind::TwoPhase;
    m.bounds_ = b;
    m.p0_ = threshold;
    m.p1_ = 0.0;
    m.a1_ = a1;
    m.a2_ = a2;
    return m;
  }

  const EllipticityBounds& bounds() const { return bounds_; }

  bool continuous() const { return kind_ != Kind::TwoPhase; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::AffineClamped:
        return std::clamp(p0_ + p1_ * x, bounds_.lambda, bounds_.Lambda);
      case Kind::Logistic:
        return bounds_.lambda +
               (bounds_.Lambda - bounds_.lambda) / (1.0 + std::exp(-p1_ * (x - p0_)));
      case Kind::TwoPhase:
        return x < p0_ ? a1_ : a2_;
    }
    throw std::logic_error("EllipticMap: bad kind");
  }

  /// Human-readable form for sidecars and logs; flags the discontinuous variant.
  std::string describe() const {
    switch (kind_) {
      case Kind::AffineClamped:
        return "affine_clamped(mu=" + std::to_string(p0_) + ", slope=" + std::to_string(p1_) +
               ", clamp=[" + std::to_string(bounds_.lambda) + ", " +
               std::to_string(bounds_.Lambda) + "])";
      case Kind::Logistic:
        return "logistic(" + std::to_string(bounds_.lambda) + ", " +
               std::to_string(bounds_.Lambda) + ", center=" + std::to_string(p0_) +
               ", rate=" + std::to_string(p1_) + ")";
      case Kind::TwoPhase:
        return "two_phase(" + std::to_string(a1_) + ", " + std::to_string(a2_) +
               ", threshold=" + std::to_string(p0_) + ") [non-continuous, test-only]";
    }
    return "";
  }

 private:
  enum class Kind { AffineClamped, Logistic, TwoPhase };

  EllipticMap() = default;

  Kind kind_ = Kind::TwoPhase;
  EllipticityBounds bounds_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  double a1_ = 1.0;
  double a2_ = 1.0;
};

/**
 * @brief Build an isotropic coefficient field a(x) Id from a scalar field.
 *
 * Rejects non-finite inputs, naming the first offending cell.
 */
inline CoefficientField map_field(const GridSpec& grid, const ScalarField& values,
                                  const EllipticMap& map) {
  grid.validate();
  if (values.size() != static_cast<std::size_t>(grid.cell_count()))
    throw std::invalid_argument("map_field: field size does not match grid");
  CoefficientField field(grid, map.bounds());
  for (Index c = 0; c < grid.cell_count(); ++c) {
    const double x = values[static_cast<std::size_t>(c)];
    if (!std::isfinite(x))
      throw std::runtime_error("map_field: non-finite value at cell " + std::to_string(c));
    const double a = map(x);
    if (!(a >= map.bounds().lambda && a <= map.bounds().Lambda))
      throw std::runtime_error("map_field: value outside ellipticity bounds at cell " +
                               std::to_string(c));
    field.set_cell(c, SymMat::identity(grid.dim, a));
  }
  return field;
}

/**
 * @brief Multi-channel variant: channels are averaged pointwise, then mapped.
 */
inline CoefficientField map_field(const GridSpec& grid, const std::vector<ScalarField>& channels,
                                  const EllipticMap& map) {
  if (channels.empty()) throw std::invalid_argument("map_field: no channels");
  if (channels.size() == 1) return map_field(grid, channels[0], map);
  const std::size_t n = channels[0].size();
  for (const auto& ch : channels)
    if (ch.size() != n) throw std::invalid_argument("map_field: channel size mismatch");
  ScalarField mean(n, 0.0);
  for (const auto& ch : channels)
    for (std::size_t i = 0; i < n; ++i) mean[i] += ch[i];
  for (double& v : mean) v /= static_cast<double>(channels.size());
  return map_field(grid, mean, map);
}

}  // namespace stohom
