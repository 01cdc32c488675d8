#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccmp/errors.hpp"

namespace ccmp {

/// Variances below this floor are clamped on construction. Point masses are
/// represented explicitly at the message level, never as degenerate Gaussians.
inline constexpr double kVarianceFloor = 1e-12;

/// Interval masses below this value are reported as zero with an underflow flag.
inline constexpr double kMassUnderflow = 1e-300;

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;

/// Standard normal density.
inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

/// P(Z <= z). erfc form, accurate in the left tail down to ~1e-300.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

/// P(Z >= z). erfc form, accurate in the right tail.
inline double normal_tail(double z) { return 0.5 * std::erfc(z / kSqrt2); }

/// Inverse standard normal CDF (Wichura's AS241, double precision).
inline double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("standard_normal_quantile: p must lie in (0,1)");
  }
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

/// Univariate Gaussian in moment form. Immutable after construction.
class Gaussian1D {
 public:
  Gaussian1D(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean)) throw ModelError("Gaussian1D: mean is not finite");
    if (!std::isfinite(variance) || variance <= 0.0) {
      throw ModelError("Gaussian1D: variance must be positive and finite, got " +
                       std::to_string(variance));
    }
    variance_ = std::max(variance_, kVarianceFloor);
  }

  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept { return variance_; }
  [[nodiscard]] double sd() const noexcept { return std::sqrt(variance_); }

  // Canonical statistics: precision and precision-weighted mean.
  [[nodiscard]] double precision() const noexcept { return 1.0 / variance_; }
  [[nodiscard]] double weighted_mean() const noexcept { return mean_ / variance_; }

  static Gaussian1D from_canonical(double precision, double weighted_mean) {
    if (!std::isfinite(precision) || precision <= 0.0) {
      throw ModelError("Gaussian1D::from_canonical: precision must be positive");
    }
    return Gaussian1D(weighted_mean / precision, 1.0 / precision);
  }

  [[nodiscard]] double pdf(double x) const noexcept {
    const double z = (x - mean_) / sd();
    return normal_pdf(z) / sd();
  }

  /// P(X <= x) for this Gaussian.
  [[nodiscard]] double cdf(double x) const noexcept {
    return normal_cdf((x - mean_) / sd());
  }

 private:
  double mean_;
  double variance_;
};

/// Exponentiated-quadratic carrier exp(-precision*x^2/2 + weighted_mean*x),
/// up to scale. Unlike Gaussian1D the precision may be zero or negative;
/// such carriers arise from message division and become proper again after
/// recombination.
struct CanonicalGaussian {
  double precision = 0.0;
  double weighted_mean = 0.0;

  [[nodiscard]] bool is_proper() const noexcept { return precision > 0.0; }
  [[nodiscard]] bool is_flat() const noexcept {
    return precision == 0.0 && weighted_mean == 0.0;
  }
  /// Zero curvature but a nonzero linear tilt: not normalizable in any
  /// direction; callers treat it as uninformative.
  [[nodiscard]] bool is_tilt() const noexcept {
    return precision == 0.0 && weighted_mean != 0.0;
  }

  [[nodiscard]] Gaussian1D to_gaussian() const {
    if (!is_proper()) {
      throw InferenceError("CanonicalGaussian: cannot normalize (precision " +
                           std::to_string(precision) + " <= 0)");
    }
    return Gaussian1D::from_canonical(precision, weighted_mean);
  }
};

inline CanonicalGaussian canonical(const Gaussian1D& g) {
  return {g.precision(), g.weighted_mean()};
}

/// Product of two Gaussians, renormalized: canonical statistics add.
inline Gaussian1D multiply(const Gaussian1D& a, const Gaussian1D& b) {
  return Gaussian1D::from_canonical(a.precision() + b.precision(),
                                    a.weighted_mean() + b.weighted_mean());
}

/// Ratio of two Gaussians: canonical statistics subtract. The result may be
/// improper (non-positive precision); the carrier remains valid for further
/// canonical arithmetic.
inline CanonicalGaussian divide(const Gaussian1D& num, const Gaussian1D& den) {
  return {num.precision() - den.precision(),
          num.weighted_mean() - den.weighted_mean()};
}

/// Mode of the (Gaussian) product of two Gaussians.
inline double mode_of_product(const Gaussian1D& a, const Gaussian1D& b) {
  return multiply(a, b).mean();
}

/// Zeroth, first and second central moment of a Gaussian restricted to an
/// interval.
struct TruncatedMoments {
  double mass = 0.0;      // integral of the density over the interval
  double mean = 0.0;      // mean of the restricted, renormalized density
  double variance = 0.0;  // variance of the restricted density
  bool underflow = false; // mass fell below kMassUnderflow
};

/// Moments of `g` restricted to [lower, upper]. Either bound may be infinite.
/// All interval masses are computed through erfc so that one-sided tails stay
/// accurate far beyond |z| = 8.
inline TruncatedMoments truncated_moments(const Gaussian1D& g, double lower,
                                          double upper) {
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
    throw ModelError("truncated_moments: require lower < upper");
  }
  const bool lo_open = std::isinf(lower);  // lower == -inf
  const bool hi_open = std::isinf(upper);  // upper == +inf
  if (lo_open && hi_open) return {1.0, g.mean(), g.variance(), false};

  const double s = g.sd();
  const double a = lo_open ? 0.0 : (lower - g.mean()) / s;
  const double b = hi_open ? 0.0 : (upper - g.mean()) / s;

  double mass;
  if (lo_open) {
    mass = normal_cdf(b);
  } else if (hi_open) {
    mass = normal_tail(a);
  } else if (a >= 0.0) {
    mass = normal_tail(a) - normal_tail(b);  // both bounds in the right tail
  } else if (b <= 0.0) {
    mass = normal_cdf(b) - normal_cdf(a);    // both bounds in the left tail
  } else {
    mass = normal_cdf(b) - normal_cdf(a);
  }

  if (!(mass >= kMassUnderflow)) {
    // Entire interval is unreachably deep in a tail; clamp to the bound
    // closest to the mode.
    double nearest;
    if (lo_open) {
      nearest = upper;
    } else if (hi_open) {
      nearest = lower;
    } else {
      nearest = (std::abs(lower - g.mean()) <= std::abs(upper - g.mean()))
                    ? lower
                    : upper;
    }
    return {0.0, nearest, 0.0, true};
  }
  mass = std::min(mass, 1.0);

  const double pa = lo_open ? 0.0 : normal_pdf(a);
  const double pb = hi_open ? 0.0 : normal_pdf(b);
  const double apa = lo_open ? 0.0 : a * pa;
  const double bpb = hi_open ? 0.0 : b * pb;

  const double r1 = (pa - pb) / mass;
  const double r2 = (apa - bpb) / mass;

  double mean = g.mean() + s * r1;
  if (!lo_open) mean = std::max(mean, lower);
  if (!hi_open) mean = std::min(mean, upper);

  // Truncation to an interval never increases the variance of a Gaussian.
  const double shape = std::clamp(1.0 + r2 - r1 * r1, 0.0, 1.0);
  return {mass, mean, g.variance() * shape, false};
}

}  // namespace ccmp
