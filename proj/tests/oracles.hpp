#pragma once

// Test-only oracles, independent of the message-passing implementation they
// check: adaptive quadrature, brute-force grid marginals and a bisection
// root-finder.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double gauss_pdf(double x, double mean, double variance) {
  const double z = (x - mean) / std::sqrt(variance);
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI * variance);
}

inline double gauss_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a,
                       double b, double fa, double fm, double fb, double whole,
                       double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature on a finite interval.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int depth = 48) {
  if (!(a < b)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = detail::simpson(f, a, b, fa, fm, fb);
  return detail::adaptive(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Quadrature over an interval that may be unbounded, for integrands that
/// decay like a Gaussian centered near `center` with scale `sd`.
inline double integrate_gaussian_decay(const std::function<double(double)>& f,
                                       double lo, double hi, double center,
                                       double sd, double tol = 1e-12) {
  const double a = std::isinf(lo) ? center - 60.0 * sd : lo;
  const double b = std::isinf(hi) ? center + 60.0 * sd : hi;
  if (!(a < b)) return 0.0;
  // Split at the center so the peak never hides between coarse initial nodes.
  if (a < center && center < b) {
    return integrate(f, a, center, 0.5 * tol) +
           integrate(f, center, b, 0.5 * tol);
  }
  return integrate(f, a, b, tol);
}

struct Moments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Mass, mean and variance of a density restricted to [lo, hi], all by
/// quadrature.
inline Moments moments_by_quadrature(const std::function<double(double)>& pdf,
                                     double lo, double hi, double center,
                                     double sd, double tol = 1e-12) {
  Moments m;
  m.mass = integrate_gaussian_decay(pdf, lo, hi, center, sd, tol);
  if (m.mass <= 0.0) return m;
  const double first = integrate_gaussian_decay(
      [&](double x) { return x * pdf(x); }, lo, hi, center, sd, tol);
  m.mean = first / m.mass;
  const double mean = m.mean;
  const double second = integrate_gaussian_decay(
      [&](double x) { return (x - mean) * (x - mean) * pdf(x); }, lo, hi,
      center, sd, tol);
  m.variance = second / m.mass;
  return m;
}

/// Marginal moments of one coordinate of a 2- or 3-variable joint density,
/// by brute-force Simpson integration on a box.
class GridMarginal {
 public:
  // Axis k spans [lo[k], hi[k]] with `points` Simpson nodes (odd count).
  GridMarginal(std::vector<double> lo, std::vector<double> hi, int points)
      : lo_(std::move(lo)), hi_(std::move(hi)), n_(points | 1) {}

  Moments marginal(const std::function<double(const std::vector<double>&)>& joint,
                   std::size_t axis) const {
    const std::size_t dims = lo_.size();
    std::vector<double> x(dims, 0.0);
    double mass = 0.0, first = 0.0, second = 0.0;
    std::vector<double> steps(dims), weights;
    for (std::size_t d = 0; d < dims; ++d) {
      steps[d] = (hi_[d] - lo_[d]) / (n_ - 1);
    }
    const auto w1 = [&](int i) {
      if (i == 0 || i == n_ - 1) return 1.0;
      return (i % 2 == 1) ? 4.0 : 2.0;
    };
    const auto eval = [&](auto&& self, std::size_t d, double w) -> void {
      if (d == dims) {
        const double v = w * joint(x);
        mass += v;
        first += v * x[axis];
        second += v * x[axis] * x[axis];
        return;
      }
      for (int i = 0; i < n_; ++i) {
        x[d] = lo_[d] + i * steps[d];
        self(self, d + 1, w * w1(i) * steps[d] / 3.0);
      }
    };
    eval(eval, 0, 1.0);
    Moments m;
    m.mass = mass;
    if (mass <= 0.0) return m;
    m.mean = first / mass;
    m.variance = second / mass - m.mean * m.mean;
    return m;
  }

 private:
  std::vector<double> lo_, hi_;
  int n_;
};

/// Smallest nonnegative action bringing the one-step predictive
/// N(x + a, v) to safe mass exactly 1 - epsilon above `threshold`,
/// found by bisection.
inline double control_action_root(double elevation, double epsilon,
                                  double wind_variance, double threshold) {
  const auto mass_above = [&](double a) {
    return 1.0 - gauss_cdf(threshold, elevation + a, wind_variance);
  };
  if (mass_above(0.0) >= 1.0 - epsilon) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (mass_above(hi) < 1.0 - epsilon) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mass_above(mid) < 1.0 - epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
