#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ccmp/gaussian.hpp"
#include "ccmp/message.hpp"

namespace ccmp {

/// Interval that a constrained belief must cover with probability >= 1-epsilon.
/// Either bound may be infinite; a doubly infinite region makes the constraint
/// vacuous.
struct SafeRegion {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  void validate() const {
    if (std::isnan(lower) || std::isnan(upper) || !(lower < upper)) {
      throw ModelError("SafeRegion: require lower < upper");
    }
  }

  [[nodiscard]] bool is_everything() const {
    return std::isinf(lower) && lower < 0.0 && std::isinf(upper) && upper > 0.0;
  }
  [[nodiscard]] bool contains(double x) const { return x > lower && x < upper; }
};

/// Default tolerance on residual constraint violation in the re-correction
/// loop. Chosen so the control laws at reference settings land within 1e-3
/// of the exact intervention boundary; see docs in the repository README.
inline constexpr double kDefaultViolationTolerance = 1e-6;
inline constexpr int kDefaultMaxCorrectionIterations = 200;

struct ChanceConstraintSpec {
  SafeRegion region;
  double epsilon = 0.01;  // admissible probability of leaving the region
  double delta = kDefaultViolationTolerance;
  int max_iterations = kDefaultMaxCorrectionIterations;

  void validate() const {
    region.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw ModelError("ChanceConstraintSpec: epsilon must lie in (0,1)");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
      throw ModelError("ChanceConstraintSpec: delta must be >= 0");
    }
    if (!(epsilon + delta < 1.0)) {
      throw ModelError("ChanceConstraintSpec: epsilon + delta must be < 1");
    }
    if (max_iterations < 1) {
      throw ModelError("ChanceConstraintSpec: max_iterations must be >= 1");
    }
  }
};

/// Per-update report of the correction loop.
struct CorrectionDiagnostics {
  int iterations = 0;
  double safe_mass_initial = 1.0;  // before any correction
  double safe_mass_final = 1.0;    // of the returned approximation
  double eta_star = 0.0;           // optimal multiplier, diagnostic only
  bool activated = false;          // safe_mass_initial < 1 - epsilon
};

/// Thrown when the correction loop cannot satisfy its tolerance; carries the
/// diagnostics accumulated so far.
class ChanceConstraintError : public InferenceError {
 public:
  ChanceConstraintError(const std::string& what, CorrectionDiagnostics diag)
      : InferenceError(what), diagnostics(diag) {}
  CorrectionDiagnostics diagnostics;
};

/// Probability mass of a belief inside the safe region.
inline double safe_mass(const Gaussian1D& belief, const SafeRegion& region) {
  region.validate();
  return truncated_moments(belief, region.lower, region.upper).mass;
}

/// Optimal multiplier for an active constraint; zero exactly at the
/// activation boundary phi0 = 1 - epsilon.
inline double eta_star(double phi0, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("eta_star: epsilon must lie in (0,1)");
  }
  if (!(phi0 > 0.0 && phi0 <= 1.0 - epsilon)) {
    throw std::domain_error("eta_star: require 0 < phi0 <= 1 - epsilon");
  }
  return std::log(epsilon * phi0) - std::log1p(-epsilon) - std::log1p(-phi0);
}

/// One truncated piece of a corrected belief: the base Gaussian restricted to
/// an interval, rescaled so that the piece integrates to `weight`.
struct TruncatedComponent {
  double lower = 0.0;
  double upper = 0.0;
  double weight = 0.0;       // mass of this piece after correction
  double scale = 0.0;        // multiplier applied to the base density
  TruncatedMoments moments;  // moments of the (unscaled) restriction
};

/// Exact corrected belief: the input density rescaled by (1-epsilon)/phi0
/// inside the safe region and epsilon/(1-phi0) outside, represented as a
/// mixture of truncated components. When the constraint is inactive this is
/// the identity (a single untruncated component of weight one).
struct CorrectedBelief {
  Gaussian1D base;
  SafeRegion region;
  bool active = false;
  std::vector<TruncatedComponent> components;

  /// Pointwise density of the corrected belief.
  [[nodiscard]] double pdf(double x) const {
    for (const auto& c : components) {
      if (x >= c.lower && x <= c.upper) return c.scale * base.pdf(x);
    }
    return 0.0;
  }

  [[nodiscard]] double mean() const {
    double m = 0.0;
    for (const auto& c : components) m += c.weight * c.moments.mean;
    return m;
  }

  [[nodiscard]] double variance() const {
    const double m = mean();
    double second = 0.0;
    for (const auto& c : components) {
      second += c.weight * (c.moments.variance + c.moments.mean * c.moments.mean);
    }
    return second - m * m;
  }
};

inline CorrectedBelief correct_belief(const Gaussian1D& belief,
                                      const ChanceConstraintSpec& spec) {
  spec.validate();
  const double inf = std::numeric_limits<double>::infinity();
  CorrectedBelief out{belief, spec.region, false, {}};

  const TruncatedMoments inside =
      truncated_moments(belief, spec.region.lower, spec.region.upper);
  if (inside.underflow) {
    throw InferenceError(
        "chance constraint: belief mass inside the safe region underflows; "
        "widen the priors or relax the constraint");
  }
  const double phi0 = inside.mass;
  if (phi0 >= 1.0 - spec.epsilon) {
    // Inactive: the belief already satisfies the constraint.
    out.components.push_back(
        {-inf, inf, 1.0, 1.0, TruncatedMoments{1.0, belief.mean(), belief.variance(), false}});
    return out;
  }

  out.active = true;
  const double unsafe = 1.0 - phi0;
  out.components.push_back({spec.region.lower, spec.region.upper,
                            1.0 - spec.epsilon, (1.0 - spec.epsilon) / phi0,
                            inside});

  // The single unsafe rescale factor epsilon/(1-phi0) splits the unsafe
  // weight across the below/above pieces in proportion to their
  // uncorrected masses.
  const double outside_scale = spec.epsilon / unsafe;
  double below_mass = 0.0;
  double above_mass = 0.0;
  TruncatedMoments below, above;
  if (std::isfinite(spec.region.lower)) {
    below = truncated_moments(belief, -inf, spec.region.lower);
    below_mass = below.mass;
  }
  if (std::isfinite(spec.region.upper)) {
    above = truncated_moments(belief, spec.region.upper, inf);
    above_mass = above.mass;
  }
  const double total_out = below_mass + above_mass;
  if (!(total_out > 0.0)) {
    throw InferenceError("chance constraint: unsafe mass vanished numerically");
  }
  if (below_mass > 0.0) {
    out.components.push_back({-inf, spec.region.lower,
                              spec.epsilon * below_mass / total_out,
                              outside_scale, below});
  }
  if (above_mass > 0.0) {
    out.components.push_back({spec.region.upper, inf,
                              spec.epsilon * above_mass / total_out,
                              outside_scale, above});
  }
  return out;
}

/// Gaussian sharing the mean and variance of the exact corrected belief.
/// Identity when the constraint is inactive.
inline Gaussian1D moment_match_correction(const Gaussian1D& belief,
                                          const ChanceConstraintSpec& spec) {
  const CorrectedBelief corrected = correct_belief(belief, spec);
  if (!corrected.active) return belief;
  return Gaussian1D(corrected.mean(), corrected.variance());
}

/// Outbound message of an auxiliary constraint node, with diagnostics.
///
/// The inbound message (the product of all other messages arriving at the
/// constrained variable) is normalized into an uncorrected belief. While the
/// approximated belief still violates the constraint by more than delta, it
/// is re-corrected and re-matched to a Gaussian. The outbound message is the
/// final approximation divided by the inbound message, and may be an improper
/// carrier.
inline std::pair<Message, CorrectionDiagnostics> chance_message(
    const Message& inbound, const ChanceConstraintSpec& spec) {
  spec.validate();
  CorrectionDiagnostics diag;
  if (is_uninformative(inbound)) {
    return {Uninformative{}, diag};  // initialization round
  }
  if (is_point_mass(inbound)) {
    throw InferenceError("chance constraint: inbound message is a point mass");
  }
  if (is_improper(inbound)) {
    throw InferenceError(
        "chance constraint: inbound message is improper and cannot be "
        "normalized into a belief");
  }

  const Gaussian1D q0 = gaussian_of(inbound);
  diag.safe_mass_initial = safe_mass(q0, spec.region);
  diag.activated = diag.safe_mass_initial < 1.0 - spec.epsilon;
  if (diag.activated) {
    diag.eta_star = eta_star(diag.safe_mass_initial, spec.epsilon);
  }

  Gaussian1D approx = q0;
  double phi = diag.safe_mass_initial;
  int n = 0;
  while (spec.epsilon + spec.delta < 1.0 - phi) {
    if (n >= spec.max_iterations) {
      diag.iterations = n;
      diag.safe_mass_final = phi;
      throw ChanceConstraintError(
          "chance constraint: correction did not reach tolerance within " +
              std::to_string(spec.max_iterations) + " iterations (safe mass " +
              std::to_string(phi) + ")",
          diag);
    }
    ++n;
    approx = moment_match_correction(approx, spec);
    phi = safe_mass(approx, spec.region);
  }
  diag.iterations = n;
  diag.safe_mass_final = phi;

  const Message outbound = message_from_canonical(divide(approx, q0));
  return {outbound, diag};
}

}  // namespace ccmp
