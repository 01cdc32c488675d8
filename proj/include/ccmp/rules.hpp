#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "ccmp/gaussian.hpp"
#include "ccmp/message.hpp"

namespace ccmp {

namespace detail {

struct MomentForm {
  double mean = 0.0;
  double variance = 0.0;  // zero for point masses
};

// Moment view of a message, when it has one.
inline std::optional<MomentForm> moments_of(const Message& m) {
  if (const auto* g = std::get_if<GaussianMsg>(&m)) {
    return MomentForm{g->value.mean(), g->value.variance()};
  }
  if (const auto* p = std::get_if<PointMass>(&m)) {
    return MomentForm{p->value, 0.0};
  }
  return std::nullopt;
}

inline Message from_moments(double mean, double variance) {
  if (variance < kVarianceFloor) return PointMass{mean};
  return GaussianMsg{Gaussian1D(mean, variance)};
}

inline void require_sign(double s, const char* where) {
  if (s != 1.0 && s != -1.0) {
    throw ModelError(std::string(where) + ": signs must be +1 or -1");
  }
}

}  // namespace detail

/// Forward rule of an addition node z = sign_a*a + sign_b*b: message toward z
/// from the messages arriving on the two addend edges. Means combine with the
/// sign pattern, variances add. An improper carrier passes through only when
/// the co-input is a point mass (a pure shift of the carrier); convolving an
/// improper carrier with a proper Gaussian is undefined.
inline Message bp_addition_to_sum(const Message& in_a, const Message& in_b,
                                  double sign_a = 1.0, double sign_b = 1.0) {
  detail::require_sign(sign_a, "bp_addition_to_sum");
  detail::require_sign(sign_b, "bp_addition_to_sum");
  if (is_uninformative(in_a) || is_uninformative(in_b)) return Uninformative{};

  if (is_improper(in_a) || is_improper(in_b)) {
    const bool a_improper = is_improper(in_a);
    const Message& carrier = a_improper ? in_a : in_b;
    const Message& other = a_improper ? in_b : in_a;
    const double s_c = a_improper ? sign_a : sign_b;
    const double s_o = a_improper ? sign_b : sign_a;
    if (!is_point_mass(other)) {
      throw InferenceError(
          "addition rule: cannot convolve an improper carrier with a "
          "distributed input");
    }
    // z = s_c*x + s_o*c  =>  x = s_c*(z - s_o*c); substitute into the carrier.
    const double c = std::get<PointMass>(other).value;
    const CanonicalGaussian& k = std::get<ImproperGaussian>(carrier).stats;
    CanonicalGaussian shifted{k.precision,
                              k.precision * s_o * c + s_c * k.weighted_mean};
    return message_from_canonical(shifted);
  }

  const auto ma = detail::moments_of(in_a);
  const auto mb = detail::moments_of(in_b);
  return detail::from_moments(sign_a * ma->mean + sign_b * mb->mean,
                              ma->variance + mb->variance);
}

/// Backward rule of an addition node: message toward the addend with sign
/// `sign_target`, from the message on the sum edge and the other addend edge.
inline Message bp_addition_to_addend(const Message& in_sum,
                                     const Message& in_other,
                                     double sign_target = 1.0,
                                     double sign_other = 1.0) {
  detail::require_sign(sign_target, "bp_addition_to_addend");
  detail::require_sign(sign_other, "bp_addition_to_addend");
  if (is_uninformative(in_sum) || is_uninformative(in_other)) {
    return Uninformative{};
  }

  if (is_improper(in_sum) || is_improper(in_other)) {
    if (is_improper(in_other) || !is_point_mass(in_other)) {
      throw InferenceError(
          "addition rule: cannot convolve an improper carrier with a "
          "distributed input");
    }
    // target = sign_target*(z - sign_other*c); substitute into the carrier.
    const double c = std::get<PointMass>(in_other).value;
    const CanonicalGaussian& k = std::get<ImproperGaussian>(in_sum).stats;
    CanonicalGaussian shifted{
        k.precision,
        sign_target * (k.weighted_mean - k.precision * sign_other * c)};
    return message_from_canonical(shifted);
  }

  const auto mz = detail::moments_of(in_sum);
  const auto mo = detail::moments_of(in_other);
  return detail::from_moments(
      sign_target * (mz->mean - sign_other * mo->mean),
      mz->variance + mo->variance);
}

/// Rule of a fixed-variance Gaussian likelihood node N(out | mean_in, v):
/// the outgoing message adds v to the incoming variance. The rule is the same
/// in both directions.
inline Message bp_gaussian_node(const Message& in, double fixed_variance) {
  if (!(fixed_variance > 0.0) || !std::isfinite(fixed_variance)) {
    throw ModelError("gaussian node: fixed variance must be positive");
  }
  if (is_uninformative(in)) return Uninformative{};
  if (is_improper(in)) {
    throw InferenceError(
        "gaussian node: cannot propagate an improper carrier through a "
        "noisy link");
  }
  const auto m = detail::moments_of(in);
  return GaussianMsg{Gaussian1D(m->mean, m->variance + fixed_variance)};
}

/// Mean-field message toward a control variable of a transition
/// next = current + control + wind_mean with Gaussian noise: the
/// exponentiated expectation of the log-density under the current state
/// marginals, which is Gaussian in the control with the transition variance.
/// Depends on the marginal means only.
inline Message variational_control_message(const Message& q_state_from,
                                           const Gaussian1D& q_state_to,
                                           double wind_mean,
                                           double wind_variance) {
  if (!(wind_variance > 0.0) || !std::isfinite(wind_variance)) {
    throw ModelError("variational control rule: wind variance must be positive");
  }
  const auto from = detail::moments_of(q_state_from);
  if (!from) {
    throw InferenceError(
        "variational control rule: missing state marginal for the current "
        "state");
  }
  const double mean = q_state_to.mean() - from->mean - wind_mean;
  return GaussianMsg{Gaussian1D(mean, wind_variance)};
}

/// Stateless emission of a stored prior.
inline Message prior_message(const Gaussian1D& prior) {
  return GaussianMsg{prior};
}

}  // namespace ccmp
