#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "ccmp/gaussian.hpp"

namespace ccmp {

/// A proper Gaussian message in normalized moment form (scale factors are
/// dropped after computation).
struct GaussianMsg {
  Gaussian1D value;
};

/// Dirac message, used for clamped controls and observations.
struct PointMass {
  double value = 0.0;
};

/// Flat message; the neutral element of message products.
struct Uninformative {};

/// Non-normalizable carrier produced by message division. Multiplication
/// with it stays well-defined whenever the final belief precision is positive.
struct ImproperGaussian {
  CanonicalGaussian stats;
};

using Message = std::variant<Uninformative, GaussianMsg, PointMass, ImproperGaussian>;

inline bool is_uninformative(const Message& m) {
  return std::holds_alternative<Uninformative>(m);
}
inline bool is_gaussian(const Message& m) {
  return std::holds_alternative<GaussianMsg>(m);
}
inline bool is_point_mass(const Message& m) {
  return std::holds_alternative<PointMass>(m);
}
inline bool is_improper(const Message& m) {
  return std::holds_alternative<ImproperGaussian>(m);
}

inline const Gaussian1D& gaussian_of(const Message& m) {
  if (const auto* g = std::get_if<GaussianMsg>(&m)) return g->value;
  throw InferenceError("message is not a proper Gaussian");
}

/// Classify a division result into its message form. A pure linear tilt
/// (zero curvature, nonzero slope) carries no usable shape and is treated
/// as uninformative by all callers.
inline Message message_from_canonical(const CanonicalGaussian& c) {
  if (c.is_proper()) return GaussianMsg{c.to_gaussian()};
  if (c.is_flat() || c.is_tilt()) return Uninformative{};
  return ImproperGaussian{c};
}

/// Accumulates a product of messages. Point masses dominate Gaussian factors;
/// improper carriers combine through canonical addition and may become proper
/// again once enough precision has accumulated.
class MessageProduct {
 public:
  void multiply_by(const Message& m) {
    if (std::holds_alternative<Uninformative>(m)) return;
    if (const auto* p = std::get_if<PointMass>(&m)) {
      if (has_point_ && point_ != p->value) {
        throw InferenceError("conflicting point-mass messages in product");
      }
      has_point_ = true;
      point_ = p->value;
      return;
    }
    if (const auto* g = std::get_if<GaussianMsg>(&m)) {
      acc_.precision += g->value.precision();
      acc_.weighted_mean += g->value.weighted_mean();
      any_density_ = true;
      return;
    }
    const auto& imp = std::get<ImproperGaussian>(m);
    acc_.precision += imp.stats.precision;
    acc_.weighted_mean += imp.stats.weighted_mean;
    any_density_ = true;
  }

  /// Product with message semantics: improper results are carried, not
  /// rejected.
  [[nodiscard]] Message message() const {
    if (has_point_) return PointMass{point_};
    if (!any_density_) return Uninformative{};
    return message_from_canonical(acc_);
  }

  /// Product interpreted as a normalized belief. Requires a proper result;
  /// point masses are messages, not beliefs.
  [[nodiscard]] Gaussian1D belief() const {
    if (has_point_) {
      throw InferenceError("belief is a point mass; clamped variables have no "
                           "Gaussian belief");
    }
    if (!any_density_ || !acc_.is_proper()) {
      throw InferenceError("improper belief: total precision " +
                           std::to_string(acc_.precision) + " <= 0");
    }
    return acc_.to_gaussian();
  }

  [[nodiscard]] bool has_point_mass() const noexcept { return has_point_; }

 private:
  CanonicalGaussian acc_{0.0, 0.0};
  bool any_density_ = false;
  bool has_point_ = false;
  double point_ = 0.0;
};

inline std::string describe(const Message& m) {
  if (is_uninformative(m)) return "uninformative";
  if (const auto* p = std::get_if<PointMass>(&m)) {
    return "point-mass(" + std::to_string(p->value) + ")";
  }
  if (const auto* g = std::get_if<GaussianMsg>(&m)) {
    return "N(" + std::to_string(g->value.mean()) + ", " +
           std::to_string(g->value.variance()) + ")";
  }
  const auto& c = std::get<ImproperGaussian>(m).stats;
  return "improper(precision=" + std::to_string(c.precision) +
         ", weighted_mean=" + std::to_string(c.weighted_mean) + ")";
}

}  // namespace ccmp
