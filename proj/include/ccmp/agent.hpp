#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ccmp/graph.hpp"

namespace ccmp {

/// Fixed Gaussian prior on future states; the baseline alternative to a
/// chance constraint.
struct GoalPrior {
  double mean = 2.0;
  double variance = 0.18478;
};

using Driver = std::variant<ChanceConstraintSpec, GoalPrior>;

struct AgentConfig {
  int horizon = 1;  // lookahead steps T
  std::function<double(int)> wind_mean = [](int) { return 0.0; };
  double wind_variance = 0.2;
  double control_precision = 1e-12;  // precision of the zero-mean control prior
  Driver driver = ChanceConstraintSpec{SafeRegion{1.0, std::numeric_limits<double>::infinity()}};
  int em_max_iters = 100;
  double em_tol = 1e-6;

  void validate() const {
    if (horizon < 1) throw ModelError("AgentConfig: horizon must be >= 1");
    if (!(wind_variance > 0.0) || !std::isfinite(wind_variance)) {
      throw ModelError("AgentConfig: wind variance must be positive");
    }
    if (!(control_precision > 0.0) || !std::isfinite(control_precision)) {
      throw ModelError("AgentConfig: control precision must be positive");
    }
    if (em_max_iters < 1) throw ModelError("AgentConfig: em_max_iters must be >= 1");
    if (!(em_tol > 0.0)) throw ModelError("AgentConfig: em_tol must be positive");
    if (const auto* cc = std::get_if<ChanceConstraintSpec>(&driver)) {
      cc->validate();
    } else {
      const auto& goal = std::get<GoalPrior>(driver);
      if (!(goal.variance > 0.0) || !std::isfinite(goal.variance) ||
          !std::isfinite(goal.mean)) {
        throw ModelError("AgentConfig: goal prior must have finite mean and "
                         "positive variance");
      }
    }
  }
};

struct Policy {
  std::vector<double> actions;  // one per lookahead step
  std::vector<CorrectionDiagnostics> diagnostics;  // last sweep, one per slice
  int em_iterations = 0;
  bool converged = false;
};

/// The agent's rolled-out model: a chain of transition slices over the
/// lookahead horizon. Each slice composes the current state, the control and
/// the expected wind through two addition nodes and a fixed-variance noise
/// node; every future state carries one auxiliary driver node. The schedule
/// sweeps the chain forward then backward; the backward messages of later
/// slices warm-start from the previous sweep (uninformative on the first).
struct AgentModel {
  FactorGraph graph;
  Schedule schedule;
  MessageBoard board;                 // clamps preset, no messages yet
  std::vector<VariableId> states;     // states[0] is the observed current state
  std::vector<VariableId> controls;   // one per slice
  std::vector<FactorId> driver_nodes; // auxiliary node per future state
  std::vector<FactorId> control_priors;
  std::vector<FactorId> noise_nodes;  // the per-slice transition noise node
};

inline AgentModel build_agent_graph(const AgentConfig& config,
                                    double current_elevation,
                                    int current_time) {
  config.validate();
  if (!std::isfinite(current_elevation)) {
    throw ModelError("build_agent_graph: current elevation must be finite");
  }
  const int T = config.horizon;
  GraphBuilder b;
  AgentModel model;

  std::vector<VariableId> shifted;   // control plus transition noise
  std::vector<VariableId> drifted;   // state plus shifted control
  std::vector<VariableId> winds;     // clamped expected-wind inputs

  model.states.push_back(b.variable("x[0]"));
  for (int k = 0; k < T; ++k) {
    const std::string s = "[" + std::to_string(k) + "]";
    model.controls.push_back(b.variable("u" + s));
    shifted.push_back(b.variable("u_noisy" + s));
    drifted.push_back(b.variable("x_drift" + s));
    winds.push_back(b.variable("m_w" + s));
    model.states.push_back(b.variable("x[" + std::to_string(k + 1) + "]"));
  }

  std::vector<FactorId> state_adders, wind_adders;
  for (int k = 0; k < T; ++k) {
    model.control_priors.push_back(b.factor(PriorNode{
        model.controls[k], Gaussian1D(0.0, 1.0 / config.control_precision)}));
    model.noise_nodes.push_back(b.factor(GaussianNode{
        model.controls[k], shifted[k], config.wind_variance}));
    state_adders.push_back(b.factor(AdditionNode{
        drifted[k], model.states[k], shifted[k]}));
    wind_adders.push_back(b.factor(AdditionNode{
        model.states[k + 1], drifted[k], winds[k]}));
    if (const auto* cc = std::get_if<ChanceConstraintSpec>(&config.driver)) {
      model.driver_nodes.push_back(
          b.factor(ChanceConstraintNode{model.states[k + 1], *cc}));
    } else {
      const auto& goal = std::get<GoalPrior>(config.driver);
      model.driver_nodes.push_back(b.factor(GoalPriorNode{
          model.states[k + 1], Gaussian1D(goal.mean, goal.variance)}));
    }
  }
  model.graph = b.build();

  model.board.clamp(model.states[0], current_elevation);
  for (int k = 0; k < T; ++k) {
    model.board.clamp(winds[k], config.wind_mean(current_time + k));
    model.board.clamp(model.controls[k], 0.0);  // initial policy
  }

  const bool chance_driven =
      std::holds_alternative<ChanceConstraintSpec>(config.driver);
  auto& entries = model.schedule.entries;
  const auto tag = [](const char* name, int k) {
    return std::string(name) + "[" + std::to_string(k) + "]";
  };

  // Forward sweep: predict each future state in turn.
  for (int k = 0; k < T; ++k) {
    if (k == 0) {
      entries.push_back({RuleKind::Clamp,
                         var_to_factor(model.states[0], state_adders[0]),
                         std::nullopt, tag("fwd:state", 0)});
    }
    entries.push_back({RuleKind::Clamp,
                       var_to_factor(model.controls[k], model.noise_nodes[k]),
                       std::nullopt, tag("fwd:control", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(model.noise_nodes[k], shifted[k]),
                       std::nullopt, tag("fwd:noise", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(state_adders[k], drifted[k]),
                       std::nullopt, tag("fwd:drift", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(wind_adders[k], model.states[k + 1]),
                       std::nullopt, tag("fwd:predict", k)});
    entries.push_back({chance_driven ? RuleKind::ChanceConstraint
                                     : RuleKind::BeliefPropagation,
                       factor_to_var(model.driver_nodes[k], model.states[k + 1]),
                       std::nullopt, tag("fwd:driver", k)});
    if (k + 1 < T) {
      entries.push_back({RuleKind::BeliefPropagation,
                         var_to_factor(model.states[k + 1], state_adders[k + 1]),
                         std::nullopt, tag("fwd:carry", k)});
    }
  }

  // Backward sweep, last slice first.
  for (int k = T - 1; k >= 0; --k) {
    entries.push_back({RuleKind::BeliefPropagation,
                       var_to_factor(model.states[k + 1], model.driver_nodes[k]),
                       std::nullopt, tag("bwd:to_driver", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       var_to_factor(model.states[k + 1], wind_adders[k]),
                       std::nullopt, tag("bwd:state", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(wind_adders[k], drifted[k]),
                       std::nullopt, tag("bwd:drift", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(state_adders[k], shifted[k]),
                       std::nullopt, tag("bwd:noise", k)});
    entries.push_back({RuleKind::Variational,
                       factor_to_var(model.noise_nodes[k], model.controls[k]),
                       VariationalContext{model.states[k], model.states[k + 1],
                                          config.wind_mean(current_time + k),
                                          config.wind_variance},
                       tag("bwd:control", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(model.control_priors[k], model.controls[k]),
                       std::nullopt, tag("bwd:prior", k)});
    entries.push_back({RuleKind::BeliefPropagation,
                       factor_to_var(state_adders[k], model.states[k]),
                       std::nullopt, tag("bwd:carry", k)});
  }

  validate_schedule(model.graph, model.schedule);
  return model;
}

namespace detail {

/// Mode of the control posterior: the product of the variational message and
/// the prior message. Falls back to the variational mean if the prior side is
/// flat.
inline double control_mode(const Message& variational, const Message& prior) {
  MessageProduct product;
  product.multiply_by(variational);
  product.multiply_by(prior);
  const Message q = product.message();
  if (const auto* g = std::get_if<GaussianMsg>(&q)) return g->value.mean();
  if (const auto* g = std::get_if<GaussianMsg>(&variational)) {
    return g->value.mean();
  }
  throw InferenceError("control posterior has no mode: " + describe(q));
}

}  // namespace detail

/// Expectation-maximization over the rolled-out model: clamp the controls to
/// the previous actions, sweep the schedule, re-estimate each action as the
/// mode of its control posterior; stop when the action sup-norm change falls
/// below em_tol. Returns best-so-far with converged=false on hitting the
/// iteration cap.
inline Policy infer_policy(const AgentConfig& config, double elevation,
                           int time) {
  AgentModel model = build_agent_graph(config, elevation, time);
  const int T = config.horizon;
  Policy policy;
  policy.actions.assign(T, 0.0);

  for (int iter = 1; iter <= config.em_max_iters; ++iter) {
    for (int k = 0; k < T; ++k) {
      model.board.clamp(model.controls[k], policy.actions[k]);
    }
    const ScheduleReport report =
        run_schedule(model.graph, model.board, model.schedule);

    policy.diagnostics.clear();
    for (const auto& event : report.chance_events) {
      policy.diagnostics.push_back(event.diagnostics);
    }

    double max_change = 0.0;
    for (int k = 0; k < T; ++k) {
      const Message mu_f =
          model.board.get(factor_to_var(model.noise_nodes[k], model.controls[k]));
      const Message mu_g = model.board.get(
          factor_to_var(model.control_priors[k], model.controls[k]));
      const double a = detail::control_mode(mu_f, mu_g);
      max_change = std::max(max_change, std::abs(a - policy.actions[k]));
      policy.actions[k] = a;
    }
    policy.em_iterations = iter;
    if (max_change < config.em_tol) {
      policy.converged = true;
      break;
    }
  }
  return policy;
}

struct ControlLawPoint {
  double elevation = 0.0;
  double action = 0.0;
  bool ok = false;
  bool converged = false;
  std::string error;
};

/// Default evaluation grid for control laws.
inline std::vector<double> control_grid(double lo = 0.0, double hi = 5.0,
                                        double step = 0.01) {
  std::vector<double> grid;
  if (!(step > 0.0)) throw ModelError("control_grid: step must be positive");
  for (double x = lo; x <= hi + 0.5 * step; x += step) grid.push_back(x);
  return grid;
}

/// First action of the inferred policy as a function of the current
/// elevation, with the expected wind fixed to zero. Failures are recorded
/// per point; the sweep continues.
inline std::vector<ControlLawPoint> control_law(
    const AgentConfig& config, const std::vector<double>& elevations,
    int time = 0) {
  AgentConfig zero_wind = config;
  zero_wind.wind_mean = [](int) { return 0.0; };
  zero_wind.validate();

  std::vector<ControlLawPoint> law;
  law.reserve(elevations.size());
  for (const double x : elevations) {
    ControlLawPoint point;
    point.elevation = x;
    try {
      const Policy policy = infer_policy(zero_wind, x, time);
      point.action = policy.actions.at(0);
      point.converged = policy.converged;
      point.ok = true;
    } catch (const Error& err) {
      point.error = err.what();
    }
    law.push_back(point);
  }
  return law;
}

}  // namespace ccmp
