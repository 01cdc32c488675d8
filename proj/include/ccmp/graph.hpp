#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ccmp/chance_constraint.hpp"
#include "ccmp/gaussian.hpp"
#include "ccmp/message.hpp"
#include "ccmp/rules.hpp"

namespace ccmp {

struct VariableId {
  std::uint32_t value = 0;
  auto operator<=>(const VariableId&) const = default;
};

struct FactorId {
  std::uint32_t value = 0;
  auto operator<=>(const FactorId&) const = default;
};

// ---------------------------------------------------------------------------
// Node kinds. Each kind names the variables it touches; edges are derived
// from these references, so arity is enforced structurally.
// ---------------------------------------------------------------------------

/// sum = sign_a * addend_a + sign_b * addend_b  (three edges)
struct AdditionNode {
  VariableId sum;
  VariableId addend_a;
  VariableId addend_b;
  double sign_a = 1.0;
  double sign_b = 1.0;
};

/// N(output | mean_input, variance)  (two edges; the variance is a parameter)
struct GaussianNode {
  VariableId mean_input;
  VariableId output;
  double variance = 1.0;
};

struct PriorNode {
  VariableId target;
  Gaussian1D prior;
};

/// Emits the clamp value of its variable as a point mass.
struct PointMassInput {
  VariableId target;
};

struct ChanceConstraintNode {
  VariableId target;
  ChanceConstraintSpec spec;
};

struct GoalPriorNode {
  VariableId target;
  Gaussian1D prior;
};

using NodeKind = std::variant<AdditionNode, GaussianNode, PriorNode,
                              PointMassInput, ChanceConstraintNode,
                              GoalPriorNode>;

inline std::vector<VariableId> variables_of_kind(const NodeKind& kind) {
  return std::visit(
      [](const auto& node) -> std::vector<VariableId> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, AdditionNode>) {
          return {node.sum, node.addend_a, node.addend_b};
        } else if constexpr (std::is_same_v<T, GaussianNode>) {
          return {node.mean_input, node.output};
        } else {
          return {node.target};
        }
      },
      kind);
}

// ---------------------------------------------------------------------------
// Bipartite factor graph. Static after build; runtime values (clamps,
// messages) live on the MessageBoard.
// ---------------------------------------------------------------------------

class FactorGraph {
 public:
  [[nodiscard]] std::size_t variable_count() const { return variable_labels_.size(); }
  [[nodiscard]] std::size_t factor_count() const { return factors_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edge_count_; }

  [[nodiscard]] const NodeKind& kind(FactorId f) const { return factors_.at(f.value); }
  [[nodiscard]] const std::string& label(VariableId v) const {
    return variable_labels_.at(v.value);
  }

  /// Factor neighborhood of a variable.
  [[nodiscard]] const std::vector<FactorId>& factors_of(VariableId v) const {
    return var_neighbors_.at(v.value);
  }
  /// Variable neighborhood of a factor.
  [[nodiscard]] const std::vector<VariableId>& variables_of(FactorId f) const {
    return factor_neighbors_.at(f.value);
  }
  [[nodiscard]] std::size_t degree(VariableId v) const {
    return factors_of(v).size();
  }

  [[nodiscard]] bool adjacent(VariableId v, FactorId f) const {
    for (const FactorId g : factors_of(v)) {
      if (g == f) return true;
    }
    return false;
  }

 private:
  friend class GraphBuilder;
  std::vector<std::string> variable_labels_;
  std::vector<NodeKind> factors_;
  std::vector<std::vector<FactorId>> var_neighbors_;
  std::vector<std::vector<VariableId>> factor_neighbors_;
  std::size_t edge_count_ = 0;
};

class GraphBuilder {
 public:
  VariableId variable(std::string label = {}) {
    if (label.empty()) label = "x" + std::to_string(labels_.size());
    labels_.push_back(std::move(label));
    return VariableId{static_cast<std::uint32_t>(labels_.size() - 1)};
  }

  FactorId factor(NodeKind kind) {
    kinds_.push_back(std::move(kind));
    return FactorId{static_cast<std::uint32_t>(kinds_.size() - 1)};
  }

  /// Validates and assembles the graph: every referenced variable must exist
  /// and no factor may touch the same variable twice.
  [[nodiscard]] FactorGraph build() const {
    FactorGraph g;
    g.variable_labels_ = labels_;
    g.factors_ = kinds_;
    g.var_neighbors_.resize(labels_.size());
    g.factor_neighbors_.resize(kinds_.size());
    for (std::size_t fi = 0; fi < kinds_.size(); ++fi) {
      const FactorId f{static_cast<std::uint32_t>(fi)};
      std::vector<VariableId> vars = variables_of_kind(kinds_[fi]);
      for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].value >= labels_.size()) {
          throw ModelError("graph: factor " + std::to_string(fi) +
                           " references unknown variable id " +
                           std::to_string(vars[i].value));
        }
        for (std::size_t j = i + 1; j < vars.size(); ++j) {
          if (vars[i] == vars[j]) {
            throw ModelError("graph: factor " + std::to_string(fi) +
                             " touches variable '" + labels_[vars[i].value] +
                             "' twice");
          }
        }
        g.var_neighbors_[vars[i].value].push_back(f);
        ++g.edge_count_;
      }
      g.factor_neighbors_[fi] = std::move(vars);
    }
    for (const NodeKind& k : kinds_) {
      if (const auto* cc = std::get_if<ChanceConstraintNode>(&k)) {
        cc->spec.validate();
      }
    }
    return g;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<NodeKind> kinds_;
};

// ---------------------------------------------------------------------------
// Directed edges and the message board.
// ---------------------------------------------------------------------------

struct Endpoint {
  enum class Kind : std::uint8_t { Variable, Factor };
  Kind kind = Kind::Variable;
  std::uint32_t id = 0;
  auto operator<=>(const Endpoint&) const = default;
};

struct DirectedEdge {
  Endpoint from;
  Endpoint to;
  auto operator<=>(const DirectedEdge&) const = default;
};

inline DirectedEdge var_to_factor(VariableId v, FactorId f) {
  return {{Endpoint::Kind::Variable, v.value}, {Endpoint::Kind::Factor, f.value}};
}
inline DirectedEdge factor_to_var(FactorId f, VariableId v) {
  return {{Endpoint::Kind::Factor, f.value}, {Endpoint::Kind::Variable, v.value}};
}

/// Mutable runtime state: one current message per directed edge (unset edges
/// read as uninformative) plus the clamp assignment for observed variables
/// and fixed inputs. The graph itself stays immutable.
class MessageBoard {
 public:
  [[nodiscard]] Message get(const DirectedEdge& e) const {
    const auto it = messages_.find(e);
    if (it == messages_.end()) return Uninformative{};
    return it->second;
  }
  [[nodiscard]] bool has(const DirectedEdge& e) const {
    return messages_.count(e) > 0;
  }
  void set(const DirectedEdge& e, Message m) { messages_[e] = std::move(m); }
  void clear_messages() { messages_.clear(); }
  [[nodiscard]] std::size_t message_count() const { return messages_.size(); }

  void clamp(VariableId v, double value) { clamps_[v] = value; }
  [[nodiscard]] std::optional<double> clamp_value(VariableId v) const {
    const auto it = clamps_.find(v);
    if (it == clamps_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<DirectedEdge, Message> messages_;
  std::map<VariableId, double> clamps_;
};

// ---------------------------------------------------------------------------
// Schedules: explicit, ordered computation plans.
// ---------------------------------------------------------------------------

enum class RuleKind : std::uint8_t {
  BeliefPropagation,
  Variational,
  ChanceConstraint,
  Clamp,
};

/// Extra inputs of the variational control rule: the transition's state
/// endpoints and parameters.
struct VariationalContext {
  VariableId state_from;
  VariableId state_to;
  double wind_mean = 0.0;
  double wind_variance = 1.0;
};

struct ScheduleEntry {
  RuleKind rule = RuleKind::BeliefPropagation;
  DirectedEdge edge;
  std::optional<VariationalContext> variational;
  std::string label;  // provenance within the sweep, e.g. "fwd:predict[0]"
};

struct Schedule {
  std::vector<ScheduleEntry> entries;
};

/// Diagnostics produced by one run of a schedule.
struct ScheduleReport {
  struct ChanceEvent {
    std::size_t entry_index = 0;
    VariableId variable;
    CorrectionDiagnostics diagnostics;
  };
  std::vector<ChanceEvent> chance_events;
};

// ---------------------------------------------------------------------------
// Belief and schedule execution.
// ---------------------------------------------------------------------------

/// Normalized product of all factor-to-variable messages arriving at `j`.
/// Unset edges contribute nothing; the product must be proper.
inline Gaussian1D variable_belief(const FactorGraph& graph,
                                  const MessageBoard& board, VariableId j) {
  MessageProduct product;
  for (const FactorId f : graph.factors_of(j)) {
    product.multiply_by(board.get(factor_to_var(f, j)));
  }
  return product.belief();
}

namespace detail {

/// Variable-to-factor message resolved against the board: an explicitly
/// scheduled message wins, then a clamp on the source variable, then the
/// implicit product of the other incident factor-to-variable messages.
inline Message resolve_var_to_factor(const FactorGraph& graph,
                                     const MessageBoard& board, VariableId v,
                                     FactorId except) {
  const DirectedEdge e = var_to_factor(v, except);
  if (board.has(e)) return board.get(e);
  if (const auto clamp = board.clamp_value(v)) return PointMass{*clamp};
  MessageProduct product;
  for (const FactorId f : graph.factors_of(v)) {
    if (f == except) continue;
    product.multiply_by(board.get(factor_to_var(f, v)));
  }
  return product.message();
}

inline Message state_marginal(const FactorGraph& graph,
                              const MessageBoard& board, VariableId v) {
  if (const auto clamp = board.clamp_value(v)) return PointMass{*clamp};
  return GaussianMsg{variable_belief(graph, board, v)};
}

inline Message factor_to_var_update(const FactorGraph& graph,
                                    const MessageBoard& board, FactorId f,
                                    VariableId target) {
  const NodeKind& kind = graph.kind(f);
  if (const auto* add = std::get_if<AdditionNode>(&kind)) {
    const auto in = [&](VariableId v) {
      return resolve_var_to_factor(graph, board, v, f);
    };
    if (target == add->sum) {
      return bp_addition_to_sum(in(add->addend_a), in(add->addend_b),
                                add->sign_a, add->sign_b);
    }
    if (target == add->addend_a) {
      return bp_addition_to_addend(in(add->sum), in(add->addend_b),
                                   add->sign_a, add->sign_b);
    }
    if (target == add->addend_b) {
      return bp_addition_to_addend(in(add->sum), in(add->addend_a),
                                   add->sign_b, add->sign_a);
    }
    throw ModelError("schedule: addition node is not adjacent to the target");
  }
  if (const auto* gn = std::get_if<GaussianNode>(&kind)) {
    const VariableId source =
        (target == gn->output) ? gn->mean_input : gn->output;
    if (target != gn->output && target != gn->mean_input) {
      throw ModelError("schedule: gaussian node is not adjacent to the target");
    }
    return bp_gaussian_node(resolve_var_to_factor(graph, board, source, f),
                            gn->variance);
  }
  if (const auto* prior = std::get_if<PriorNode>(&kind)) {
    return prior_message(prior->prior);
  }
  if (const auto* goal = std::get_if<GoalPriorNode>(&kind)) {
    return prior_message(goal->prior);
  }
  if (const auto* pin = std::get_if<PointMassInput>(&kind)) {
    const auto clamp = board.clamp_value(pin->target);
    if (!clamp) {
      throw InferenceError("point-mass input: variable '" +
                           graph.label(pin->target) + "' has no clamp value");
    }
    return PointMass{*clamp};
  }
  throw ModelError(
      "schedule: chance-constraint nodes must be scheduled with the "
      "chance-constraint rule");
}

}  // namespace detail

/// Structural validation: every entry's edge must exist in the graph and its
/// rule must be applicable to the node kind it touches.
inline void validate_schedule(const FactorGraph& graph, const Schedule& schedule) {
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const ScheduleEntry& entry = schedule.entries[i];
    const auto fail = [&](const std::string& why) {
      throw ModelError("schedule entry " + std::to_string(i) + " (" +
                       entry.label + "): " + why);
    };
    const Endpoint& from = entry.edge.from;
    const Endpoint& to = entry.edge.to;
    if (from.kind == to.kind) fail("edge must join a variable and a factor");
    const VariableId v{from.kind == Endpoint::Kind::Variable ? from.id : to.id};
    const FactorId f{from.kind == Endpoint::Kind::Factor ? from.id : to.id};
    if (v.value >= graph.variable_count() || f.value >= graph.factor_count()) {
      fail("edge endpoint out of range");
    }
    if (!graph.adjacent(v, f)) fail("edge is not part of the graph");
    switch (entry.rule) {
      case RuleKind::Clamp:
        if (from.kind != Endpoint::Kind::Variable) {
          fail("clamp entries write variable-to-factor edges");
        }
        break;
      case RuleKind::Variational:
        if (!entry.variational) fail("variational entry lacks its context");
        if (from.kind != Endpoint::Kind::Factor) {
          fail("variational entries write factor-to-variable edges");
        }
        break;
      case RuleKind::ChanceConstraint:
        if (from.kind != Endpoint::Kind::Factor ||
            !std::holds_alternative<ChanceConstraintNode>(graph.kind(f))) {
          fail("chance entries must leave a chance-constraint node");
        }
        break;
      case RuleKind::BeliefPropagation:
        if (from.kind == Endpoint::Kind::Factor &&
            std::holds_alternative<ChanceConstraintNode>(graph.kind(f))) {
          fail("chance-constraint nodes use the chance-constraint rule");
        }
        break;
    }
  }
}

/// Executes the entries in order, writing each computed message to the board.
/// Messages are stored in normalized form (scales dropped). Rule failures are
/// rethrown annotated with the schedule position.
inline ScheduleReport run_schedule(const FactorGraph& graph, MessageBoard& board,
                                   const Schedule& schedule) {
  ScheduleReport report;
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const ScheduleEntry& entry = schedule.entries[i];
    try {
      switch (entry.rule) {
        case RuleKind::Clamp: {
          const VariableId v{entry.edge.from.id};
          const auto clamp = board.clamp_value(v);
          if (!clamp) {
            throw InferenceError("no clamp value for variable '" +
                                 graph.label(v) + "'");
          }
          board.set(entry.edge, PointMass{*clamp});
          break;
        }
        case RuleKind::BeliefPropagation: {
          if (entry.edge.from.kind == Endpoint::Kind::Variable) {
            const VariableId v{entry.edge.from.id};
            const FactorId f{entry.edge.to.id};
            MessageProduct product;
            for (const FactorId g : graph.factors_of(v)) {
              if (g == f) continue;
              product.multiply_by(board.get(factor_to_var(g, v)));
            }
            board.set(entry.edge, product.message());
          } else {
            const FactorId f{entry.edge.from.id};
            const VariableId v{entry.edge.to.id};
            board.set(entry.edge,
                      detail::factor_to_var_update(graph, board, f, v));
          }
          break;
        }
        case RuleKind::Variational: {
          const VariationalContext& ctx = *entry.variational;
          const Message from =
              detail::state_marginal(graph, board, ctx.state_from);
          const Gaussian1D to =
              variable_belief(graph, board, ctx.state_to);
          board.set(entry.edge,
                    variational_control_message(from, to, ctx.wind_mean,
                                                ctx.wind_variance));
          break;
        }
        case RuleKind::ChanceConstraint: {
          const FactorId f{entry.edge.from.id};
          const VariableId v{entry.edge.to.id};
          const auto& node = std::get<ChanceConstraintNode>(graph.kind(f));
          // Inbound: product of the variable's other incident messages.
          MessageProduct product;
          for (const FactorId g : graph.factors_of(v)) {
            if (g == f) continue;
            product.multiply_by(board.get(factor_to_var(g, v)));
          }
          auto [outbound, diag] = chance_message(product.message(), node.spec);
          board.set(entry.edge, std::move(outbound));
          report.chance_events.push_back({i, v, diag});
          break;
        }
      }
    } catch (const ChanceConstraintError& err) {
      throw ChanceConstraintError("schedule entry " + std::to_string(i) + " (" +
                                      entry.label + "): " + err.what(),
                                  err.diagnostics);
    } catch (const Error& err) {
      throw InferenceError("schedule entry " + std::to_string(i) + " (" +
                           entry.label + "): " + err.what());
    }
  }
  return report;
}

}  // namespace ccmp
