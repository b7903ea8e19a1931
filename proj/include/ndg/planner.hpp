// Finite-horizon planning against an opponent model.
//
// A planner always works in the player's own perspective: the state is
// (own previous demand, opponent's previous demand), the player picks its
// demand a, the opponent's demand b is drawn from the model row of the
// current state, and the next state is (a, b). The reward of a round is
// reward(a, b, omega, q) and the value recursion is
//
//   V_0(s) = 0
//   Q_k(s, a) = sum_b p(b | s) [reward(a, b) + V_{k-1}((a, b))]
//   V_k(s) = max_a Q_k(s, a)
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <ostream>
#include <variant>
#include <vector>

#include "ndg/core.hpp"
#include "ndg/opponent.hpp"

namespace ndg {

enum class TieBreak { Smallest, Random };

/// Two Q values closer than this (relative to the larger magnitude) are
/// treated as tied.
inline constexpr double kTieTolerance = 1e-12;

/// V_k(s) for k = 0..h in the planner's own perspective.
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(int q, int horizon)
      : q_(q), horizon_(horizon),
        values_(static_cast<std::size_t>((horizon + 1) * num_states(q)), 0.0) {}

  int q() const { return q_; }
  int horizon() const { return horizon_; }

  double operator()(int stage, int state) const {
    return values_[static_cast<std::size_t>(stage * num_states(q_) + state)];
  }
  double& operator()(int stage, int state) {
    return values_[static_cast<std::size_t>(stage * num_states(q_) + state)];
  }
  double at(int stage, const JointState& s) const { return (*this)(stage, state_index(s, q_)); }

 private:
  int q_ = 0;
  int horizon_ = 0;
  std::vector<double> values_;
};

/// First-stage decision rule. Keeps every maximizing demand per state so a
/// caller can break ties either deterministically or at random.
class DecisionRule {
 public:
  DecisionRule() = default;
  explicit DecisionRule(int q) : q_(q), optimal_(static_cast<std::size_t>(num_states(q))) {}

  int q() const { return q_; }

  /// Smallest maximizing demand.
  Demand action(const JointState& s) const { return optimal(s).front(); }

  const std::vector<Demand>& optimal(const JointState& s) const {
    return optimal_[static_cast<std::size_t>(state_index(s, q_))];
  }
  std::vector<Demand>& optimal(int state) { return optimal_[static_cast<std::size_t>(state)]; }

  Demand choose(const JointState& s, TieBreak mode, Rng* rng) const {
    const auto& best = optimal(s);
    if (mode == TieBreak::Smallest || best.size() == 1 || rng == nullptr) return best.front();
    auto pick = static_cast<std::size_t>(uniform01(*rng) * static_cast<double>(best.size()));
    return best[std::min(pick, best.size() - 1)];
  }

 private:
  int q_ = 0;
  std::vector<std::vector<Demand>> optimal_;
};

struct Plan {
  ValueTable values;
  DecisionRule rule;
};

/// reward(a, b, omega, q) for every pair, row-major in a.
inline std::vector<double> reward_matrix(double omega, int q) {
  const int n = num_demands(q);
  std::vector<double> r(static_cast<std::size_t>(n * n));
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      r[static_cast<std::size_t>((a - 1) * n + (b - 1))] = reward(Demand(a), Demand(b), omega, q);
  return r;
}

/// Solves the h-stage problem by backward induction for an arbitrary
/// per-round reward table `rewards[(a-1)(q-1) + (b-1)]`. `model` is indexed
/// in the planner's own perspective and gives the opponent's next demand.
inline Plan backward_induction(const DemandModel& model, std::span<const double> rewards,
                               int horizon) {
  const int q = model.q();
  if (q < 2) throw InputError("model has no states");
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (static_cast<int>(rewards.size()) != num_states(q))
    throw InputError("reward table has the wrong size");
  if (!(model.max_normalization_error() <= 1e-9))
    throw InputError("opponent model has a row that is not a distribution");

  const int n = num_demands(q);
  const int states = num_states(q);

  Plan plan{ValueTable(q, horizon), DecisionRule(q)};
  // g(a, b) = reward(a, b) + V_{k-1}((a, b)); the next-state index of (a, b)
  // is exactly the row-major pair index, so g shares the reward layout.
  std::vector<double> g(rewards.size());
  std::vector<double> qvals(static_cast<std::size_t>(n));

  for (int k = 1; k <= horizon; ++k) {
    for (int idx = 0; idx < n * n; ++idx)
      g[static_cast<std::size_t>(idx)] =
          rewards[static_cast<std::size_t>(idx)] + plan.values(k - 1, idx);

    for (int s = 0; s < states; ++s) {
      const auto p = model.row(s);
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < n; ++a) {
        const double* ga = g.data() + static_cast<std::size_t>(a * n);
        double acc = 0.0;
        for (int b = 0; b < n; ++b) acc += p[static_cast<std::size_t>(b)] * ga[b];
        qvals[static_cast<std::size_t>(a)] = acc;
        best = std::max(best, acc);
      }
      plan.values(k, s) = best;
      if (k == horizon) {
        const double tol = kTieTolerance * std::max(1.0, std::abs(best));
        auto& opt = plan.rule.optimal(s);
        for (int a = 0; a < n; ++a)
          if (best - qvals[static_cast<std::size_t>(a)] <= tol) opt.emplace_back(a + 1);
      }
    }
  }
  return plan;
}

/// Backward induction with the indirect-negotiation reward at weight omega.
inline Plan backward_induction(const DemandModel& model, double omega, int horizon) {
  if (model.q() < 2) throw InputError("model has no states");
  return backward_induction(model, reward_matrix(omega, model.q()), horizon);
}

inline void write_value_table(std::ostream& out, const ValueTable& v) {
  out << "stage,prev_a,prev_b,value\n";
  out.precision(17);
  for (int k = 0; k <= v.horizon(); ++k)
    for (int i = 0; i < num_states(v.q()); ++i) {
      const JointState s = state_at(i, v.q());
      out << k << ',' << s.prev_a.value << ',' << s.prev_b.value << ',' << v(k, i) << '\n';
    }
}

inline void write_decision_rule(std::ostream& out, const DecisionRule& rule) {
  out << "prev_a,prev_b,action\n";
  for (int i = 0; i < num_states(rule.q()); ++i) {
    const JointState s = state_at(i, rule.q());
    out << s.prev_a.value << ',' << s.prev_b.value << ',' << rule.action(s).value << '\n';
  }
}

// ---------------------------------------------------------------------------
// Receding-horizon MDP agent

/// MDP player. Its opponent model is held in table coordinates
/// (prev_a, prev_b) and predicts the opponent's demand; the agent converts
/// to its own perspective before planning. A learning agent re-plans every
/// round from the current posterior mean; a fixed-model agent plans once.
class MdpAgent {
 public:
  MdpAgent(Role role, double omega, int horizon, DemandModel fixed_model,
           TieBreak tie_break = TieBreak::Smallest)
      : role_(role), omega_(omega), horizon_(horizon), q_(fixed_model.q()),
        model_(std::move(fixed_model)), tie_break_(tie_break) {
    check();
  }

  MdpAgent(Role role, double omega, int horizon, DirichletLearner learner,
           TieBreak tie_break = TieBreak::Smallest)
      : role_(role), omega_(omega), horizon_(horizon), q_(learner.q()),
        model_(std::move(learner)), tie_break_(tie_break) {
    check();
  }

  Role role() const { return role_; }
  double omega() const { return omega_; }
  int horizon() const { return horizon_; }
  bool learning() const { return std::holds_alternative<DirichletLearner>(model_); }

  const DirichletLearner* learner() const { return std::get_if<DirichletLearner>(&model_); }

  /// Opponent model currently used for planning, in table coordinates.
  DemandModel current_model() const {
    if (const auto* l = learner()) return l->table();
    return std::get<DemandModel>(model_);
  }

  /// Plan in the agent's own perspective for the current model.
  Plan plan() const {
    DemandModel m = current_model();
    if (role_ == Role::B) m = m.swapped();
    return backward_induction(m, omega_, horizon_);
  }

  /// Chooses this round's demand given the previous round's pair.
  /// `rng` is only consulted for random tie-breaking.
  Demand act(const JointState& s, Rng* rng = nullptr) {
    check_state(s, q_);
    if (learning() || !cached_) cached_ = plan().rule;
    return cached_->choose(s.perspective(role_), tie_break_, rng);
  }

  /// Feeds the opponent's demand, played from state `s`, to the learner.
  void observe(const JointState& s, Demand opponent_demand) {
    if (auto* l = std::get_if<DirichletLearner>(&model_)) l->update(s, opponent_demand);
  }

 private:
  void check() const {
    if (!(omega_ >= 0.0 && omega_ <= 1.0)) throw InputError("omega must lie in [0,1]");
    if (horizon_ < 1) throw InputError("horizon must be >= 1");
  }

  Role role_;
  double omega_;
  int horizon_;
  int q_;
  std::variant<DemandModel, DirichletLearner> model_;
  TieBreak tie_break_;
  std::optional<DecisionRule> cached_;
};

}  // namespace ndg
