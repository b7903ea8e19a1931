// Brute-force oracles and the built-in self-check suite.
//
// The oracles here never use backward_induction's value tables. They work
// directly from the reward function and the model rows, by exhaustive search
// over action/outcome histories (expectimax) or over every deterministic
// Markov policy.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ndg/core.hpp"
#include "ndg/engine.hpp"
#include "ndg/opponent.hpp"
#include "ndg/planner.hpp"

namespace ndg {

/// Model whose rows are drawn from a flat Dirichlet using `rng`.
inline DemandModel random_model(int q, Rng& rng) {
  DemandModel m(q);
  for (int s = 0; s < num_states(q); ++s) {
    auto row = m.row(s);
    double total = 0.0;
    for (double& p : row) {
      p = -std::log(1.0 - uniform01(rng));
      total += p;
    }
    for (double& p : row) p /= total;
  }
  return m;
}

/// Maximum expected h-step reward from `start` over every deterministic
/// history-dependent policy, by full enumeration of the decision tree.
inline double expectimax_value(const DemandModel& model, double omega, int h,
                               const JointState& start) {
  const int q = model.q();
  const int n = num_demands(q);
  std::function<double(int, const JointState&)> rec = [&](int steps,
                                                          const JointState& s) -> double {
    if (steps == 0) return 0.0;
    const auto p = model.row(s);
    double best = -INFINITY;
    for (int a = 1; a <= n; ++a) {
      double v = 0.0;
      for (int b = 1; b <= n; ++b) {
        const double pb = p[static_cast<std::size_t>(b - 1)];
        v += pb * (reward(Demand(a), Demand(b), omega, q) +
                   rec(steps - 1, JointState{Demand(a), Demand(b)}));
      }
      best = std::max(best, v);
    }
    return best;
  };
  return rec(h, start);
}

/// A policy that may depend on the number of steps to go.
using StagePolicy = std::function<Demand(int steps_to_go, const JointState&)>;

/// Exact expected h-step reward of `policy` from `start`, by enumerating
/// every outcome sequence.
inline double evaluate_policy(const DemandModel& model, double omega, int h,
                              const JointState& start, const StagePolicy& policy) {
  const int q = model.q();
  const int n = num_demands(q);
  std::function<double(int, const JointState&)> rec = [&](int steps,
                                                          const JointState& s) -> double {
    if (steps == 0) return 0.0;
    const Demand a = policy(steps, s);
    const auto p = model.row(s);
    double v = 0.0;
    for (int b = 1; b <= n; ++b)
      v += p[static_cast<std::size_t>(b - 1)] *
           (reward(a, Demand(b), omega, q) + rec(steps - 1, JointState{a, Demand(b)}));
    return v;
  };
  return rec(h, start);
}

/// The dynamic-programming policy: with k steps to go, play the first-stage
/// rule of the k-step plan.
inline StagePolicy dp_policy(const DemandModel& model, double omega, int h) {
  std::vector<DecisionRule> rules;
  for (int k = 1; k <= h; ++k) rules.push_back(backward_induction(model, omega, k).rule);
  return [rules = std::move(rules)](int steps, const JointState& s) {
    return rules[static_cast<std::size_t>(steps - 1)].action(s);
  };
}

/// Maximum expected h-step reward from `start` over every deterministic
/// Markov policy (one state-to-demand map per stage). Only feasible for tiny
/// problems: there are (q-1)^((q-1)^2 h) such policies.
inline double markov_enumeration_value(const DemandModel& model, double omega, int h,
                                       const JointState& start) {
  const int q = model.q();
  const int n = num_demands(q);
  const int states = num_states(q);
  const double count = std::pow(static_cast<double>(n), static_cast<double>(states * h));
  if (count > 5e6) throw InputError("markov_enumeration_value: problem too large");

  std::vector<int> digits(static_cast<std::size_t>(states * h), 0);
  double best = -INFINITY;
  for (;;) {
    const StagePolicy policy = [&](int steps, const JointState& s) {
      return Demand(digits[static_cast<std::size_t>((steps - 1) * states + state_index(s, q))] + 1);
    };
    best = std::max(best, evaluate_policy(model, omega, h, start, policy));
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == n) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Self-check suite

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// DP against expectimax over q in {3..6}, h in {1,2,3}, omega in
/// {0, 0.5, 1} and `models_per_case` random models, from every start state.
/// Returns the worst absolute gap.
inline double dp_oracle_gap(int models_per_case, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int q = 3; q <= 6; ++q)
    for (int h = 1; h <= 3; ++h)
      for (double omega : {0.0, 0.5, 1.0})
        for (int m = 0; m < models_per_case; ++m) {
          const DemandModel model = random_model(q, rng);
          const StagePolicy policy = dp_policy(model, omega, h);
          for (int s = 0; s < num_states(q); ++s) {
            const JointState start = state_at(s, q);
            const double dp = evaluate_policy(model, omega, h, start, policy);
            const double brute = expectimax_value(model, omega, h, start);
            worst = std::max(worst, std::abs(dp - brute));
          }
        }
  return worst;
}

/// Largest normalization error over every model kind the library builds.
inline double normalization_error(int q) {
  double worst = uniform_table(q).max_normalization_error();
  for (double sigma : {0.5, 1.0, 3.0})
    for (Role r : {Role::A, Role::B}) {
      worst = std::max(worst, heuristic_table(HeuristicModel{sigma, q}, r).max_normalization_error());
      worst = std::max(worst, make_prior(HeuristicPrior{sigma, r}, q).table().max_normalization_error());
    }
  worst = std::max(worst, make_prior(UniformPrior{}, q).table().max_normalization_error());
  return worst;
}

/// Largest deviation of reward() from a - omega (q - b) on compatible pairs.
inline double reward_identity_gap(int q) {
  double worst = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double omega = i / 10.0;
    for (int a = 1; a < q; ++a)
      for (int b = 1; b < q; ++b)
        if (a + b <= q)
          worst = std::max(worst, std::abs(reward(Demand(a), Demand(b), omega, q) -
                                           (a - omega * (q - b))));
  }
  return worst;
}

inline std::vector<CheckResult> run_self_checks() {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  const double gap = dp_oracle_gap(3, 20240601);
  add("dp-vs-brute-force", gap <= 1e-9, "max gap " + format_double(gap));

  double norm = 0.0;
  for (int q : {4, 10}) norm = std::max(norm, normalization_error(q));
  add("normalization", norm <= 1e-12, "max |sum-1| " + format_double(norm));

  const double ident = reward_identity_gap(10);
  add("reward-identity", ident <= 1e-12, "max gap " + format_double(ident));

  {
    GameConfig cfg;
    Player a = MdpAgent(Role::A, 0.3, cfg.horizon, uniform_table(cfg.q));
    Player b = MdpAgent(Role::B, 0.8, cfg.horizon, uniform_table(cfg.q));
    const GameLog log = run_game(cfg, a, b, RngPlan{1});
    const bool ok = log.cum_profit_a == 298 && log.cum_profit_b == 298 &&
                    log.compatible_rounds() == cfg.rounds;
    add("uniform-anchor", ok,
        std::to_string(log.cum_profit_a) + "/" + std::to_string(log.cum_profit_b));
  }

  {
    bool ok = true;
    GameConfig cfg;
    cfg.rounds = 200;
    Player a = MdpAgent(Role::A, 0.5, 3, make_prior(UniformPrior{}, cfg.q));
    Player b = HeuristicAgent(Role::B, HeuristicModel{1.0, cfg.q});
    const GameLog log = run_game(cfg, a, b, RngPlan{3});
    for (const auto& r : log.records) {
      const bool conserved =
          r.compatible ? r.profit_a + r.profit_b + r.unclaimed == cfg.q
                       : r.profit_a == 0 && r.profit_b == 0 && r.unclaimed == cfg.q;
      ok = ok && conserved;
    }
    add("conservation", ok, std::to_string(log.records.size()) + " rounds");
  }
  return out;
}

}  // namespace ndg
