// Models of the other player's next demand.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ndg/core.hpp"

namespace ndg {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw, so the
/// value sequence does not depend on the standard library's distributions.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Probability of each demand 1..q-1; probs[d-1] belongs to demand d.
struct DemandDistribution {
  std::vector<double> probs;

  int q() const { return static_cast<int>(probs.size()) + 1; }
  double p(Demand d) const { return probs.at(static_cast<std::size_t>(d.value - 1)); }
  double sum() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) m += static_cast<double>(i + 1) * probs[i];
    return m;
  }
};

inline double l1_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("l1_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += std::abs(x[i] - y[i]);
  return d;
}

/// Inverse-CDF draw over the support 1..q-1.
inline Demand sample(const DemandDistribution& dist, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 1;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    if (dist.probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i) + 1;
    acc += dist.probs[i];
    if (u < acc) return Demand(last_positive);
  }
  // u landed in the rounding slack above the accumulated mass.
  return Demand(last_positive);
}

/// Conditional table p(next opponent demand | JointState) for every state.
/// Rows are stored in state_index order; a row is a DemandDistribution.
class DemandModel {
 public:
  DemandModel() = default;
  explicit DemandModel(int q)
      : q_(q), probs_(static_cast<std::size_t>(num_states(q) * num_demands(q)), 0.0) {}

  int q() const { return q_; }

  std::span<const double> row(int state) const {
    return {probs_.data() + static_cast<std::size_t>(state * num_demands(q_)),
            static_cast<std::size_t>(num_demands(q_))};
  }
  std::span<double> row(int state) {
    return {probs_.data() + static_cast<std::size_t>(state * num_demands(q_)),
            static_cast<std::size_t>(num_demands(q_))};
  }
  std::span<const double> row(const JointState& s) const { return row(state_index(s, q_)); }

  DemandDistribution distribution(const JointState& s) const {
    auto r = row(s);
    return DemandDistribution{{r.begin(), r.end()}};
  }

  void set_row(const JointState& s, const DemandDistribution& d) {
    if (d.q() != q_) throw InputError("set_row: distribution over a different q");
    std::copy(d.probs.begin(), d.probs.end(), row(state_index(s, q_)).begin());
  }

  /// The same model with both coordinates of every context swapped, i.e. the
  /// table re-indexed by (opponent's previous, own previous) demand.
  DemandModel swapped() const {
    DemandModel out(q_);
    for (int i = 0; i < num_states(q_); ++i) {
      const JointState s = state_at(i, q_);
      auto src = row(JointState{s.prev_b, s.prev_a});
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  /// Largest |row sum - 1| over all contexts; +inf if any entry is negative.
  double max_normalization_error() const {
    double worst = 0.0;
    for (int i = 0; i < num_states(q_); ++i) {
      auto r = row(i);
      for (double p : r)
        if (!(p >= 0.0)) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }
    return worst;
  }

 private:
  int q_ = 0;
  std::vector<double> probs_;
};

// ---------------------------------------------------------------------------
// Heuristic behavioural model

struct HeuristicModel {
  double sigma = 1.0;
  int q = 10;
};

/// Mean of the heuristic player's next demand given its own and the
/// opponent's previous demands. A player that asked for at most half and was
/// refused stays put; otherwise it moves towards a proportional split of the
/// leftover (or overshoot) q - own - opp.
inline double heuristic_mean(int own_prev, int opp_prev, int q) {
  const int sum = own_prev + opp_prev;
  if (2 * own_prev <= q && sum > q) return own_prev;
  return own_prev + static_cast<double>(own_prev) / sum * (q - sum);
}

/// True when heuristic_mean takes the "keep the previous demand" branch.
inline bool heuristic_keeps_demand(int own_prev, int opp_prev, int q) {
  return 2 * own_prev <= q && own_prev + opp_prev > q;
}

/// Discretized Gaussian exp(-(d - mu)^2 / (2 sigma^2)) over d = 1..q-1,
/// normalized. Evaluated in log space so a tiny sigma degenerates to the
/// nearest support point instead of underflowing to all zeros.
inline DemandDistribution discretized_gaussian(double mu, double sigma, int q) {
  if (!(sigma > 0.0)) throw InputError("sigma must be > 0");
  const int n = num_demands(q);
  std::vector<double> logw(static_cast<std::size_t>(n));
  for (int d = 1; d <= n; ++d) {
    const double z = d - mu;
    logw[static_cast<std::size_t>(d - 1)] = -(z * z) / (2.0 * sigma * sigma);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  DemandDistribution out{std::vector<double>(logw.size())};
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    out.probs[i] = std::exp(logw[i] - top);
    total += out.probs[i];
  }
  for (double& p : out.probs) p /= total;
  return out;
}

/// Distribution of the next demand of the heuristic player sitting at `role`.
inline DemandDistribution heuristic_distribution(const HeuristicModel& model, const JointState& s,
                                                 Role role) {
  check_state(s, model.q);
  const double mu = heuristic_mean(s.own(role).value, s.opp(role).value, model.q);
  return discretized_gaussian(mu, model.sigma, model.q);
}

inline Demand heuristic_sample(const HeuristicModel& model, const JointState& s, Role role,
                               Rng& rng) {
  return sample(heuristic_distribution(model, s, role), rng);
}

/// Full conditional table of the heuristic player at `role`.
inline DemandModel heuristic_table(const HeuristicModel& model, Role role) {
  DemandModel out(model.q);
  for (int i = 0; i < num_states(model.q); ++i) {
    const JointState s = state_at(i, model.q);
    out.set_row(s, heuristic_distribution(model, s, role));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform model

inline DemandDistribution uniform_model(int q) {
  if (q < 2) throw InputError("q must be >= 2");
  return DemandDistribution{
      std::vector<double>(static_cast<std::size_t>(num_demands(q)), 1.0 / num_demands(q))};
}

inline DemandModel uniform_table(int q) {
  DemandModel out(q);
  const auto u = uniform_model(q);
  for (int i = 0; i < num_states(q); ++i) out.set_row(state_at(i, q), u);
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet learner

/// Conjugate Dirichlet belief over the opponent's conditional demand table.
/// counts(s, b) is the concentration parameter for outcome b in context s;
/// the posterior mean of each row is the normalized count vector.
class DirichletLearner {
 public:
  DirichletLearner() = default;

  /// Learner with every count set to `initial` (> 0).
  explicit DirichletLearner(int q, double initial = 1.0)
      : q_(q), counts_(static_cast<std::size_t>(num_states(q) * num_demands(q)), initial) {
    if (q < 2) throw InputError("q must be >= 2");
    if (!(initial > 0.0)) throw InputError("Dirichlet counts must be > 0");
  }

  int q() const { return q_; }

  std::span<const double> counts(const JointState& context) const {
    return {counts_.data() + static_cast<std::size_t>(state_index(context, q_) * num_demands(q_)),
            static_cast<std::size_t>(num_demands(q_))};
  }
  double count(const JointState& context, Demand outcome) const {
    return counts(context)[static_cast<std::size_t>(outcome.value - 1)];
  }

  void set_counts(const JointState& context, std::span<const double> row) {
    check_state(context, q_);
    if (static_cast<int>(row.size()) != num_demands(q_)) throw InputError("set_counts: row size");
    for (double c : row)
      if (!(c > 0.0)) throw InputError("Dirichlet counts must be > 0");
    std::copy(row.begin(), row.end(), mutable_row(context).begin());
  }

  /// Records one observed opponent demand in `context`.
  void update(const JointState& context, Demand observed) {
    check_state(context, q_);
    check_demand(observed, q_, "observed");
    mutable_row(context)[static_cast<std::size_t>(observed.value - 1)] += 1.0;
  }

  /// Posterior-mean estimate of p(outcome | context).
  DemandDistribution estimate(const JointState& context) const {
    check_state(context, q_);
    auto r = counts(context);
    const double mass = std::accumulate(r.begin(), r.end(), 0.0);
    DemandDistribution out{std::vector<double>(r.size())};
    for (std::size_t i = 0; i < r.size(); ++i) out.probs[i] = r[i] / mass;
    return out;
  }

  /// Posterior-mean estimate of the whole conditional table.
  DemandModel table() const {
    DemandModel out(q_);
    for (int i = 0; i < num_states(q_); ++i) {
      const JointState s = state_at(i, q_);
      out.set_row(s, estimate(s));
    }
    return out;
  }

  double row_mass(const JointState& context) const {
    auto r = counts(context);
    return std::accumulate(r.begin(), r.end(), 0.0);
  }
  double total_mass() const { return std::accumulate(counts_.begin(), counts_.end(), 0.0); }

  friend bool operator==(const DirichletLearner&, const DirichletLearner&) = default;

 private:
  std::span<double> mutable_row(const JointState& context) {
    return {counts_.data() + static_cast<std::size_t>(state_index(context, q_) * num_demands(q_)),
            static_cast<std::size_t>(num_demands(q_))};
  }

  int q_ = 0;
  std::vector<double> counts_;
};

inline void learner_update(DirichletLearner& learner, const JointState& context,
                           Demand observed) {
  learner.update(context, observed);
}

inline DemandDistribution learner_estimate(const DirichletLearner& learner,
                                           const JointState& context) {
  return learner.estimate(context);
}

// ---------------------------------------------------------------------------
// Priors

struct UniformPrior {};

/// Heuristic-shaped prior for the opponent sitting at `opponent_role`.
struct HeuristicPrior {
  double sigma = 3.0;
  Role opponent_role = Role::B;
};

/// Prior learned from the rounds of a training game. The learner models the
/// player at `opponent_role`.
struct PretrainedPrior {
  const GameLog* log = nullptr;
  Role opponent_role = Role::B;
};

using PriorKind = std::variant<UniformPrior, HeuristicPrior, PretrainedPrior>;

/// Replays the (context, opponent demand) pairs of `log` into `learner`.
/// Round 1 is the preset round and has no context.
inline void replay_observations(DirichletLearner& learner, const GameLog& log,
                                Role opponent_role) {
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    const auto& prev = log.records[i - 1];
    const auto& cur = log.records[i];
    const JointState context{prev.demand_a, prev.demand_b};
    learner.update(context, opponent_role == Role::A ? cur.demand_a : cur.demand_b);
  }
}

inline DirichletLearner make_prior(const PriorKind& kind, int q) {
  if (q < 2) throw InputError("q must be >= 2");
  return std::visit(
      [q](const auto& k) -> DirichletLearner {
        using K = std::decay_t<decltype(k)>;
        DirichletLearner learner(q, 1.0);
        if constexpr (std::is_same_v<K, HeuristicPrior>) {
          const HeuristicModel model{k.sigma, q};
          // Row mass q-1: the same prior strength as the uniform prior.
          for (int i = 0; i < num_states(q); ++i) {
            const JointState s = state_at(i, q);
            auto dist = heuristic_distribution(model, s, k.opponent_role);
            for (double& p : dist.probs) p *= num_demands(q);
            // Guard against an exactly-zero tail from a very narrow sigma.
            for (double& p : dist.probs) p = std::max(p, std::numeric_limits<double>::min());
            learner.set_counts(s, dist.probs);
          }
        } else if constexpr (std::is_same_v<K, PretrainedPrior>) {
          if (k.log != nullptr) replay_observations(learner, *k.log, k.opponent_role);
        }
        return learner;
      },
      kind);
}

// ---------------------------------------------------------------------------
// Plain-text checkpoint: a header line "q <q>", then one line per context
// "prev_a prev_b nu_1 ... nu_{q-1}" in state_index order.

inline void write_learner(std::ostream& out, const DirichletLearner& learner) {
  const int q = learner.q();
  out << "q " << q << '\n';
  out.precision(17);
  for (int i = 0; i < num_states(q); ++i) {
    const JointState s = state_at(i, q);
    out << s.prev_a.value << ' ' << s.prev_b.value;
    for (double c : learner.counts(s)) out << ' ' << c;
    out << '\n';
  }
}

inline DirichletLearner read_learner(std::istream& in) {
  std::string tag;
  int q = 0;
  if (!(in >> tag >> q) || tag != "q" || q < 2) throw InputError("learner file: bad header");
  DirichletLearner learner(q, 1.0);
  std::vector<bool> seen(static_cast<std::size_t>(num_states(q)), false);
  std::vector<double> row(static_cast<std::size_t>(num_demands(q)));
  for (int i = 0; i < num_states(q); ++i) {
    int a = 0;
    int b = 0;
    if (!(in >> a >> b)) throw InputError("learner file: truncated at row " + std::to_string(i));
    const JointState s{Demand(a), Demand(b)};
    check_state(s, q);
    for (double& c : row)
      if (!(in >> c)) throw InputError("learner file: short row " + std::to_string(i));
    learner.set_counts(s, row);
    seen[static_cast<std::size_t>(state_index(s, q))] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw InputError("learner file: duplicate context");
  return learner;
}

}  // namespace ndg
