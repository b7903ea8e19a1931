// Nash demand game: domain types and per-round game mathematics.
#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ndg {

/// Thrown when an argument lies outside the domain of a game quantity.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which side of the table a player sits on. Players are structurally
/// identical; the role only decides which component of a JointState is
/// "own" and which is "opponent".
enum class Role { A, B };

inline constexpr Role other(Role r) { return r == Role::A ? Role::B : Role::A; }
inline constexpr const char* to_string(Role r) { return r == Role::A ? "A" : "B"; }

/// An integer claim on the amount q. Valid demands are 1..q-1; the bound
/// depends on q and is checked where q is known (see check_demand).
struct Demand {
  int value = 1;

  constexpr Demand() = default;
  constexpr explicit Demand(int v) : value(v) {}
  friend constexpr auto operator<=>(const Demand&, const Demand&) = default;
};

inline void check_demand(Demand d, int q, const char* what = "demand") {
  if (d.value < 1 || d.value > q - 1) {
    throw InputError(std::string(what) + " " + std::to_string(d.value) +
                     " outside 1.." + std::to_string(q - 1));
  }
}

/// The pair of demands played in the previous round.
struct JointState {
  Demand prev_a;
  Demand prev_b;

  friend constexpr auto operator<=>(const JointState&, const JointState&) = default;

  constexpr Demand own(Role r) const { return r == Role::A ? prev_a : prev_b; }
  constexpr Demand opp(Role r) const { return r == Role::A ? prev_b : prev_a; }

  /// Rewrites the state as (own, opponent) from the point of view of r.
  constexpr JointState perspective(Role r) const {
    return r == Role::A ? *this : JointState{prev_b, prev_a};
  }
};

inline void check_state(const JointState& s, int q) {
  check_demand(s.prev_a, q, "prev_a");
  check_demand(s.prev_b, q, "prev_b");
}

/// Number of distinct demands, i.e. the size of the action set.
inline constexpr int num_demands(int q) { return q - 1; }
/// Number of joint states, (q-1)^2.
inline constexpr int num_states(int q) { return (q - 1) * (q - 1); }

/// Row-major index of a state with prev_a as the major coordinate.
inline constexpr int state_index(const JointState& s, int q) {
  return (s.prev_a.value - 1) * (q - 1) + (s.prev_b.value - 1);
}

inline constexpr JointState state_at(int index, int q) {
  return JointState{Demand(index / (q - 1) + 1), Demand(index % (q - 1) + 1)};
}

struct GameConfig {
  int q = 10;
  int rounds = 60;
  int horizon = 10;
  int initial_demand = 3;
  double omega_a = 0.0;
  double omega_b = 0.0;
  std::uint64_t seed = 0;

  double omega(Role r) const { return r == Role::A ? omega_a : omega_b; }

  /// Throws InputError naming the first violated field.
  void validate() const {
    if (q < 2) throw InputError("q must be >= 2");
    if (rounds < 1) throw InputError("rounds must be >= 1");
    if (horizon < 1) throw InputError("horizon must be >= 1");
    if (initial_demand < 1 || initial_demand > q - 1)
      throw InputError("initial_demand must lie in 1..q-1");
    if (!(omega_a >= 0.0 && omega_a <= 1.0)) throw InputError("omega_a must lie in [0,1]");
    if (!(omega_b >= 0.0 && omega_b <= 1.0)) throw InputError("omega_b must lie in [0,1]");
  }
};

/// Compatibility indicator: 1 iff the two demands fit into q.
inline int chi(Demand a, Demand b, int q) {
  check_demand(a, q);
  check_demand(b, q);
  return a.value + b.value <= q ? 1 : 0;
}

/// Profit of the player demanding `a` against an opponent demanding `b`.
inline int profit(Demand a, Demand b, int q) { return a.value * chi(a, b, q); }

/// Indirect-negotiation reward of the player demanding `a`:
///   a (1 - omega) chi(a, b) - omega |q - (a + b)|.
/// The first term is the economic profit; the second penalizes the part of
/// the game potential left unused (or the overshoot when incompatible).
inline double reward(Demand a, Demand b, double omega, int q) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("omega must lie in [0,1]");
  const int c = chi(a, b, q);
  return a.value * (1.0 - omega) * c - omega * std::abs(q - (a.value + b.value));
}

struct RoundRecord {
  int t = 0;
  Demand demand_a;
  Demand demand_b;
  bool compatible = false;
  int profit_a = 0;
  int profit_b = 0;
  double reward_a = 0.0;
  double reward_b = 0.0;
  int unclaimed = 0;
};

/// Builds the record of one round from the two demands. When the demands are
/// incompatible the whole amount q counts as unclaimed.
inline RoundRecord make_round(int t, Demand a, Demand b, const GameConfig& cfg) {
  RoundRecord r;
  r.t = t;
  r.demand_a = a;
  r.demand_b = b;
  r.compatible = chi(a, b, cfg.q) == 1;
  r.profit_a = profit(a, b, cfg.q);
  r.profit_b = profit(b, a, cfg.q);
  r.reward_a = reward(a, b, cfg.omega_a, cfg.q);
  r.reward_b = reward(b, a, cfg.omega_b, cfg.q);
  r.unclaimed = r.compatible ? cfg.q - a.value - b.value : cfg.q;
  return r;
}

struct GameLog {
  GameConfig config;
  std::vector<RoundRecord> records;
  long cum_profit_a = 0;
  long cum_profit_b = 0;
  double success_rate_pct = 0.0;

  long total() const { return cum_profit_a + cum_profit_b; }

  int compatible_rounds() const {
    int n = 0;
    for (const auto& r : records) n += r.compatible ? 1 : 0;
    return n;
  }

  /// Recomputes cumulative profits and the success rate from the records.
  void finalize() {
    cum_profit_a = 0;
    cum_profit_b = 0;
    for (const auto& r : records) {
      cum_profit_a += r.profit_a;
      cum_profit_b += r.profit_b;
    }
    success_rate_pct =
        records.empty() ? 0.0 : 100.0 * compatible_rounds() / static_cast<double>(records.size());
  }
};

/// Percentage of rounds with compatible demands.
inline double success_rate(const GameLog& log) {
  if (log.records.empty()) throw InputError("success rate of an empty game log");
  return 100.0 * log.compatible_rounds() / static_cast<double>(log.records.size());
}

}  // namespace ndg
