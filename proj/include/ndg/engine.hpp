// One repeated game between two players.
#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "ndg/core.hpp"
#include "ndg/opponent.hpp"
#include "ndg/planner.hpp"

namespace ndg {

/// Non-optimizing player that samples its demand from the heuristic model.
class HeuristicAgent {
 public:
  HeuristicAgent(Role role, HeuristicModel model) : role_(role), model_(model) {
    if (!(model.sigma > 0.0)) throw InputError("sigma must be > 0");
  }

  Role role() const { return role_; }
  const HeuristicModel& model() const { return model_; }

  Demand act(const JointState& s, Rng& rng) const { return heuristic_sample(model_, s, role_, rng); }

 private:
  Role role_;
  HeuristicModel model_;
};

/// Either kind of player behind one interface: act on the previous round's
/// pair, then observe the opponent's demand.
class Player {
 public:
  Player(MdpAgent agent) : impl_(std::move(agent)) {}  // NOLINT(google-explicit-constructor)
  Player(HeuristicAgent agent) : impl_(agent) {}       // NOLINT(google-explicit-constructor)

  Role role() const {
    return std::visit([](const auto& a) { return a.role(); }, impl_);
  }

  Demand act(const JointState& s, Rng& rng) {
    if (auto* m = std::get_if<MdpAgent>(&impl_)) return m->act(s, &rng);
    return std::get<HeuristicAgent>(impl_).act(s, rng);
  }

  void observe(const JointState& s, Demand opponent_demand) {
    if (auto* m = std::get_if<MdpAgent>(&impl_)) m->observe(s, opponent_demand);
  }

  const MdpAgent* mdp() const { return std::get_if<MdpAgent>(&impl_); }

 private:
  std::variant<MdpAgent, HeuristicAgent> impl_;
};

// ---------------------------------------------------------------------------
// Random streams

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a stream label.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) {
  return splitmix64(splitmix64(parent) ^ splitmix64(label + 0x51ed270b27a4f1c3ULL));
}

/// Independent, reproducible streams for one game. Each stochastic consumer
/// owns a stream, so changing one player's parameters never shifts the draws
/// of the other.
struct RngPlan {
  enum Stream : std::uint64_t { kPlayerA = 1, kPlayerB = 2, kPretrainA = 3, kPretrainB = 4 };

  std::uint64_t master_seed = 0;

  Rng stream(Stream s) const { return Rng(derive_seed(master_seed, s)); }
};

// ---------------------------------------------------------------------------
// Round loop

struct RunOptions {
  /// Query B before A each round. Demands must not depend on this order.
  bool b_acts_first = false;
  /// Use the pretraining streams instead of the game streams.
  bool pretraining_streams = false;
};

/// Plays config.rounds rounds. Round 1 is the preset pair (a0, a0); in every
/// later round both players choose from the previous pair without seeing the
/// other's current demand, profits are allocated, and then each player
/// observes the opponent's demand in the context it acted from.
inline GameLog run_game(const GameConfig& config, Player& a, Player& b, const RngPlan& rng,
                        RunOptions options = {}) {
  config.validate();
  if (a.role() != Role::A || b.role() != Role::B)
    throw InputError("run_game: players must sit at roles A and B");

  Rng rng_a = rng.stream(options.pretraining_streams ? RngPlan::kPretrainA : RngPlan::kPlayerA);
  Rng rng_b = rng.stream(options.pretraining_streams ? RngPlan::kPretrainB : RngPlan::kPlayerB);

  GameLog log;
  log.config = config;
  log.records.reserve(static_cast<std::size_t>(config.rounds));

  const Demand a0(config.initial_demand);
  log.records.push_back(make_round(1, a0, a0, config));
  JointState state{a0, a0};

  for (int t = 2; t <= config.rounds; ++t) {
    Demand da;
    Demand db;
    if (options.b_acts_first) {
      db = b.act(state, rng_b);
      da = a.act(state, rng_a);
    } else {
      da = a.act(state, rng_a);
      db = b.act(state, rng_b);
    }
    log.records.push_back(make_round(t, da, db, config));
    a.observe(state, db);
    b.observe(state, da);
    state = JointState{da, db};
  }
  log.finalize();
  return log;
}

struct PretrainResult {
  DirichletLearner learner_a;
  DirichletLearner learner_b;
  GameLog log;
};

/// Warms up two learning agents for n_rounds played rounds (the preset round
/// is not counted, so each learner receives exactly n_rounds observations).
/// Uses the pretraining streams of `rng`.
inline PretrainResult pretrain(const GameConfig& config, MdpAgent agent_a, MdpAgent agent_b,
                               int n_rounds, const RngPlan& rng) {
  if (!agent_a.learning() || !agent_b.learning())
    throw InputError("pretrain: both agents must be learning");
  if (n_rounds < 0) throw InputError("pretrain: n_rounds must be >= 0");
  if (n_rounds == 0)
    return {make_prior(UniformPrior{}, config.q), make_prior(UniformPrior{}, config.q), {}};

  GameConfig training = config;
  training.rounds = n_rounds + 1;
  Player pa(std::move(agent_a));
  Player pb(std::move(agent_b));
  GameLog log = run_game(training, pa, pb, rng, RunOptions{false, true});
  return {*pa.mdp()->learner(), *pb.mdp()->learner(), std::move(log)};
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed2(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kGameCsvHeader =
    "round,demand_a,demand_b,compatible,profit_a,profit_b,reward_a,reward_b,unclaimed";

inline void write_game_csv(std::ostream& out, const GameLog& log) {
  out << kGameCsvHeader << '\n';
  for (const auto& r : log.records) {
    out << r.t << ',' << r.demand_a.value << ',' << r.demand_b.value << ','
        << (r.compatible ? 1 : 0) << ',' << r.profit_a << ',' << r.profit_b << ','
        << format_double(r.reward_a) << ',' << format_double(r.reward_b) << ',' << r.unclaimed
        << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

template <typename T>
T parse_field(const std::string& s, const char* name) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError(std::string("csv: bad value for ") + name + ": '" + s + "'");
  return v;
}

}  // namespace detail

/// Reads a per-round CSV back into records. Cumulative fields are recomputed.
inline GameLog read_game_csv(std::istream& in, const GameConfig& config) {
  std::string line;
  if (!std::getline(in, line) || detail::split_csv(line) != detail::split_csv(kGameCsvHeader))
    throw InputError("csv: unexpected header");
  GameLog log;
  log.config = config;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 9) throw InputError("csv: expected 9 fields");
    RoundRecord r;
    r.t = detail::parse_field<int>(f[0], "round");
    r.demand_a = Demand(detail::parse_field<int>(f[1], "demand_a"));
    r.demand_b = Demand(detail::parse_field<int>(f[2], "demand_b"));
    r.compatible = detail::parse_field<int>(f[3], "compatible") != 0;
    r.profit_a = detail::parse_field<int>(f[4], "profit_a");
    r.profit_b = detail::parse_field<int>(f[5], "profit_b");
    r.reward_a = detail::parse_field<double>(f[6], "reward_a");
    r.reward_b = detail::parse_field<double>(f[7], "reward_b");
    r.unclaimed = detail::parse_field<int>(f[8], "unclaimed");
    log.records.push_back(r);
  }
  log.finalize();
  return log;
}

inline constexpr const char* kGameSummaryHeader =
    "omega_a,omega_b,seed,cum_profit_a,cum_profit_b,total,success_rate_pct";

inline void write_game_summary_csv(std::ostream& out, const GameLog& log) {
  out << kGameSummaryHeader << '\n'
      << format_double(log.config.omega_a) << ',' << format_double(log.config.omega_b) << ','
      << log.config.seed << ',' << log.cum_profit_a << ',' << log.cum_profit_b << ','
      << log.total() << ',' << format_fixed2(log.success_rate_pct) << '\n';
}

}  // namespace ndg
