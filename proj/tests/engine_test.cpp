#include <gtest/gtest.h>

#include <sstream>

#include "ndg/engine.hpp"

namespace ndg {
namespace {

std::string csv_of(const GameLog& log) {
  std::stringstream ss;
  write_game_csv(ss, log);
  return ss.str();
}

GameLog uniform_game(double wa, double wb, GameConfig cfg = {}) {
  cfg.omega_a = wa;
  cfg.omega_b = wb;
  Player a = MdpAgent(Role::A, wa, cfg.horizon, uniform_table(cfg.q));
  Player b = MdpAgent(Role::B, wb, cfg.horizon, uniform_table(cfg.q));
  return run_game(cfg, a, b, RngPlan{cfg.seed});
}

GameLog learner_vs_heuristic(GameConfig cfg, RunOptions opts = {}) {
  Player a = MdpAgent(Role::A, cfg.omega_a, cfg.horizon, make_prior(UniformPrior{}, cfg.q));
  Player b = HeuristicAgent(Role::B, HeuristicModel{1.0, cfg.q});
  return run_game(cfg, a, b, RngPlan{cfg.seed}, opts);
}

TEST(RunGame, UniformAnchor) {
  for (double wa : {0.0, 0.3, 1.0})
    for (double wb : {0.0, 0.7, 1.0}) {
      const auto log = uniform_game(wa, wb);
      EXPECT_EQ(log.cum_profit_a, 298);
      EXPECT_EQ(log.cum_profit_b, 298);
      EXPECT_EQ(log.total(), 596);
      EXPECT_DOUBLE_EQ(log.success_rate_pct, 100.0);
      EXPECT_DOUBLE_EQ(success_rate(log), 100.0);
    }
}

TEST(RunGame, SingleRoundIsThePresetPair) {
  GameConfig cfg;
  cfg.rounds = 1;
  const auto log = uniform_game(0.5, 0.5, cfg);
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].demand_a, Demand(3));
  EXPECT_EQ(log.records[0].demand_b, Demand(3));
  EXPECT_EQ(log.cum_profit_a, 3);
  EXPECT_EQ(log.cum_profit_b, 3);
  EXPECT_DOUBLE_EQ(log.success_rate_pct, 100.0);
}

TEST(RunGame, RejectsSwappedRoles) {
  GameConfig cfg;
  Player a = HeuristicAgent(Role::B, HeuristicModel{1.0, 10});
  Player b = HeuristicAgent(Role::B, HeuristicModel{1.0, 10});
  EXPECT_THROW(run_game(cfg, a, b, RngPlan{1}), InputError);
}

TEST(RunGame, SameSeedSameBytes) {
  GameConfig cfg;
  cfg.seed = 42;
  cfg.omega_a = 0.4;
  EXPECT_EQ(csv_of(learner_vs_heuristic(cfg)), csv_of(learner_vs_heuristic(cfg)));
  GameConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(csv_of(learner_vs_heuristic(cfg)), csv_of(learner_vs_heuristic(other)));
}

TEST(RunGame, EvaluationOrderDoesNotMatter) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GameConfig cfg;
    cfg.seed = seed;
    cfg.omega_a = 0.6;
    EXPECT_EQ(csv_of(learner_vs_heuristic(cfg)),
              csv_of(learner_vs_heuristic(cfg, RunOptions{true, false})));
  }
}

TEST(RunGame, ConservationAndBoundsOverManyRounds) {
  long rounds = 0;
  for (std::uint64_t seed = 0; rounds < 10000; ++seed) {
    GameConfig cfg;
    cfg.seed = seed;
    cfg.omega_a = (seed % 11) / 10.0;
    cfg.horizon = 3;
    Player a = HeuristicAgent(Role::A, HeuristicModel{1.5, cfg.q});
    Player b = HeuristicAgent(Role::B, HeuristicModel{0.7, cfg.q});
    const auto log = run_game(cfg, a, b, RngPlan{seed});
    for (const auto& r : log.records) {
      if (r.compatible) {
        EXPECT_EQ(r.profit_a + r.profit_b + r.unclaimed, cfg.q);
      } else {
        EXPECT_EQ(r.profit_a, 0);
        EXPECT_EQ(r.profit_b, 0);
        EXPECT_EQ(r.unclaimed, cfg.q);
      }
      ++rounds;
    }
    const long cap = cfg.initial_demand + (cfg.rounds - 1L) * (cfg.q - 1);
    EXPECT_GE(log.cum_profit_a, 0);
    EXPECT_LE(log.cum_profit_a, cap);
    EXPECT_LE(log.cum_profit_b, cap);
    EXPECT_LE(log.total(), 2L * cfg.initial_demand + (cfg.rounds - 1L) * cfg.q);
    EXPECT_GE(log.success_rate_pct, 0.0);
    EXPECT_LE(log.success_rate_pct, 100.0);
  }
}

// A's weight changes nothing about the heuristic player's stream; with an A
// whose behaviour is also weight-independent the B demands must coincide.
TEST(RunGame, WeightChangeDoesNotPerturbOpponentDraws) {
  std::vector<Demand> reference;
  for (double wa : {0.0, 0.5, 1.0}) {
    GameConfig cfg;
    cfg.seed = 9;
    cfg.omega_a = wa;
    Player a = MdpAgent(Role::A, wa, cfg.horizon, uniform_table(cfg.q));
    Player b = HeuristicAgent(Role::B, HeuristicModel{1.0, cfg.q});
    const auto log = run_game(cfg, a, b, RngPlan{cfg.seed});
    std::vector<Demand> bs;
    for (const auto& r : log.records) bs.push_back(r.demand_b);
    if (reference.empty()) reference = bs;
    EXPECT_EQ(bs, reference);
  }
}

TEST(RunGame, ReplayingTheLogReproducesLearnerCounts) {
  GameConfig cfg;
  cfg.seed = 5;
  cfg.omega_a = 0.3;
  Player a = MdpAgent(Role::A, cfg.omega_a, cfg.horizon, make_prior(UniformPrior{}, cfg.q));
  Player b = HeuristicAgent(Role::B, HeuristicModel{1.0, cfg.q});
  const auto log = run_game(cfg, a, b, RngPlan{cfg.seed});
  auto replayed = make_prior(UniformPrior{}, cfg.q);
  replay_observations(replayed, log, Role::B);
  EXPECT_EQ(*a.mdp()->learner(), replayed);
  EXPECT_DOUBLE_EQ(replayed.total_mass(), 81.0 * 9.0 + (cfg.rounds - 1));
}

TEST(Pretrain, CountsAndCrossCheck) {
  GameConfig cfg;
  cfg.omega_a = 0.2;
  cfg.omega_b = 0.9;
  auto fresh = [&](Role r) {
    return MdpAgent(r, cfg.omega(r), cfg.horizon, make_prior(UniformPrior{}, cfg.q));
  };
  const auto res = pretrain(cfg, fresh(Role::A), fresh(Role::B), 30, RngPlan{3});
  EXPECT_DOUBLE_EQ(res.learner_a.total_mass(), 81.0 * 9.0 + 30.0);
  EXPECT_DOUBLE_EQ(res.learner_b.total_mass(), 81.0 * 9.0 + 30.0);
  EXPECT_EQ(res.log.records.size(), 31u);
  EXPECT_EQ(make_prior(PretrainedPrior{&res.log, Role::B}, cfg.q), res.learner_a);
  EXPECT_EQ(make_prior(PretrainedPrior{&res.log, Role::A}, cfg.q), res.learner_b);
}

TEST(Pretrain, ZeroRoundsGivesUniformPriors) {
  GameConfig cfg;
  auto fresh = [&](Role r) {
    return MdpAgent(r, 0.5, cfg.horizon, make_prior(UniformPrior{}, cfg.q));
  };
  const auto res = pretrain(cfg, fresh(Role::A), fresh(Role::B), 0, RngPlan{3});
  EXPECT_EQ(res.learner_a, make_prior(UniformPrior{}, cfg.q));
  EXPECT_EQ(res.learner_b, make_prior(UniformPrior{}, cfg.q));
}

TEST(Pretrain, RequiresLearningAgents) {
  GameConfig cfg;
  EXPECT_THROW(pretrain(cfg, MdpAgent(Role::A, 0.5, 3, uniform_table(10)),
                        MdpAgent(Role::B, 0.5, 3, make_prior(UniformPrior{}, 10)), 30, RngPlan{}),
               InputError);
}

TEST(GameCsv, RoundTripsExactly) {
  GameConfig cfg;
  cfg.seed = 77;
  cfg.omega_a = 0.7;
  cfg.omega_b = 0.3;
  const auto log = learner_vs_heuristic(cfg);
  std::stringstream ss(csv_of(log));
  const auto back = read_game_csv(ss, cfg);
  ASSERT_EQ(back.records.size(), log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& x = log.records[i];
    const auto& y = back.records[i];
    EXPECT_EQ(x.t, y.t);
    EXPECT_EQ(x.demand_a, y.demand_a);
    EXPECT_EQ(x.demand_b, y.demand_b);
    EXPECT_EQ(x.compatible, y.compatible);
    EXPECT_EQ(x.profit_a, y.profit_a);
    EXPECT_EQ(x.profit_b, y.profit_b);
    EXPECT_EQ(x.reward_a, y.reward_a);
    EXPECT_EQ(x.reward_b, y.reward_b);
    EXPECT_EQ(x.unclaimed, y.unclaimed);
  }
  EXPECT_EQ(back.cum_profit_a, log.cum_profit_a);
  EXPECT_EQ(csv_of(back), csv_of(log));
}

TEST(GameCsv, HeaderAndSummary) {
  const auto log = uniform_game(0.5, 0.5);
  const std::string csv = csv_of(log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kGameCsvHeader);
  std::stringstream s;
  write_game_summary_csv(s, log);
  EXPECT_EQ(s.str(), std::string(kGameSummaryHeader) + "\n0.5,0.5,0,298,298,596,100.00\n");
}

TEST(GameCsv, RejectsMalformedRows) {
  std::stringstream bad(std::string(kGameCsvHeader) + "\n1,3,3,1,3,3,x,3,4\n");
  EXPECT_THROW(read_game_csv(bad, GameConfig{}), InputError);
}

TEST(RngPlan, StreamsAreDistinctAndStable) {
  const RngPlan p{123};
  EXPECT_NE(p.stream(RngPlan::kPlayerA)(), p.stream(RngPlan::kPlayerB)());
  EXPECT_EQ(p.stream(RngPlan::kPretrainA)(), p.stream(RngPlan::kPretrainA)());
}

}  // namespace
}  // namespace ndg
