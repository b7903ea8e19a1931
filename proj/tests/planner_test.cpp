#include <gtest/gtest.h>

#include <sstream>

#include "ndg/planner.hpp"
#include "ndg/validation.hpp"

namespace ndg {
namespace {

JointState S(int a, int b) { return JointState{Demand(a), Demand(b)}; }

TEST(BackwardInduction, UniformOneStepAnchor) {
  const auto plan = backward_induction(uniform_table(10), 0.0, 1);
  for (int s = 0; s < 81; ++s) {
    EXPECT_NEAR(plan.values(1, s), 25.0 / 9.0, 1e-12);
    EXPECT_EQ(plan.rule.action(state_at(s, 10)), Demand(5));
    EXPECT_EQ(plan.rule.optimal(state_at(s, 10)).size(), 1u);
  }
}

TEST(BackwardInduction, UniformTenStepValue) {
  const auto plan = backward_induction(uniform_table(10), 0.0, 10);
  for (int s = 0; s < 81; ++s) EXPECT_NEAR(plan.values(10, s), 250.0 / 9.0, 1e-10);
}

TEST(BackwardInduction, UniformModelPicksFiveForEveryWeight) {
  for (int i = 0; i <= 10; ++i) {
    const auto plan = backward_induction(uniform_table(10), i / 10.0, 10);
    for (int s = 0; s < 81; ++s) EXPECT_EQ(plan.rule.action(state_at(s, 10)), Demand(5));
  }
}

TEST(BackwardInduction, TerminalStageIsZero) {
  Rng rng(1);
  const auto plan = backward_induction(random_model(6, rng), 0.3, 4);
  for (int s = 0; s < 25; ++s) EXPECT_EQ(plan.values(0, s), 0.0);
  for (int k = 0; k <= 4; ++k)
    for (int s = 0; s < 25; ++s) EXPECT_TRUE(std::isfinite(plan.values(k, s)));
}

TEST(BackwardInduction, FullWeightOneStepMinimizesExpectedGap) {
  Rng rng(2);
  const int q = 10;
  const auto model = random_model(q, rng);
  const auto plan = backward_induction(model, 1.0, 1);
  for (int s = 0; s < num_states(q); ++s) {
    const auto p = model.row(s);
    int best_a = 0;
    double best = -1e300;
    for (int a = 1; a < q; ++a) {
      double v = 0.0;
      for (int b = 1; b < q; ++b) v -= p[static_cast<std::size_t>(b - 1)] * std::abs(q - a - b);
      if (v > best + 1e-12) {
        best = v;
        best_a = a;
      }
    }
    EXPECT_EQ(plan.rule.action(state_at(s, q)).value, best_a);
  }
}

TEST(BackwardInduction, RejectsBadInputs) {
  DemandModel broken(4);
  EXPECT_THROW(backward_induction(broken, 0.5, 2), InputError);
  EXPECT_THROW(backward_induction(uniform_table(4), 0.5, 0), InputError);
  EXPECT_THROW(backward_induction(uniform_table(4), 1.5, 1), InputError);
}

TEST(BackwardInduction, MatchesExpectimaxOnSmallProblems) {
  Rng rng(77);
  for (int q = 3; q <= 5; ++q)
    for (int h = 1; h <= 3; ++h)
      for (double w : {0.0, 0.5, 1.0})
        for (int m = 0; m < 3; ++m) {
          const auto model = random_model(q, rng);
          const auto plan = backward_induction(model, w, h);
          const auto policy = dp_policy(model, w, h);
          for (int s = 0; s < num_states(q); ++s) {
            const double brute = expectimax_value(model, w, h, state_at(s, q));
            EXPECT_NEAR(plan.values(h, s), brute, 1e-9);
            EXPECT_NEAR(evaluate_policy(model, w, h, state_at(s, q), policy), brute, 1e-9);
          }
        }
}

// Every deterministic Markov policy of a q=3 game, enumerated outright.
TEST(BackwardInduction, MatchesMarkovPolicyEnumeration) {
  Rng rng(78);
  for (int h = 1; h <= 3; ++h)
    for (double w : {0.0, 0.5, 1.0}) {
      const auto model = random_model(3, rng);
      const auto plan = backward_induction(model, w, h);
      for (int s = 0; s < 4; ++s)
        EXPECT_NEAR(plan.values(h, s), markov_enumeration_value(model, w, h, state_at(s, 3)), 1e-9);
    }
  const auto model = random_model(4, rng);
  const auto plan = backward_induction(model, 0.5, 1);
  for (int s = 0; s < 9; ++s)
    EXPECT_NEAR(plan.values(1, s), markov_enumeration_value(model, 0.5, 1, state_at(s, 4)), 1e-9);
}

TEST(BackwardInduction, ArgmaxInvariantUnderRewardScaling) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = random_model(7, rng);
    const double w = (trial % 11) / 10.0;
    auto r = reward_matrix(w, 7);
    const auto base = backward_induction(model, r, 4);
    for (double c : {0.25, 3.0, 1000.0}) {
      auto scaled = r;
      for (double& x : scaled) x *= c;
      const auto plan = backward_induction(model, scaled, 4);
      for (int s = 0; s < 36; ++s) {
        EXPECT_EQ(plan.rule.action(state_at(s, 7)), base.rule.action(state_at(s, 7)));
        EXPECT_NEAR(plan.values(4, s), c * base.values(4, s), 1e-9 * c * 100);
      }
    }
  }
}

TEST(BackwardInduction, StateIndependentModelCollapsesValues) {
  Rng rng(6);
  const auto one = random_model(8, rng);
  DemandModel m(8);
  for (int s = 0; s < 49; ++s) m.set_row(state_at(s, 8), one.distribution(S(1, 1)));
  const auto plan = backward_induction(m, 0.4, 6);
  for (int k = 0; k <= 6; ++k)
    for (int s = 1; s < 49; ++s) EXPECT_NEAR(plan.values(k, s), plan.values(k, 0), 1e-12);
}

TEST(BackwardInduction, ExactTieGoesToSmallestDemand) {
  // q=4, omega=0, p(b) = (1/2, 1/4, 1/4): Q(2) = 2 * 3/4 = Q(3) = 3 * 1/2.
  DemandModel m(4);
  for (int s = 0; s < 9; ++s) m.set_row(state_at(s, 4), DemandDistribution{{0.5, 0.25, 0.25}});
  const auto plan = backward_induction(m, 0.0, 1);
  const auto& best = plan.rule.optimal(S(1, 1));
  ASSERT_EQ(best.size(), 2u);
  EXPECT_EQ(best[0], Demand(2));
  EXPECT_EQ(best[1], Demand(3));
  EXPECT_EQ(plan.rule.action(S(1, 1)), Demand(2));
  EXPECT_EQ(plan.rule.choose(S(1, 1), TieBreak::Smallest, nullptr), Demand(2));

  Rng rng(1);
  bool saw2 = false;
  bool saw3 = false;
  for (int i = 0; i < 100; ++i) {
    const Demand d = plan.rule.choose(S(1, 1), TieBreak::Random, &rng);
    saw2 = saw2 || d == Demand(2);
    saw3 = saw3 || d == Demand(3);
  }
  EXPECT_TRUE(saw2 && saw3);
}

TEST(PlanDump, CsvLayout) {
  const auto plan = backward_induction(uniform_table(3), 0.0, 1);
  std::stringstream v;
  write_value_table(v, plan.values);
  std::string line;
  std::getline(v, line);
  EXPECT_EQ(line, "stage,prev_a,prev_b,value");
  std::getline(v, line);
  EXPECT_EQ(line, "0,1,1,0");
  std::stringstream r;
  write_decision_rule(r, plan.rule);
  std::getline(r, line);
  EXPECT_EQ(line, "prev_a,prev_b,action");
  std::getline(r, line);
  EXPECT_EQ(line, "1,1,1");
}

TEST(MdpAgent, NonLearningUniformAlwaysDemandsFive) {
  for (int i = 0; i <= 10; ++i)
    for (Role role : {Role::A, Role::B}) {
      MdpAgent agent(role, i / 10.0, 10, uniform_table(10));
      for (int s = 0; s < 81; s += 7) EXPECT_EQ(agent.act(state_at(s, 10)), Demand(5));
    }
}

TEST(MdpAgent, RepeatedActIsDeterministic) {
  auto l = make_prior(UniformPrior{}, 10);
  l.update(S(3, 3), Demand(7));
  MdpAgent agent(Role::A, 0.2, 10, l);
  EXPECT_EQ(agent.act(S(3, 3)), agent.act(S(3, 3)));
}

TEST(MdpAgent, LearnsToConcedeAgainstGreedyOpponent) {
  MdpAgent agent(Role::A, 1.0, 10, make_prior(UniformPrior{}, 10));
  for (int s = 0; s < 81; ++s)
    for (int i = 0; i < 500; ++i) agent.observe(state_at(s, 10), Demand(9));
  EXPECT_EQ(agent.act(S(5, 9)), Demand(1));
  EXPECT_EQ(agent.act(S(3, 3)), Demand(1));
}

TEST(MdpAgent, ObserveOnlyTouchesLearners) {
  MdpAgent fixed(Role::A, 0.5, 3, uniform_table(10));
  fixed.observe(S(3, 3), Demand(9));
  EXPECT_FALSE(fixed.learning());
  EXPECT_LE(l1_distance(fixed.current_model().row(S(3, 3)), uniform_model(10).probs), 0.0);

  MdpAgent learner(Role::B, 0.5, 3, make_prior(UniformPrior{}, 10));
  learner.observe(S(3, 3), Demand(9));
  EXPECT_DOUBLE_EQ(learner.learner()->total_mass(), 81.0 * 9.0 + 1.0);
  EXPECT_DOUBLE_EQ(learner.learner()->count(S(3, 3), Demand(9)), 2.0);
}

// A B-side agent facing the mirror image of an A-side agent's situation must
// make the same decision.
TEST(MdpAgent, RolesAreMirrorImages) {
  Rng rng(9);
  const auto model_of_b = random_model(6, rng);  // table coords, predicts B
  const auto model_of_a = model_of_b.swapped();   // mirrored, predicts A
  MdpAgent a(Role::A, 0.3, 5, model_of_b);
  MdpAgent b(Role::B, 0.3, 5, model_of_a);
  for (int s = 0; s < 25; ++s) {
    const JointState st = state_at(s, 6);
    EXPECT_EQ(a.act(st), b.act(JointState{st.prev_b, st.prev_a}));
  }
}

}  // namespace
}  // namespace ndg
