#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monotone_rl/distribution.hpp"
#include "monotone_rl/rollout.hpp"
#include "oracles.hpp"

using namespace monotone_rl;

namespace {

TEST(Stationary, SingleAbsorbingState) {
    TabularMDP m;
    m.n_states = 1;
    m.n_actions = 1;
    m.transition = Eigen::MatrixXd::Ones(1, 1);
    m.reward = Eigen::MatrixXd::Zero(1, 1);
    EXPECT_NEAR(exact_stationary(m, TabularPolicy::uniform(1, 1))(0), 1.0, 1e-15);
}

TEST(Stationary, TwoStateCycle) {
    TabularMDP m;
    m.n_states = 2;
    m.n_actions = 1;
    m.gamma = 0.7;
    m.transition = Eigen::MatrixXd{{0, 1}, {1, 0}};
    m.reward = Eigen::MatrixXd::Zero(2, 2);
    const Eigen::VectorXd d = exact_stationary(m, TabularPolicy::uniform(2, 1));
    EXPECT_NEAR(d(0), 1.0 / 1.7, 1e-14);
    EXPECT_NEAR(d(1), 0.7 / 1.7, 1e-14);
    const auto ref = oracle::truncated_visitation(m, TabularPolicy::uniform(2, 1), 500);
    EXPECT_NEAR(d(0), ref[0], 1e-12);
}

TEST(Stationary, MatchesTruncatedSumAndIsFixedPoint) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 30; ++i) {
        const int S = 2 + static_cast<int>(rng() % 9), A = 1 + static_cast<int>(rng() % 4);
        const TabularMDP m = oracle::random_mdp(rng, S, A, 0.9);
        const TabularPolicy pi = oracle::random_policy(rng, S, A);
        const Eigen::VectorXd d = exact_stationary(m, pi);
        const auto ref = oracle::truncated_visitation(m, pi, 500);
        EXPECT_NEAR(d.sum(), 1.0, 1e-12);
        for (int s = 0; s < S; ++s) EXPECT_NEAR(d(s), ref[s], 1e-6);
        Eigen::VectorXd d0 = Eigen::VectorXd::Zero(S);
        d0(m.start_state) = 1;
        const Eigen::VectorXd fixed = (1 - m.gamma) * d0 + m.gamma * policy_transition(m, pi).transpose() * d;
        EXPECT_LE((d - fixed).lpNorm<1>(), 1e-9);
    }
}

TEST(Visitation, SingleStep) {
    const auto d = empirical_visitation<int>({{3}}, 0.9);
    ASSERT_EQ(d.states.size(), 1u);
    EXPECT_DOUBLE_EQ(d.weights[0], 1.0);
}

TEST(Visitation, DiscountWeights) {
    const auto d = empirical_visitation<int>({{0, 1}}, 0.5);
    EXPECT_NEAR(d.weights[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(d.weights[1], 1.0 / 3.0, 1e-15);
    EXPECT_THROW(empirical_visitation<int>({}, 0.5), std::invalid_argument);
}

TEST(Visitation, ContinuousKeepsRawPoints) {
    const auto d = empirical_visitation<PendulumState>({{{0.1, 0}, {0.1, 0}, {0.2, 0}}}, 0.5);
    ASSERT_EQ(d.states.size(), 3u);
    EXPECT_NEAR(d.weights[0] + d.weights[1] + d.weights[2], 1.0, 1e-15);
}

TEST(Visitation, ConvergesToExact) {
    // 150-step episodes: the truncated tail weighs gamma^150 < 5e-4.
    GridworldSpec g;
    const TabularMDP m = gridworld_build(g);
    std::mt19937_64 prng(4);
    const TabularPolicy pi = oracle::random_policy(prng, 25, 4);
    std::vector<std::vector<int>> trajs;
    auto rs = rollout_streams(99);
    for (int e = 0; e < 10000; ++e) {
        std::vector<int> states;
        for (const auto& t : episode_rollout(m, pi, 150, rs)) states.push_back(t.state);
        // the exact solution keeps absorbing mass on the goal
        states.resize(150, g.index(g.goal));
        trajs.push_back(std::move(states));
    }
    const Eigen::VectorXd est = to_dense(empirical_visitation(trajs, m.gamma), 25);
    const Eigen::VectorXd exact = exact_stationary(m, pi);
    EXPECT_LT(0.5 * (est - exact).lpNorm<1>(), 0.02);
}

TEST(Advantage, Basics) {
    const std::vector<double> q{1, 0}, pi{0.5, 0.5}, pnew{1, 0};
    EXPECT_DOUBLE_EQ(policy_advantage(q, pi, pi), 0.0);
    EXPECT_DOUBLE_EQ(policy_advantage(q, pi, pnew), 0.5);
}

TEST(Advantage, AlgebraicIdentity) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0, 2);
    for (int i = 0; i < 200; ++i) {
        const TabularPolicy p = oracle::random_policy(rng, 2, 4);
        std::vector<double> q(4), a(4), b(4);
        for (int k = 0; k < 4; ++k) q[k] = n(rng), a[k] = p(0, k), b[k] = p(1, k);
        double v = 0, ref = 0;
        for (int k = 0; k < 4; ++k) v += a[k] * q[k];
        for (int k = 0; k < 4; ++k) ref += b[k] * (q[k] - v);
        EXPECT_NEAR(policy_advantage(q, a, b), ref, 1e-12);
    }
}

TEST(Advantage, ExpectedAndL1) {
    const std::vector<double> d{0.5, 0.5};
    const auto r = expected_policy_advantage(std::vector<double>{0.2, -0.1}, d);
    EXPECT_NEAR(r.expected, 0.05, 1e-15);
    EXPECT_NEAR(r.l1, 0.15, 1e-15);
    const auto z = expected_policy_advantage(std::vector<double>{0, 0}, d);
    EXPECT_DOUBLE_EQ(z.expected, 0.0);
}

TEST(Advantage, GreedyImprovementIsNonNegative) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const int S = 2 + static_cast<int>(rng() % 9), A = 2 + static_cast<int>(rng() % 3);
        const TabularMDP m = oracle::random_mdp(rng, S, A, 0.9);
        const TabularPolicy pi = oracle::random_policy(rng, S, A);
        const Eigen::MatrixXd q = exact_policy_eval(m, pi);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(S, A);
        for (int s = 0; s < S; ++s) {
            Eigen::Index best;
            q.row(s).maxCoeff(&best);
            g(s, best) = 1;
        }
        const auto rep = expected_policy_advantage(policy_advantage(q, pi, TabularPolicy(g)), exact_stationary(m, pi));
        EXPECT_GE(rep.expected, -1e-12);
    }
}

// J(pi') - J(pi) = 1/(1-gamma) sum_s d^{pi'}(s) sum_a pi'(a|s) A_pi(s,a)
TEST(PerformanceDifference, IdentityHoldsExactly) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
        const int S = 1 + static_cast<int>(rng() % 10), A = 1 + static_cast<int>(rng() % 4);
        const TabularMDP m = oracle::random_mdp(rng, S, A, 0.9);
        const TabularPolicy pi = oracle::random_policy(rng, S, A), pnew = oracle::random_policy(rng, S, A);
        const double lhs = exact_return(m, pnew) - exact_return(m, pi);
        const Eigen::VectorXd adv = policy_advantage(exact_policy_eval(m, pi), pi, pnew);
        const double rhs = exact_stationary(m, pnew).dot(adv) / (1 - m.gamma);
        EXPECT_NEAR(lhs, rhs, 1e-8);
    }
}

}  // namespace
