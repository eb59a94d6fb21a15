#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monotone_rl/linear_q.hpp"
#include "monotone_rl/tabular_value.hpp"
#include "oracles.hpp"

using namespace monotone_rl;

namespace {

TabularMDP single_state(double r, double gamma) {
    TabularMDP m;
    m.n_states = 1;
    m.n_actions = 1;
    m.gamma = gamma;
    m.transition = Eigen::MatrixXd::Ones(1, 1);
    m.reward = Eigen::MatrixXd::Constant(1, 1, r);
    return m;
}

// s0 -(0)-> s1 -(1)-> s2 (terminal)
TabularMDP chain3(double gamma) {
    TabularMDP m;
    m.n_states = 3;
    m.n_actions = 1;
    m.gamma = gamma;
    m.transition = Eigen::MatrixXd::Zero(3, 3);
    m.reward = Eigen::MatrixXd::Zero(3, 3);
    m.transition(0, 1) = 1;
    m.transition(1, 2) = 1;
    m.reward(1, 2) = 1;
    m.transition(2, 2) = 1;
    m.terminal_states = {2};
    return m;
}

TEST(ExactEval, GeometricSeries) {
    const TabularMDP m = single_state(0.5, 0.5);
    EXPECT_NEAR(exact_policy_eval(m, TabularPolicy::uniform(1, 1))(0, 0), 1.0, 1e-14);
}

TEST(ExactEval, TerminalBootstrapIsZero) {
    const TabularMDP m = chain3(0.9);
    const Eigen::MatrixXd q = exact_policy_eval(m, TabularPolicy::uniform(3, 1));
    EXPECT_NEAR(q(0, 0), 0.9, 1e-14);
    EXPECT_NEAR(q(1, 0), 1.0, 1e-14);
    EXPECT_NEAR(q(2, 0), 0.0, 1e-14);
}

TEST(ExactEval, MatchesValueIteration) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
        const int S = 2 + static_cast<int>(rng() % 9), A = 1 + static_cast<int>(rng() % 4);
        const TabularMDP m = oracle::random_mdp(rng, S, A, 0.9);
        const TabularPolicy pi = oracle::random_policy(rng, S, A);
        const Eigen::MatrixXd q = exact_policy_eval(m, pi);
        const auto ref = oracle::value_iteration_q(m, pi, 10000);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) EXPECT_NEAR(q(s, a), ref[s][a], 1e-8);
        // bounded by 1/(1-gamma)
        EXPECT_LE(q.cwiseAbs().maxCoeff(), 1.0 / (1.0 - m.gamma) + 1e-9);
        // Bellman residual
        const Eigen::VectorXd v = (pi.matrix().cwiseProduct(q)).rowwise().sum();
        const Eigen::VectorXd backup = m.mean_reward() + m.gamma * m.transition * v;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) EXPECT_NEAR(q(s, a), backup(m.row(s, a)), 1e-10);
    }
}

TEST(EmpiricalBellman, TerminalTargetIsReward) {
    const std::vector<Transition> pool{{0, 0, 1.0, 1, true}};
    const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(2, 1, 5.0);
    const Eigen::MatrixXd out = empirical_bellman_update(pool, q, TabularPolicy::uniform(2, 1), 0.9);
    EXPECT_DOUBLE_EQ(out(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(out(1, 0), 5.0);  // not in pool
}

TEST(EmpiricalBellman, ZeroQGivesMeanReward) {
    const std::vector<Transition> pool{{0, 1, 0.5, 1, false}, {0, 1, -0.1, 0, false}, {1, 0, 0.2, 0, false}};
    const Eigen::MatrixXd out =
        empirical_bellman_update(pool, Eigen::MatrixXd::Zero(2, 2), TabularPolicy::uniform(2, 2), 0.9);
    EXPECT_NEAR(out(0, 1), 0.2, 1e-15);
    EXPECT_NEAR(out(1, 0), 0.2, 1e-15);
    EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
}

TEST(EmpiricalBellman, EmptyPoolThrows) {
    EXPECT_THROW(empirical_bellman_update({}, Eigen::MatrixXd::Zero(1, 1), TabularPolicy::uniform(1, 1), 0.9),
                 std::invalid_argument);
}

TEST(EmpiricalBellman, DeterministicMdpConverges) {
    // Deterministic random MDP: one transition per (s,a) covers the model exactly.
    std::mt19937_64 rng(12);
    const int S = 6, A = 3;
    TabularMDP m = oracle::random_mdp(rng, S, A, 0.9);
    m.transition.setZero();
    std::vector<Transition> pool;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const int next = static_cast<int>(rng() % S);
            m.transition(m.row(s, a), next) = 1.0;
            pool.push_back({s, a, m.reward(m.row(s, a), next), next, false});
        }
    const TabularPolicy pi = oracle::random_policy(rng, S, A);
    const Eigen::MatrixXd exact = exact_policy_eval(m, pi);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(S, A);
    const int sweeps = static_cast<int>(std::ceil(std::log(1e-6 * (1 - m.gamma)) / std::log(m.gamma)));
    for (int i = 0; i < sweeps; ++i) q = empirical_bellman_update(pool, q, pi, m.gamma);
    EXPECT_LT((q - exact).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Rbf, FeatureDefinition) {
    const RBFFeatures f(50, 3, 9);
    EXPECT_EQ(f.size(), 50);
    EXPECT_GT(f.width(), 0.0);
    for (int i = 0; i < f.size(); ++i) {
        const Eigen::VectorXd phi = f.features(f.center_state(i), f.center_action(i));
        EXPECT_NEAR(phi(i), 1.0, 1e-15);
        EXPECT_GT(phi.minCoeff(), 0.0);
        EXPECT_LE(phi.maxCoeff(), 1.0);
    }
    // a point at distance width in state space, same action
    const Eigen::Vector2d x = f.center_state(0) + Eigen::Vector2d(f.width(), 0.0);
    EXPECT_NEAR(f.features(x, f.center_action(0))(0), std::exp(-1.0), 1e-14);
}

TEST(Rbf, MatchesDirectDistance) {
    const RBFFeatures f(40, 3, 10);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 20; ++k) {
        const Eigen::Vector2d x(u(rng), u(rng));
        const int a = static_cast<int>(rng() % 3);
        const Eigen::VectorXd phi = f.features(x, a);
        for (int i = 0; i < f.size(); ++i) {
            Eigen::VectorXd p(5), c(5);
            p << x(0), x(1), 0, 0, 0;
            c << f.center_state(i)(0), f.center_state(i)(1), 0, 0, 0;
            p(2 + a) = 1;
            c(2 + f.center_action(i)) = 1;
            EXPECT_NEAR(phi(i), std::exp(-(p - c).squaredNorm() / (f.width() * f.width())), 1e-14);
        }
    }
}

TEST(Rbf, LipschitzInState) {
    const RBFFeatures f(100, 3, 4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 100; ++k) {
        const Eigen::Vector2d x(u(rng), u(rng));
        const Eigen::Vector2d y = x + 1e-3 * Eigen::Vector2d(u(rng), u(rng));
        const Eigen::MatrixXd a = f.features(x), b = f.features(y);
        const double bound = 2.0 * (x - y).norm() / f.width();
        EXPECT_LE((a - b).cwiseAbs().maxCoeff(), bound);
    }
}

TEST(Rbf, SeedReproducible) {
    const RBFFeatures a(30, 3, 77), b(30, 3, 77), c(30, 3, 78);
    const Eigen::Vector2d x(0.1, -0.4);
    EXPECT_EQ(a.features(x), b.features(x));
    EXPECT_NE(a.features(x), c.features(x));
}

TEST(Ridge, IdentityCases) {
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, -1, 3);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
    EXPECT_LT((ridge_fit(I, y, 1e-12) - y).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((ridge_fit(I, y, 1.0) - y / 2).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(ridge_fit(I, y, 0.0), std::invalid_argument);
    Eigen::VectorXd bad = y;
    bad(0) = NAN;
    EXPECT_THROW(ridge_fit(I, bad, 1.0), std::domain_error);
}

TEST(Ridge, MatchesDenseInverse) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 1);
    for (int k = 0; k < 20; ++k) {
        const int N = 60, M = 25;
        Eigen::MatrixXd phi(N, M);
        Eigen::VectorXd y(N);
        for (int i = 0; i < N; ++i) {
            y(i) = n(rng);
            for (int j = 0; j < M; ++j) phi(i, j) = n(rng);
        }
        const Eigen::VectorXd theta = ridge_fit(phi, y, 1e-3);
        const Eigen::MatrixXd A = phi.transpose() * phi + 1e-3 * Eigen::MatrixXd::Identity(M, M);
        const Eigen::VectorXd ref = A.inverse() * (phi.transpose() * y);
        EXPECT_LT((theta - ref).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE(ridge_residual(phi, y, 1e-3, theta), 1e-8);
    }
}

}  // namespace
