#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monotone_rl/policy.hpp"

using namespace monotone_rl;

namespace {

std::vector<double> random_dist(std::mt19937_64& rng, int n) {
    std::gamma_distribution<double> g(0.8, 1.0);
    std::vector<double> p(n);
    double z = 0;
    for (auto& v : p) z += (v = g(rng) + 1e-9);
    for (auto& v : p) v /= z;
    return p;
}

TEST(Update, UniformStaysUniform) {
    const std::vector<double> q{0.3, 0.3, 0.3}, prev{1. / 3, 1. / 3, 1. / 3};
    const auto out = entropy_regularized_update(q, prev, RegularizationParams{0.0, 1.0});
    for (double v : out) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
}

TEST(Update, HandSoftmax) {
    // tau = 0, sigma = 1: alpha = 0, beta = 1
    const auto out = entropy_regularized_update(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5},
                                                RegularizationParams{0.0, 1.0});
    EXPECT_NEAR(out[0], std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-15);
    EXPECT_NEAR(out[1], 1.0 / (std::exp(1.0) + 1.0), 1e-15);
}

TEST(Update, AlphaOneSmallBetaFreezes) {
    const std::vector<double> q{1.0, -2.0}, prev{0.3, 0.7};
    const auto out = entropy_regularized_update(q, prev, RegularizationParams{1e9, 0.0});
    EXPECT_NEAR(out[0], 0.3, 1e-8);
    EXPECT_NEAR(out[1], 0.7, 1e-8);
}

TEST(Update, MatchesDirectFormula) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 3);
    const RegularizationParams reg{0.05, 0.45};
    for (int i = 0; i < 200; ++i) {
        const auto prev = random_dist(rng, 4);
        std::vector<double> q(4);
        for (auto& v : q) v = n(rng);
        const auto out = entropy_regularized_update(q, prev, reg);
        std::vector<double> ref(4);
        double z = 0;
        for (int a = 0; a < 4; ++a) z += (ref[a] = std::pow(prev[a], reg.alpha()) * std::exp(reg.beta() * q[a]));
        for (int a = 0; a < 4; ++a) EXPECT_NEAR(out[a], ref[a] / z, 1e-12);
    }
}

TEST(Update, ShiftInvariantAndPositive) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 50);
    const RegularizationParams reg{0.01, 0.01};  // beta = 50
    for (int i = 0; i < 200; ++i) {
        const auto prev = random_dist(rng, 5);
        std::vector<double> q(5), q2(5);
        const double c = n(rng);
        for (int a = 0; a < 5; ++a) q2[a] = (q[a] = n(rng)) + c;
        const auto a1 = entropy_regularized_update(q, prev, reg);
        const auto a2 = entropy_regularized_update(q2, prev, reg);
        double sum = 0;
        for (int a = 0; a < 5; ++a) {
            EXPECT_NEAR(a1[a], a2[a], 1e-10);
            EXPECT_TRUE(std::isfinite(a1[a]));
            EXPECT_GE(a1[a], 0.0);
            sum += a1[a];
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
    }
}

TEST(Update, RejectsNonFinite) {
    EXPECT_THROW(entropy_regularized_update(std::vector<double>{NAN, 0.0}, std::vector<double>{0.5, 0.5},
                                            RegularizationParams{}),
                 std::domain_error);
}

TEST(Regularization, DerivedParameters) {
    const RegularizationParams r{0.05, 0.45};
    EXPECT_NEAR(r.alpha(), 0.1, 1e-15);
    EXPECT_NEAR(r.beta(), 2.0, 1e-15);
    EXPECT_THROW((RegularizationParams{0.0, 0.0}.validate()), std::invalid_argument);
}

TEST(Mixture, EndpointsAndMidpoint) {
    const TabularPolicy a(Eigen::MatrixXd{{1.0, 0.0}});
    const TabularPolicy b(Eigen::MatrixXd{{0.0, 1.0}});
    EXPECT_EQ(mixture(a, b, 1.0).matrix(), a.matrix());
    EXPECT_EQ(mixture(a, b, 0.0).matrix(), b.matrix());
    EXPECT_NEAR(mixture(a, b, 0.5)(0, 0), 0.5, 1e-15);
    EXPECT_THROW(mixture(a, b, 1.5), std::invalid_argument);
    EXPECT_THROW(mixture(a, b, -0.1), std::invalid_argument);
}

TEST(Mixture, AffineInZeta) {
    std::mt19937_64 rng(3);
    Eigen::MatrixXd pa(3, 4), pb(3, 4);
    for (int s = 0; s < 3; ++s) {
        const auto x = random_dist(rng, 4), y = random_dist(rng, 4);
        for (int a = 0; a < 4; ++a) pa(s, a) = x[a], pb(s, a) = y[a];
    }
    const TabularPolicy A(pa), B(pb);
    const auto mid = mixture(A, B, 0.5);
    EXPECT_LT((mid.matrix() - 0.5 * (pa + pb)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Divergence, KnownValues) {
    const TabularPolicy a(Eigen::MatrixXd{{0.5, 0.5}});
    const TabularPolicy b(Eigen::MatrixXd{{0.75, 0.25}});
    EXPECT_NEAR(max_kl(a, b), 0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0), 1e-15);
    EXPECT_NEAR(max_kl(a, b), 0.1438410362, 1e-10);
    EXPECT_DOUBLE_EQ(max_kl(a, a), 0.0);
    const TabularPolicy e0(Eigen::MatrixXd{{1.0, 0.0}});
    const TabularPolicy e1(Eigen::MatrixXd{{0.0, 1.0}});
    EXPECT_DOUBLE_EQ(max_tv(e0, e1), 2.0);
    EXPECT_DOUBLE_EQ(max_tv(a, a), 0.0);
    EXPECT_THROW(max_kl(e0, e1), std::domain_error);
    EXPECT_DOUBLE_EQ(max_kl(e0, a), std::log(2.0));  // 0 log 0 = 0
}

TEST(Divergence, MaxOverStatesAgainstEnumeration) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd pa(6, 3), pb(6, 3);
        double best_kl = 0, best_tv = 0;
        for (int s = 0; s < 6; ++s) {
            const auto x = random_dist(rng, 3), y = random_dist(rng, 3);
            double kl = 0, tv = 0;
            for (int a = 0; a < 3; ++a) {
                pa(s, a) = x[a];
                pb(s, a) = y[a];
                kl += x[a] * std::log(x[a] / y[a]);
                tv += std::abs(x[a] - y[a]);
            }
            best_kl = std::max(best_kl, kl);
            best_tv = std::max(best_tv, tv);
        }
        const TabularPolicy A(pa), B(pb);
        EXPECT_NEAR(max_kl(A, B), best_kl, 1e-12);
        EXPECT_NEAR(max_tv(A, B), best_tv, 1e-12);
    }
}

TEST(Divergence, PinskerPerState) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_dist(rng, 4), y = random_dist(rng, 4);
        const double tv = l1_distance(x, y);
        EXPECT_LE(tv * tv, 2.0 * kl_divergence(x, y) + 1e-12);
    }
}

TEST(Divergence, MixtureKlIsConvex) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const auto pnew = random_dist(rng, 4), pold = random_dist(rng, 4);
        const double z = u(rng);
        std::vector<double> mix(4);
        for (int a = 0; a < 4; ++a) mix[a] = z * pnew[a] + (1 - z) * pold[a];
        EXPECT_LE(kl_divergence(mix, pold), kl_divergence(pnew, pold) + 1e-12);
    }
}

}  // namespace
