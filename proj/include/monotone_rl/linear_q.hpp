#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pendulum.hpp"
#include "rng.hpp"

namespace monotone_rl {

/// Gaussian random features over (normalized state, one-hot action).
///
/// Each center is a uniform point in [-1,1]^2 paired with a one-hot action,
/// so the squared distance splits into a state part and an action part of
/// either 0 or 2.
class RBFFeatures {
public:
    RBFFeatures() = default;

    RBFFeatures(int n_features, int n_actions, std::uint64_t seed) : n_actions_(n_actions) {
        if (n_features < 1 || n_actions < 1) throw std::invalid_argument("RBFFeatures: empty");
        auto rng = make_stream({seed, tag(StreamTag::features)});
        centers_.resize(n_features, 2);
        center_action_.resize(static_cast<std::size_t>(n_features));
        for (int i = 0; i < n_features; ++i) {
            centers_(i, 0) = 2.0 * uniform01(rng) - 1.0;
            centers_(i, 1) = 2.0 * uniform01(rng) - 1.0;
            center_action_[static_cast<std::size_t>(i)] =
                std::min(n_actions - 1, static_cast<int>(uniform01(rng) * n_actions));
        }
        width_ = median_pairwise_distance();
        if (!(width_ > 0.0)) width_ = 1.0;
    }

    int size() const { return static_cast<int>(centers_.rows()); }
    int n_actions() const { return n_actions_; }
    double width() const { return width_; }
    Eigen::Vector2d center_state(int i) const { return centers_.row(i).transpose(); }
    int center_action(int i) const { return center_action_[static_cast<std::size_t>(i)]; }

    /// Feature block for all actions at one normalized state: M x n_actions.
    Eigen::MatrixXd features(const Eigen::Vector2d& x) const {
        const int M = size();
        const double inv = 1.0 / (width_ * width_);
        const double off = std::exp(-2.0 * inv);
        Eigen::MatrixXd phi(M, n_actions_);
        for (int i = 0; i < M; ++i) {
            const double ds = (centers_.row(i).transpose() - x).squaredNorm();
            const double base = std::exp(-ds * inv);
            for (int a = 0; a < n_actions_; ++a)
                phi(i, a) = (a == center_action_[static_cast<std::size_t>(i)]) ? base : base * off;
        }
        return phi;
    }

    Eigen::VectorXd features(const Eigen::Vector2d& x, int action) const {
        return features(x).col(action);
    }

private:
    double median_pairwise_distance() const {
        const int M = size();
        std::vector<double> d;
        d.reserve(static_cast<std::size_t>(M) * (M - 1) / 2);
        for (int i = 0; i < M; ++i)
            for (int j = i + 1; j < M; ++j) {
                double sq = (centers_.row(i) - centers_.row(j)).squaredNorm();
                if (center_action_[static_cast<std::size_t>(i)] != center_action_[static_cast<std::size_t>(j)])
                    sq += 2.0;
                d.push_back(std::sqrt(sq));
            }
        if (d.empty()) return 1.0;
        auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
        std::nth_element(d.begin(), mid, d.end());
        return *mid;
    }

    int n_actions_ = 0;
    Eigen::MatrixXd centers_;
    std::vector<int> center_action_;
    double width_ = 1.0;
};

inline Eigen::Vector2d normalize_state(const PendulumSpec& p, PendulumState s) {
    return {s.theta / std::numbers::pi, s.theta_dot / p.max_speed};
}

/// Solve (G + ridge I) theta = b with a Cholesky factorization and one step
/// of iterative refinement.
inline Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& b, double ridge) {
    if (!(ridge > 0.0)) throw std::invalid_argument("ridge_solve: ridge must be positive");
    if (!gram.allFinite() || !b.allFinite()) throw std::domain_error("ridge_solve: non-finite input");
    Eigen::MatrixXd A = gram;
    A.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw std::runtime_error("ridge_solve: factorization failed");
    Eigen::VectorXd theta = llt.solve(b);
    theta += llt.solve(b - A * theta);
    return theta;
}

inline Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double ridge) {
    if (features.rows() != targets.size()) throw std::invalid_argument("ridge_fit: size mismatch");
    return ridge_solve(features.transpose() * features, features.transpose() * targets, ridge);
}

/// Relative residual of the regularized normal equations.
inline double ridge_residual(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double ridge,
                             const Eigen::VectorXd& theta) {
    const Eigen::VectorXd rhs = features.transpose() * targets;
    const Eigen::VectorXd lhs = features.transpose() * (features * theta) + ridge * theta;
    const double scale = rhs.norm();
    return (lhs - rhs).norm() / (scale > 0.0 ? scale : 1.0);
}

}  // namespace monotone_rl
