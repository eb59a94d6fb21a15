#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "policy.hpp"
#include "tabular_mdp.hpp"

namespace monotone_rl {

template <class State>
struct BasicTransition {
    State state{};
    int action = 0;
    double reward = 0.0;
    State next_state{};
    bool terminal = false;
};

using Transition = BasicTransition<int>;

/// State-to-state matrix under pi with terminal rows replaced by self-loops.
inline Eigen::MatrixXd policy_transition(const TabularMDP& m, const TabularPolicy& pi) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m.n_states, m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
        if (m.is_terminal(s)) {
            P(s, s) = 1.0;
            continue;
        }
        for (int a = 0; a < m.n_actions; ++a) P.row(s) += pi(s, a) * m.transition.row(m.row(s, a));
    }
    return P;
}

inline Eigen::VectorXd policy_reward(const TabularMDP& m, const TabularPolicy& pi) {
    const Eigen::VectorXd rbar = m.mean_reward();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
        if (m.is_terminal(s)) continue;
        for (int a = 0; a < m.n_actions; ++a) r(s) += pi(s, a) * rbar(m.row(s, a));
    }
    return r;
}

/// V^pi by a direct solve of (I - gamma P^pi) V = r^pi.
inline Eigen::VectorXd exact_state_values(const TabularMDP& m, const TabularPolicy& pi) {
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(m.n_states, m.n_states) - m.gamma * policy_transition(m, pi);
    return A.partialPivLu().solve(policy_reward(m, pi));
}

/// Q^pi(s,a) as an S x A matrix; zero on terminal states.
inline Eigen::MatrixXd q_from_values(const TabularMDP& m, const Eigen::VectorXd& v) {
    const Eigen::VectorXd rbar = m.mean_reward();
    Eigen::VectorXd vcont = v;
    for (int t : m.terminal_states) vcont(t) = 0.0;
    const Eigen::VectorXd q = rbar + m.gamma * (m.transition * vcont);
    Eigen::MatrixXd out(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a) out(s, a) = m.is_terminal(s) ? 0.0 : q(m.row(s, a));
    return out;
}

inline Eigen::MatrixXd exact_policy_eval(const TabularMDP& m, const TabularPolicy& pi) {
    return q_from_values(m, exact_state_values(m, pi));
}

/// J(pi) = V^pi(start).
inline double exact_return(const TabularMDP& m, const TabularPolicy& pi) {
    return exact_state_values(m, pi)(m.start_state);
}

/// One sweep of the empirical Bellman operator over the pool. Every (s,a)
/// seen in the pool gets the mean of its targets; unseen entries keep q.
inline Eigen::MatrixXd empirical_bellman_update(const std::vector<Transition>& pool,
                                                const Eigen::MatrixXd& q, const TabularPolicy& pi,
                                                double gamma) {
    if (pool.empty()) throw std::invalid_argument("empirical_bellman_update: empty pool");
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(q.rows(), q.cols());
    for (const Transition& t : pool) {
        double target = t.reward;
        if (!t.terminal) target += gamma * pi.matrix().row(t.next_state).dot(q.row(t.next_state));
        sum(t.state, t.action) += target;
        count(t.state, t.action) += 1;
    }
    Eigen::MatrixXd out = q;
    for (Eigen::Index s = 0; s < q.rows(); ++s)
        for (Eigen::Index a = 0; a < q.cols(); ++a)
            if (count(s, a) > 0) out(s, a) = sum(s, a) / count(s, a);
    return out;
}

}  // namespace monotone_rl
