#pragma once

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "policy.hpp"
#include "tabular_mdp.hpp"
#include "tabular_value.hpp"

namespace monotone_rl {

/// Normalized discounted visitation d^pi of a tabular MDP from its start state.
inline Eigen::VectorXd exact_stationary(const TabularMDP& m, const TabularPolicy& pi) {
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(m.n_states, m.n_states) - m.gamma * policy_transition(m, pi);
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(m.n_states);
    d0(m.start_state) = 1.0;
    // d^T A = (1 - gamma) d0^T  <=>  A^T d = (1 - gamma) d0
    Eigen::VectorXd d = A.transpose().partialPivLu().solve((1.0 - m.gamma) * d0);
    return d / d.sum();
}

/// Weighted sample of states.
template <class State>
struct StateDistribution {
    std::vector<State> states;
    std::vector<double> weights;
};

/// gamma^t-weighted visitation over trajectories, normalized. Repeated
/// states are merged when State is ordered (tabular); continuous states are
/// kept as raw points.
template <class State>
StateDistribution<State> empirical_visitation(const std::vector<std::vector<State>>& trajectories,
                                              double gamma) {
    StateDistribution<State> out;
    double total = 0.0;
    if constexpr (std::is_integral_v<State>) {
        std::map<State, double> acc;
        for (const auto& traj : trajectories) {
            double w = 1.0;
            for (const State& s : traj) {
                acc[s] += w;
                total += w;
                w *= gamma;
            }
        }
        for (const auto& [s, w] : acc) {
            out.states.push_back(s);
            out.weights.push_back(w);
        }
    } else {
        for (const auto& traj : trajectories) {
            double w = 1.0;
            for (const State& s : traj) {
                out.states.push_back(s);
                out.weights.push_back(w);
                total += w;
                w *= gamma;
            }
        }
    }
    if (out.states.empty()) throw std::invalid_argument("empirical_visitation: no states");
    for (double& w : out.weights) w /= total;
    return out;
}

/// Dense tabular vector from a sampled distribution.
inline Eigen::VectorXd to_dense(const StateDistribution<int>& d, int n_states) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_states);
    for (std::size_t i = 0; i < d.states.size(); ++i) v(d.states[i]) += d.weights[i];
    return v;
}

/// A_pi^{pi_new}(s) = sum_a (pi_new(a|s) - pi(a|s)) Q_pi(s,a).
inline double policy_advantage(std::span<const double> q, std::span<const double> pi,
                               std::span<const double> pi_new) {
    double adv = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) adv += (pi_new[a] - pi[a]) * q[a];
    return adv;
}

inline Eigen::VectorXd policy_advantage(const Eigen::MatrixXd& q, const TabularPolicy& pi,
                                        const TabularPolicy& pi_new) {
    return (pi_new.matrix() - pi.matrix()).cwiseProduct(q).rowwise().sum();
}

struct AdvantageReport {
    std::vector<double> per_state;
    double expected = 0.0;  // sum_s d(s) A(s)
    double l1 = 0.0;        // sum_s d(s) |A(s)|
};

inline AdvantageReport expected_policy_advantage(std::vector<double> adv,
                                                 std::span<const double> weights) {
    if (adv.size() != weights.size())
        throw std::invalid_argument("expected_policy_advantage: size mismatch");
    AdvantageReport r;
    for (std::size_t i = 0; i < adv.size(); ++i) {
        r.expected += weights[i] * adv[i];
        r.l1 += weights[i] * std::abs(adv[i]);
    }
    r.per_state = std::move(adv);
    return r;
}

inline AdvantageReport expected_policy_advantage(const Eigen::VectorXd& adv, const Eigen::VectorXd& d) {
    std::vector<double> a(adv.data(), adv.data() + adv.size());
    return expected_policy_advantage(std::move(a), std::span<const double>(d.data(), d.size()));
}

}  // namespace monotone_rl
