#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pendulum.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "tabular_mdp.hpp"
#include "tabular_value.hpp"

namespace monotone_rl {

using PendulumTransition = BasicTransition<PendulumState>;

// Two streams so that the environment's randomness does not shift when a
// policy consumes its action draws differently.
struct RolloutStreams {
    std::mt19937_64 transitions;
    std::mt19937_64 actions;
};

inline RolloutStreams rollout_streams(std::uint64_t seed) {
    return {make_stream({seed, tag(StreamTag::transitions)}), make_stream({seed, tag(StreamTag::actions)})};
}

inline RolloutStreams rollout_streams(std::uint64_t seed, std::uint64_t iteration, bool retry) {
    const auto tt = tag(retry ? StreamTag::retry_transitions : StreamTag::transitions);
    const auto ta = tag(retry ? StreamTag::retry_actions : StreamTag::actions);
    return {make_stream({seed, tt, iteration}), make_stream({seed, ta, iteration})};
}

/// One episode from the start state; stops on a terminal state or after max_steps.
inline std::vector<Transition> episode_rollout(const TabularMDP& m, const TabularPolicy& pi, int max_steps,
                                               RolloutStreams& rs) {
    std::vector<Transition> out;
    int s = m.start_state;
    for (int t = 0; t < max_steps; ++t) {
        if (m.is_terminal(s)) break;
        const std::vector<double> probs = pi.at(s);
        const int a = static_cast<int>(sample_index(probs, uniform01(rs.actions)));
        std::vector<double> p(static_cast<std::size_t>(m.n_states));
        for (int j = 0; j < m.n_states; ++j) p[static_cast<std::size_t>(j)] = m.transition(m.row(s, a), j);
        const int next = static_cast<int>(sample_index(p, uniform01(rs.transitions)));
        out.push_back({s, a, m.reward(m.row(s, a), next), next, m.is_terminal(next)});
        s = next;
    }
    return out;
}

inline std::vector<Transition> episode_rollout(const TabularMDP& m, const TabularPolicy& pi, int max_steps,
                                               std::uint64_t seed) {
    auto rs = rollout_streams(seed);
    return episode_rollout(m, pi, max_steps, rs);
}

/// Collect exactly `steps` transitions, restarting episodes as they end.
inline std::vector<std::vector<Transition>> collect_steps(const TabularMDP& m, const TabularPolicy& pi,
                                                          int steps, int max_episode_steps, RolloutStreams& rs) {
    std::vector<std::vector<Transition>> episodes;
    int remaining = steps;
    while (remaining > 0) {
        auto ep = episode_rollout(m, pi, std::min(remaining, max_episode_steps), rs);
        if (ep.empty()) break;  // start state is terminal
        remaining -= static_cast<int>(ep.size());
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

inline double undiscounted_return(const std::vector<Transition>& ep) {
    double r = 0.0;
    for (const Transition& t : ep) r += t.reward;
    return r;
}

/// Mean undiscounted return over `episodes` rollouts; deterministic per seed.
inline double evaluate_policy_return(const TabularMDP& m, const TabularPolicy& pi, int episodes, int max_steps,
                                     std::uint64_t seed) {
    auto rs = rollout_streams(seed);
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) total += undiscounted_return(episode_rollout(m, pi, max_steps, rs));
    return episodes > 0 ? total / episodes : 0.0;
}

/// Pendulum episode; `policy(state)` returns action probabilities.
template <class PolicyFn>
std::vector<PendulumTransition> pendulum_rollout(const PendulumSpec& p, PolicyFn&& policy, int steps,
                                                 std::mt19937_64& actions) {
    std::vector<PendulumTransition> out;
    out.reserve(static_cast<std::size_t>(steps));
    PendulumState s{p.start_angle, p.start_speed};
    for (int t = 0; t < steps; ++t) {
        const std::vector<double> probs = policy(s);
        const int a = static_cast<int>(sample_index(probs, uniform01(actions)));
        const PendulumStep st = pendulum_step(p, s, a);
        out.push_back({s, a, st.reward, st.next, false});
        s = st.next;
    }
    return out;
}

}  // namespace monotone_rl
