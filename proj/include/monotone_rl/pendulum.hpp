#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace monotone_rl {

// Rigid-rod pendulum, theta = 0 upright, angle wrapped to [-pi, pi].
struct PendulumSpec {
    double length = 1.5;
    double mass = 1.0;
    std::vector<double> torques{-2.0, 0.0, 2.0};
    double dt = 0.05;
    double max_speed = 8.0;
    double reward_scale = 10.0;
    double angle_weight = 1.0;
    double velocity_weight = 0.01;
    int episode_steps = 200;
    double gravity = 9.81;
    double start_angle = std::numbers::pi;
    double start_speed = 0.0;
    double gamma = 0.95;

    int n_actions() const { return static_cast<int>(torques.size()); }

    void validate() const {
        if (!(length > 0.0) || !(mass > 0.0) || !(dt > 0.0) || !(max_speed > 0.0))
            throw std::invalid_argument("pendulum: length, mass, dt and max_speed must be positive");
        if (!(reward_scale > 0.0)) throw std::invalid_argument("pendulum: reward_scale must be positive");
        if (torques.empty()) throw std::invalid_argument("pendulum: no torques");
        if (episode_steps < 1) throw std::invalid_argument("pendulum: episode_steps < 1");
    }
};

struct PendulumState {
    double theta = 0.0;
    double theta_dot = 0.0;
};

inline double wrap_angle(double th) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(th, 2.0 * pi);  // in [-pi, pi]
    return w;
}

inline double pendulum_reward(const PendulumSpec& p, PendulumState s) {
    const double r = -(p.angle_weight * s.theta * s.theta +
                       p.velocity_weight * s.theta_dot * s.theta_dot) / p.reward_scale;
    return std::clamp(r, -1.0, 1.0);
}

struct PendulumStep {
    PendulumState next;
    double reward;
};

/// Reward is charged on the pre-step state.
inline PendulumStep pendulum_step(const PendulumSpec& p, PendulumState s, int action) {
    const double u = p.torques.at(static_cast<std::size_t>(action));
    const double acc = 3.0 * p.gravity / (2.0 * p.length) * std::sin(s.theta) +
                       3.0 * u / (p.mass * p.length * p.length);
    PendulumState n;
    n.theta_dot = std::clamp(s.theta_dot + acc * p.dt, -p.max_speed, p.max_speed);
    n.theta = wrap_angle(s.theta + n.theta_dot * p.dt);
    return {n, pendulum_reward(p, s)};
}

}  // namespace monotone_rl
