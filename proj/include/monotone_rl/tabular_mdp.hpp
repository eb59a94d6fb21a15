#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace monotone_rl {

/// Finite MDP with an explicit model.
///
/// Rows of `transition` and `reward` are indexed by s * n_actions + a and
/// columns by the next state. Terminal states end an episode on arrival; the
/// exact solvers treat them as zero-reward absorbing states.
struct TabularMDP {
    int n_states = 0;
    int n_actions = 0;
    Eigen::MatrixXd transition;
    Eigen::MatrixXd reward;
    int start_state = 0;
    std::vector<int> terminal_states;
    double gamma = 0.95;

    int row(int s, int a) const { return s * n_actions + a; }

    bool is_terminal(int s) const {
        return std::find(terminal_states.begin(), terminal_states.end(), s) !=
               terminal_states.end();
    }

    /// Expected one-step reward r(s,a) = sum_s' T r.
    Eigen::VectorXd mean_reward() const {
        return transition.cwiseProduct(reward).rowwise().sum();
    }

    void validate() const {
        if (n_states < 1 || n_actions < 1)
            throw std::invalid_argument("TabularMDP: need at least one state and one action");
        const Eigen::Index rows = static_cast<Eigen::Index>(n_states) * n_actions;
        if (transition.rows() != rows || transition.cols() != n_states ||
            reward.rows() != rows || reward.cols() != n_states)
            throw std::invalid_argument("TabularMDP: model shape mismatch");
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::invalid_argument("TabularMDP: gamma must lie in (0,1)");
        if (start_state < 0 || start_state >= n_states)
            throw std::invalid_argument("TabularMDP: start state out of range");
        for (int t : terminal_states)
            if (t < 0 || t >= n_states)
                throw std::invalid_argument("TabularMDP: terminal state out of range");
        for (Eigen::Index r = 0; r < rows; ++r) {
            if ((transition.row(r).array() < 0.0).any())
                throw std::invalid_argument("TabularMDP: negative transition probability");
            if (std::abs(transition.row(r).sum() - 1.0) > 1e-12)
                throw std::invalid_argument("TabularMDP: transition row " + std::to_string(r) +
                                            " does not sum to 1");
        }
        if (!reward.allFinite() || reward.maxCoeff() > 1.0 || reward.minCoeff() < -1.0)
            throw std::invalid_argument("TabularMDP: rewards must lie in [-1, 1]");
    }
};

struct Cell {
    int x = 0;
    int y = 0;
    auto operator<=>(const Cell&) const = default;
};

/// Actions: up (y+1), right (x+1), down (y-1), left (x-1).
enum class GridAction : int { up = 0, right = 1, down = 2, left = 3 };

struct GridworldSpec {
    int width = 5;
    int height = 5;
    Cell start{0, 0};
    Cell goal{4, 4};
    std::vector<Cell> danger_cells{{1, 2}, {2, 2}, {3, 2}};
    double move_success_prob = 0.8;
    double step_reward = -0.1;
    double goal_reward = 1.0;
    double danger_reward = -1.0;
    int max_episode_steps = 20;
    double gamma = 0.95;

    int index(Cell c) const { return c.y * width + c.x; }
    Cell cell(int s) const { return {s % width, s / width}; }
    bool inside(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }

    void validate() const {
        if (width < 1 || height < 1) throw std::invalid_argument("gridworld: empty grid");
        if (!inside(start) || !inside(goal)) throw std::invalid_argument("gridworld: start/goal off grid");
        if (start == goal) throw std::invalid_argument("gridworld: start equals goal");
        for (const Cell& d : danger_cells) {
            if (!inside(d)) throw std::invalid_argument("gridworld: danger cell off grid");
            if (d == goal) throw std::invalid_argument("gridworld: goal overlaps a danger cell");
        }
        if (!(move_success_prob > 0.0 && move_success_prob <= 1.0))
            throw std::invalid_argument("gridworld: move_success_prob must lie in (0,1]");
        if (max_episode_steps < 1) throw std::invalid_argument("gridworld: max_episode_steps < 1");
    }
};

inline Cell step_cell(const GridworldSpec& g, Cell c, int action) {
    static constexpr int dx[4] = {0, 1, 0, -1};
    static constexpr int dy[4] = {1, 0, -1, 0};
    Cell n{c.x + dx[action], c.y + dy[action]};
    return g.inside(n) ? n : c;
}

inline TabularMDP gridworld_build(const GridworldSpec& g) {
    g.validate();
    TabularMDP m;
    m.n_states = g.width * g.height;
    m.n_actions = 4;
    m.gamma = g.gamma;
    m.start_state = g.index(g.start);
    const int goal = g.index(g.goal);
    m.terminal_states = {goal};
    const int rows = m.n_states * m.n_actions;
    m.transition = Eigen::MatrixXd::Zero(rows, m.n_states);
    m.reward = Eigen::MatrixXd::Zero(rows, m.n_states);

    std::set<int> danger;
    for (const Cell& d : g.danger_cells) danger.insert(g.index(d));

    const double p = g.move_success_prob;
    const double slip = (1.0 - p) / 3.0;
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < 4; ++a) {
            const int r = m.row(s, a);
            if (s == goal) {
                m.transition(r, goal) = 1.0;
                continue;
            }
            for (int dir = 0; dir < 4; ++dir) {
                const int next = g.index(step_cell(g, g.cell(s), dir));
                m.transition(r, next) += (dir == a) ? p : slip;
            }
            for (int next = 0; next < m.n_states; ++next) {
                double rew = g.step_reward;
                if (next == goal) rew += g.goal_reward;
                if (danger.count(next)) rew += g.danger_reward;
                m.reward(r, next) = std::clamp(rew, -1.0, 1.0);
            }
        }
    }
    m.validate();
    return m;
}

}  // namespace monotone_rl
