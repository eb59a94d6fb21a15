#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bounds.hpp"
#include "distribution.hpp"
#include "linear_q.hpp"
#include "pendulum.hpp"
#include "policy.hpp"
#include "rollout.hpp"
#include "tabular_mdp.hpp"
#include "tabular_value.hpp"

namespace monotone_rl {

enum class Method { cvi, mi_cvi, spi_exact, spi_approx };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::cvi: return "cvi";
        case Method::mi_cvi: return "mi_cvi";
        case Method::spi_exact: return "spi_exact";
        case Method::spi_approx: return "spi_approx";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
    if (s == "cvi") return Method::cvi;
    if (s == "mi_cvi") return Method::mi_cvi;
    if (s == "spi_exact") return Method::spi_exact;
    if (s == "spi_approx") return Method::spi_approx;
    return std::nullopt;
}

struct AgentConfig {
    std::string name = "mi_cvi";
    Method method = Method::mi_cvi;
    RegularizationParams regularization;
    double gamma = 0.95;
    int iterations = 30;
    int steps_per_iteration = 20;
    bool rejection_enabled = true;
    double perturbation_rate = 0.05;
    double epsilon = 0.0;                // update-error level fed to B_K
    std::optional<double> zeta_override; // forces the mixing weight; for negative tests
    int eval_episodes = 20;
    bool oracle_mode = false;            // tabular only: exact Q and d
    int features = 800;                  // pendulum only
    double ridge = 1e-3;                 // pendulum only

    void validate() const {
        regularization.validate();
        if (iterations < 1) throw std::invalid_argument("agent: iterations must be >= 1");
        if (steps_per_iteration < 1) throw std::invalid_argument("agent: steps_per_iteration must be >= 1");
        if (perturbation_rate < 0.0 || perturbation_rate > 0.5)
            throw std::invalid_argument("agent: perturbation_rate must lie in [0, 0.5]");
        if (zeta_override && !(*zeta_override >= 0.0 && *zeta_override <= 1.0))
            throw std::invalid_argument("agent: zeta_override must lie in [0,1]");
        if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("agent: gamma must lie in (0,1)");
        if (eval_episodes < 1) throw std::invalid_argument("agent: eval_episodes must be >= 1");
        if (features < 1) throw std::invalid_argument("agent: features must be >= 1");
        if (!(ridge > 0.0)) throw std::invalid_argument("agent: ridge must be positive");
    }
};

struct IterationRecord {
    int iteration = 0;
    double episode_return = 0.0;
    BoundReport report;
    double wall_time = 0.0;  // seconds spent on this iteration
};

struct TrainResult {
    std::vector<IterationRecord> records;
    std::string error;  // non-empty when the trial was aborted
};

/// What one candidate looks like before a step size is chosen.
struct UpdateEstimate {
    AdvantageReport advantage;
    SpiQuantities spi;
    double kl_max = 0.0;
};

/// Pick zeta for one update (K >= 1) according to the agent's method.
inline BoundReport decide_update(const AgentConfig& cfg, int K, const UpdateEstimate& est) {
    const double alpha = cfg.regularization.alpha(), beta = cfg.regularization.beta();
    BoundReport r;
    r.K = K;
    r.c_k = c_k(alpha, beta, cfg.gamma, K);
    r.b_k = b_k(beta, cfg.gamma, cfg.epsilon, K);
    r.expected_advantage = est.advantage.expected;
    r.advantage_l1 = est.advantage.l1;
    r.kl_max = est.kl_max;
    r.delta = est.spi.delta;
    r.delta_A = est.spi.delta_A;
    const double A = r.expected_advantage;
    if (!std::isfinite(A) || !std::isfinite(r.kl_max)) throw std::runtime_error("non-finite advantage estimate");

    ZetaChoice z;
    switch (cfg.method) {
        case Method::cvi:
            z = {1.0, 1.0, 0.0};
            break;
        case Method::mi_cvi:
            r.method = BoundMethod::mi_cvi;
            z = zeta_mi_cvi(A, cfg.gamma, r.c_k);
            break;
        case Method::spi_exact:
            r.method = BoundMethod::spi_exact;
            z = zeta_spi(A, cfg.gamma, r.delta, r.delta_A);
            break;
        case Method::spi_approx:
            r.method = BoundMethod::spi_approx;
            z = zeta_spi_approx(A, cfg.gamma);
            break;
    }
    r.zeta_star = z.zeta_star;
    r.zeta = z.zeta;
    r.improvement_bound = z.bound;
    r.accepted = cfg.method == Method::cvi || A >= 0.0;
    if (!r.accepted) {
        r.zeta = 0.0;
        r.improvement_bound = 0.0;
    }
    if (cfg.zeta_override) r.zeta = *cfg.zeta_override;
    return r;
}

inline bool wants_retry(const AgentConfig& cfg, const BoundReport& r) {
    return !r.accepted && cfg.rejection_enabled && cfg.method != Method::cvi;
}

inline TabularPolicy perturb(const TabularPolicy& pi, double rate) {
    return mixture(TabularPolicy::uniform(pi.n_states(), pi.n_actions()), pi, rate);
}

inline std::uint64_t evaluation_seed(std::uint64_t trial_seed) {
    return make_stream({trial_seed, tag(StreamTag::evaluation)})();
}

// ---------------------------------------------------------------------------
// Tabular agent

/// Passed to an observer after every update (K >= 1).
struct TabularUpdate {
    int iteration;
    const TabularPolicy& previous;   // pi_k
    const TabularPolicy& candidate;  // pi_{k+1}
    const TabularPolicy& deployed;   // mixture
    const BoundReport& report;
};

using TabularObserver = std::function<void(const TabularUpdate&)>;

/// Algorithm loop on a tabular MDP. Record k describes the policy deployed
/// during iteration k; record 0 is the initial uniform policy.
inline TrainResult train_tabular(const TabularMDP& m, int max_episode_steps, const AgentConfig& cfg,
                                 std::uint64_t trial_seed, const TabularObserver& observer = {}) {
    cfg.validate();
    m.validate();
    TrainResult result;
    TabularPolicy pi = TabularPolicy::uniform(m.n_states, m.n_actions);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m.n_states, m.n_actions);
    std::vector<Transition> pool;
    std::vector<std::vector<Transition>> latest;
    const std::uint64_t eval_seed = evaluation_seed(trial_seed);

    auto collect = [&](const TabularPolicy& behaviour, int k, bool retry) {
        auto rs = rollout_streams(trial_seed, static_cast<std::uint64_t>(k), retry);
        latest = collect_steps(m, behaviour, cfg.steps_per_iteration, max_episode_steps, rs);
        for (const auto& ep : latest) pool.insert(pool.end(), ep.begin(), ep.end());
    };

    // Value update, candidate and advantage estimate from the current pool.
    auto estimate = [&](TabularPolicy& candidate) {
        Eigen::MatrixXd q_used;
        Eigen::VectorXd d;
        if (cfg.oracle_mode) {
            q_used = exact_policy_eval(m, pi);
            d = exact_stationary(m, pi);
        } else {
            q = empirical_bellman_update(pool, q, pi, m.gamma);
            q_used = q;
            std::vector<std::vector<int>> states;
            for (const auto& ep : latest) {
                std::vector<int> traj;
                for (const Transition& t : ep) traj.push_back(t.state);
                states.push_back(std::move(traj));
            }
            if (states.empty()) states.push_back({m.start_state});
            d = to_dense(empirical_visitation(states, m.gamma), m.n_states);
        }
        candidate = entropy_regularized_update(q_used, pi, cfg.regularization);
        const Eigen::VectorXd adv = policy_advantage(q_used, pi, candidate);
        UpdateEstimate est;
        est.advantage = expected_policy_advantage(adv, d);
        est.kl_max = max_kl(candidate, pi);
        const Eigen::VectorXd l1 = (candidate.matrix() - pi.matrix()).cwiseAbs().rowwise().sum();
        est.spi = spi_exact_quantities(std::span<const double>(l1.data(), l1.size()),
                                       std::span<const double>(adv.data(), adv.size()));
        return est;
    };

    try {
        for (int k = 0; k < cfg.iterations; ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            IterationRecord rec;
            rec.iteration = k;
            if (k > 0) {
                TabularPolicy candidate;
                BoundReport r = decide_update(cfg, k, estimate(candidate));
                if (wants_retry(cfg, r)) {
                    collect(perturb(pi, cfg.perturbation_rate), k, true);
                    r = decide_update(cfg, k, estimate(candidate));
                    r.rejected_retry = true;
                }
                TabularPolicy deployed = mixture(candidate, pi, r.zeta);
                if (observer) observer({k, pi, candidate, deployed, r});
                pi = std::move(deployed);
                rec.report = r;
            }
            collect(pi, k, false);
            rec.episode_return = evaluate_policy_return(m, pi, cfg.eval_episodes, max_episode_steps, eval_seed);
            if (!std::isfinite(rec.episode_return)) throw std::runtime_error("non-finite return");
            rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.records.push_back(rec);
        }
    } catch (const std::exception& e) {
        result.error = "iteration " + std::to_string(result.records.size()) + ": " + e.what();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Pendulum agent with a linear Q over random RBF features

/// Policy defined lazily by a chain of (theta_j, zeta_j) levels starting
/// from uniform; evaluated per visited state.
class ChainPolicy {
public:
    ChainPolicy(int n_actions, double alpha, double beta) : n_actions_(n_actions), alpha_(alpha), beta_(beta) {}

    void push(Eigen::VectorXd theta, double zeta) {
        if (zeta > 0.0) levels_.push_back({std::move(theta), zeta});
    }

    /// Probabilities under this policy given the state's feature block (M x A).
    std::vector<double> probs(const Eigen::MatrixXd& phi) const {
        std::vector<double> p(static_cast<std::size_t>(n_actions_), 1.0 / n_actions_);
        std::vector<double> cand(p.size());
        for (const Level& lv : levels_) {
            const Eigen::VectorXd q = phi.transpose() * lv.theta;
            step(q, p, cand);
            for (std::size_t a = 0; a < p.size(); ++a) p[a] = lv.zeta * cand[a] + (1.0 - lv.zeta) * p[a];
        }
        return p;
    }

    /// Candidate distribution at one state: prev^alpha exp(beta q), normalized.
    void step(const Eigen::VectorXd& q, std::span<const double> prev, std::span<double> out) const {
        entropy_regularized_update(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), prev,
                                   alpha_, beta_, out);
    }

    std::size_t depth() const { return levels_.size(); }

private:
    struct Level {
        Eigen::VectorXd theta;
        double zeta;
    };
    int n_actions_;
    double alpha_, beta_;
    std::vector<Level> levels_;
};

inline TrainResult train_pendulum(const PendulumSpec& spec, const AgentConfig& cfg, std::uint64_t trial_seed) {
    cfg.validate();
    spec.validate();
    TrainResult result;
    const int A = spec.n_actions();
    const RBFFeatures rbf(cfg.features, A, trial_seed);
    const int M = rbf.size();
    const double gamma = cfg.gamma;
    ChainPolicy pi(A, cfg.regularization.alpha(), cfg.regularization.beta());

    // Sample pool. Rows of next_phi are (sample, action) pairs: row i*A + a.
    const Eigen::Index capacity = static_cast<Eigen::Index>(cfg.iterations) * 2 * cfg.steps_per_iteration;
    Eigen::MatrixXd phi_sa(capacity, M);
    Eigen::MatrixXd next_phi(capacity * A, M);
    Eigen::MatrixXd next_probs(capacity, A);  // deployed policy at s'
    Eigen::VectorXd rewards(capacity);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(M, M);
    Eigen::Index n = 0;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(M);
    std::vector<PendulumState> latest_states;
    const std::uint64_t eval_seed = evaluation_seed(trial_seed);

    auto block = [&](PendulumState s) { return rbf.features(normalize_state(spec, s)); };

    auto add_samples = [&](const std::vector<PendulumTransition>& traj) {
        const Eigen::Index first = n;
        for (const PendulumTransition& t : traj) {
            const Eigen::MatrixXd cur = block(t.state);
            const Eigen::MatrixXd nxt = block(t.next_state);
            phi_sa.row(n) = cur.col(t.action).transpose();
            next_phi.middleRows(n * A, A) = nxt.transpose();
            const std::vector<double> p = pi.probs(nxt);
            for (int a = 0; a < A; ++a) next_probs(n, a) = p[static_cast<std::size_t>(a)];
            rewards(n) = t.reward;
            ++n;
        }
        const auto rows = phi_sa.middleRows(first, n - first);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
        latest_states.clear();
        for (const PendulumTransition& t : traj) latest_states.push_back(t.state);
    };

    auto collect = [&](int k, bool retry, double perturbation) {
        auto rs = rollout_streams(trial_seed, static_cast<std::uint64_t>(k), retry);
        auto behaviour = [&](PendulumState s) {
            std::vector<double> p = pi.probs(block(s));
            for (double& v : p) v = (1.0 - perturbation) * v + perturbation / A;
            return p;
        };
        add_samples(pendulum_rollout(spec, behaviour, cfg.steps_per_iteration, rs.actions));
    };

    // Refit theta from scratch on the full pool, then estimate the candidate.
    auto estimate = [&]() {
        const Eigen::VectorXd q_next = next_phi.topRows(n * A) * theta;
        Eigen::VectorXd targets(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = 0.0;
            for (int a = 0; a < A; ++a) v += next_probs(i, a) * q_next(i * A + a);
            targets(i) = rewards(i) + gamma * v;
        }
        const Eigen::VectorXd rhs = phi_sa.topRows(n).transpose() * targets;
        Eigen::MatrixXd full = gram.selfadjointView<Eigen::Lower>();
        theta = ridge_solve(full, rhs, cfg.ridge);

        std::vector<std::vector<PendulumState>> trajs{latest_states};
        const StateDistribution<PendulumState> d = empirical_visitation(trajs, gamma);
        std::vector<double> adv, l1;
        UpdateEstimate est;
        for (const PendulumState& s : d.states) {
            const Eigen::MatrixXd phi = block(s);
            const std::vector<double> pi_k = pi.probs(phi);
            std::vector<double> cand(pi_k.size());
            const Eigen::VectorXd q = phi.transpose() * theta;
            pi.step(q, pi_k, cand);
            adv.push_back(policy_advantage(std::span<const double>(q.data(), static_cast<std::size_t>(A)), pi_k, cand));
            l1.push_back(l1_distance(cand, pi_k));
            est.kl_max = std::max(est.kl_max, kl_divergence(cand, pi_k));
        }
        est.spi = spi_exact_quantities(l1, adv);
        est.advantage = expected_policy_advantage(std::move(adv), d.weights);
        return est;
    };

    // Mix the new level into the cached deployed probabilities at every s'.
    auto refresh_next_probs = [&](double zeta) {
        if (zeta <= 0.0) return;
        const Eigen::VectorXd q_next = next_phi.topRows(n * A) * theta;
        std::vector<double> prev(static_cast<std::size_t>(A)), cand(static_cast<std::size_t>(A));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int a = 0; a < A; ++a) prev[static_cast<std::size_t>(a)] = next_probs(i, a);
            pi.step(q_next.segment(i * A, A), prev, cand);
            for (int a = 0; a < A; ++a)
                next_probs(i, a) = zeta * cand[static_cast<std::size_t>(a)] + (1.0 - zeta) * prev[static_cast<std::size_t>(a)];
        }
    };

    try {
        for (int k = 0; k < cfg.iterations; ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            IterationRecord rec;
            rec.iteration = k;
            if (k > 0) {
                BoundReport r = decide_update(cfg, k, estimate());
                if (wants_retry(cfg, r)) {
                    collect(k, true, cfg.perturbation_rate);
                    r = decide_update(cfg, k, estimate());
                    r.rejected_retry = true;
                }
                refresh_next_probs(r.zeta);
                pi.push(theta, r.zeta);
                rec.report = r;
            }
            collect(k, false, 0.0);
            auto eval_actions = make_stream({eval_seed, tag(StreamTag::actions)});
            double total = 0.0;
            for (int e = 0; e < cfg.eval_episodes; ++e) {
                const auto ep = pendulum_rollout(spec, [&](PendulumState s) { return pi.probs(block(s)); },
                                                 spec.episode_steps, eval_actions);
                for (const auto& t : ep) total += t.reward;
            }
            rec.episode_return = total / cfg.eval_episodes;
            if (!std::isfinite(rec.episode_return) || !theta.allFinite()) throw std::runtime_error("non-finite values");
            rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.records.push_back(rec);
        }
    } catch (const std::exception& e) {
        result.error = "iteration " + std::to_string(result.records.size()) + ": " + e.what();
    }
    return result;
}

}  // namespace monotone_rl
