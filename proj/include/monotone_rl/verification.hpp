#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agent.hpp"
#include "bounds.hpp"
#include "distribution.hpp"
#include "tabular_value.hpp"

namespace monotone_rl {

/// Exact quantities around one tabular update pi_k -> mixture.
struct UpdateCheck {
    std::string agent;
    int trial = 0;
    int iteration = 0;
    double zeta = 0.0;
    bool accepted = true;
    bool has_bound = false;     // method claims an improvement bound
    double j_prev = 0.0;
    double j_new = 0.0;
    double improvement_bound = 0.0;
    double kl_max = 0.0;        // max_s KL(candidate || pi_k)
    double kl_limit = 0.0;      // 4 B_K + 2 C_K
    double d_shift = 0.0;       // || d^{mixture} - d^{pi_k} ||_1
    double d_shift_limit = 0.0;
    double approx_delta_j = 0.0;  // advantage evaluated under d^{pi_k}
    double approx_loss_limit = 0.0;
    bool spi_applicable = false;  // expected advantage >= 0 and delta * dA > 0
    double mi_cvi_bound = 0.0;
    double spi_bound = 0.0;

    double delta_j() const { return j_new - j_prev; }

    bool kl_ok() const { return kl_max <= kl_limit + 1e-12; }
    bool improvement_ok() const { return !has_bound || !accepted || delta_j() >= improvement_bound - 1e-8; }
    bool shift_ok() const { return d_shift <= d_shift_limit + 1e-12; }
    bool loss_ok() const { return std::abs(delta_j() - approx_delta_j) <= approx_loss_limit + 1e-12; }
    bool spi_consistent() const { return !spi_applicable || mi_cvi_bound <= spi_bound + 1e-12; }
};

inline UpdateCheck check_update(const TabularMDP& m, const AgentConfig& cfg, const TabularUpdate& u) {
    const BoundReport& r = u.report;
    UpdateCheck c;
    c.agent = cfg.name;
    c.iteration = u.iteration;
    c.zeta = r.zeta;
    c.accepted = r.accepted;
    c.has_bound = r.method != BoundMethod::none;
    c.j_prev = exact_return(m, u.previous);
    c.j_new = exact_return(m, u.deployed);
    c.improvement_bound = r.improvement_bound;
    c.kl_max = max_kl(u.candidate, u.previous);
    c.kl_limit = kl_bound(r.b_k, r.c_k);

    const Eigen::VectorXd d_prev = exact_stationary(m, u.previous);
    c.d_shift = (exact_stationary(m, u.deployed) - d_prev).lpNorm<1>();
    c.d_shift_limit = visitation_shift_bound(r.zeta, m.gamma, r.c_k);

    // Candidate advantage under the exact Q of pi_k, weighted by d^{pi_k}.
    const Eigen::VectorXd adv = policy_advantage(exact_policy_eval(m, u.previous), u.previous, u.candidate);
    const AdvantageReport rep = expected_policy_advantage(adv, d_prev);
    c.approx_delta_j = r.zeta * rep.expected / (1.0 - m.gamma);
    c.approx_loss_limit = first_order_loss_bound(m.gamma, rep.l1);

    const Eigen::VectorXd l1 = (u.candidate.matrix() - u.previous.matrix()).cwiseAbs().rowwise().sum();
    const SpiQuantities spi = spi_exact_quantities(std::span<const double>(l1.data(), l1.size()),
                                                   std::span<const double>(adv.data(), adv.size()));
    c.mi_cvi_bound = zeta_mi_cvi(rep.expected, m.gamma, r.c_k).bound;
    c.spi_applicable = rep.expected >= 0.0 && spi.delta * spi.delta_A > 0.0;
    if (c.spi_applicable) c.spi_bound = zeta_spi(rep.expected, m.gamma, spi.delta, spi.delta_A).bound;
    return c;
}

struct VerificationSummary {
    std::vector<UpdateCheck> checks;
    std::vector<double> final_zeta;  // per trial
    std::vector<std::string> errors;
    int kl_failures = 0;
    int improvement_failures = 0;
    int shift_failures = 0;
    int loss_failures = 0;
    int monotone_failures = 0;  // deployed J decreased under a bounded method

    int failures() const { return kl_failures + improvement_failures + shift_failures + loss_failures; }
    int inequality_checks() const { return static_cast<int>(checks.size()) * 4; }
};

/// Run every agent in exact-oracle mode and check all inequalities on every update.
inline VerificationSummary verify_tabular(const TabularMDP& m, int max_episode_steps,
                                          const std::vector<AgentConfig>& agents, int trials,
                                          std::uint64_t base_seed) {
    VerificationSummary out;
    for (AgentConfig cfg : agents) {
        cfg.oracle_mode = true;
        cfg.gamma = m.gamma;
        for (int t = 0; t < trials; ++t) {
            double last_zeta = 0.0;
            auto observer = [&](const TabularUpdate& u) {
                UpdateCheck c = check_update(m, cfg, u);
                c.trial = t;
                last_zeta = c.zeta;
                out.kl_failures += !c.kl_ok();
                out.improvement_failures += !c.improvement_ok();
                out.shift_failures += !c.shift_ok();
                out.loss_failures += !c.loss_ok();
                out.monotone_failures += c.has_bound && c.delta_j() < -1e-10;
                out.checks.push_back(c);
            };
            const TrainResult res = train_tabular(m, max_episode_steps, cfg, base_seed + static_cast<std::uint64_t>(t),
                                                  observer);
            if (!res.error.empty()) out.errors.push_back(cfg.name + " trial " + std::to_string(t) + ": " + res.error);
            out.final_zeta.push_back(last_zeta);
        }
    }
    return out;
}

}  // namespace monotone_rl
