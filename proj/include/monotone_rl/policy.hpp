#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace monotone_rl {

struct RegularizationParams {
    double tau = 0.05;    // entropy weight
    double sigma = 0.45;  // KL weight

    double alpha() const { return tau / (tau + sigma); }
    double beta() const { return 1.0 / (tau + sigma); }

    void validate() const {
        if (tau < 0.0 || sigma < 0.0 || !(tau + sigma > 0.0))
            throw std::invalid_argument("regularization: need tau, sigma >= 0 and tau + sigma > 0");
    }
};

inline constexpr double kLogFloor = 1e-300;

/// pi_new(a) proportional to prev(a)^alpha * exp(beta * q(a)), evaluated in log space.
inline void entropy_regularized_update(std::span<const double> q, std::span<const double> prev,
                                       double alpha, double beta, std::span<double> out) {
    const std::size_t n = q.size();
    if (prev.size() != n || out.size() != n)
        throw std::invalid_argument("entropy_regularized_update: size mismatch");
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        if (!std::isfinite(q[a])) throw std::domain_error("entropy_regularized_update: non-finite Q");
        if (!(prev[a] > 0.0))
            throw std::domain_error("entropy_regularized_update: previous policy must be positive");
        out[a] = alpha * std::log(prev[a]) + beta * q[a];
        top = std::max(top, out[a]);
    }
    double z = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        out[a] = std::exp(out[a] - top);
        z += out[a];
    }
    for (std::size_t a = 0; a < n; ++a) out[a] /= z;
}

inline std::vector<double> entropy_regularized_update(std::span<const double> q,
                                                      std::span<const double> prev,
                                                      const RegularizationParams& params) {
    std::vector<double> out(q.size());
    entropy_regularized_update(q, prev, params.alpha(), params.beta(), out);
    return out;
}

/// KL(p || q) at one state, 0 log 0 = 0.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] <= 0.0) continue;
        if (!(q[a] > 0.0)) throw std::domain_error("kl_divergence: support violation");
        kl += p[a] * (std::log(std::max(p[a], kLogFloor)) - std::log(std::max(q[a], kLogFloor)));
    }
    return std::max(kl, 0.0);
}

inline double l1_distance(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) s += std::abs(p[a] - q[a]);
    return s;
}

/// Table pi[s][a]; each row is a distribution.
class TabularPolicy {
public:
    TabularPolicy() = default;
    explicit TabularPolicy(Eigen::MatrixXd probs) : p_(std::move(probs)) { validate(); }

    static TabularPolicy uniform(int n_states, int n_actions) {
        return TabularPolicy(Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions));
    }

    int n_states() const { return static_cast<int>(p_.rows()); }
    int n_actions() const { return static_cast<int>(p_.cols()); }
    double operator()(int s, int a) const { return p_(s, a); }
    const Eigen::MatrixXd& matrix() const { return p_; }

    // Row-major copy of one state's distribution.
    std::vector<double> at(int s) const {
        std::vector<double> v(static_cast<std::size_t>(n_actions()));
        for (int a = 0; a < n_actions(); ++a) v[static_cast<std::size_t>(a)] = p_(s, a);
        return v;
    }

    void validate() const {
        for (Eigen::Index s = 0; s < p_.rows(); ++s) {
            if ((p_.row(s).array() < 0.0).any() || !p_.row(s).allFinite())
                throw std::invalid_argument("policy: invalid probabilities");
            if (std::abs(p_.row(s).sum() - 1.0) > 1e-10)
                throw std::invalid_argument("policy: row does not sum to 1");
        }
    }

private:
    Eigen::MatrixXd p_;
};

/// Candidate policy from a tabular Q and the previous policy.
inline TabularPolicy entropy_regularized_update(const Eigen::MatrixXd& q, const TabularPolicy& prev,
                                                const RegularizationParams& params) {
    const int S = prev.n_states(), A = prev.n_actions();
    Eigen::MatrixXd out(S, A);
    std::vector<double> qs(A), ps(A), o(A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            qs[a] = q(s, a);
            ps[a] = prev(s, a);
        }
        entropy_regularized_update(qs, ps, params.alpha(), params.beta(), o);
        for (int a = 0; a < A; ++a) out(s, a) = o[a];
    }
    return TabularPolicy(std::move(out));
}

inline TabularPolicy mixture(const TabularPolicy& pi_new, const TabularPolicy& pi_old, double zeta) {
    if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::invalid_argument("mixture: zeta outside [0,1]");
    if (pi_new.n_states() != pi_old.n_states() || pi_new.n_actions() != pi_old.n_actions())
        throw std::invalid_argument("mixture: support mismatch");
    if (zeta == 1.0) return pi_new;
    if (zeta == 0.0) return pi_old;
    return TabularPolicy(zeta * pi_new.matrix() + (1.0 - zeta) * pi_old.matrix());
}

/// max over states of KL(pi_a(.|s) || pi_b(.|s)).
inline double max_kl(const TabularPolicy& pi_a, const TabularPolicy& pi_b) {
    double best = 0.0;
    for (int s = 0; s < pi_a.n_states(); ++s)
        best = std::max(best, kl_divergence(pi_a.at(s), pi_b.at(s)));
    return best;
}

/// max over states of sum_a |pi_a - pi_b|.
inline double max_tv(const TabularPolicy& pi_a, const TabularPolicy& pi_b) {
    return (pi_a.matrix() - pi_b.matrix()).cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace monotone_rl
