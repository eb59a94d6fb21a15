#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace monotone_rl {

// Closed-form coefficients and step sizes for interpolated policy updates.
// Every step-size rule below maximizes a quadratic surrogate
//     g(zeta) = zeta * A - kappa * zeta^2
// over [0, 1]; they differ only in kappa.

inline void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
}

/// C_K = beta * sum_{k=0}^{K-1} alpha^k gamma^{K-k-1}
inline double c_k(double alpha, double beta, double gamma, int K) {
    if (K < 1) throw std::invalid_argument("c_k: K must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("c_k: alpha outside [0,1]");
    if (!(beta > 0.0)) throw std::invalid_argument("c_k: beta must be positive");
    check_gamma(gamma);
    double sum = 0.0, ak = 1.0;
    for (int k = 0; k < K; ++k) {
        sum += ak * std::pow(gamma, K - k - 1);
        ak *= alpha;
    }
    return beta * sum;
}

/// B_K = (1 - gamma^K) / (1 - gamma) * epsilon * beta
inline double b_k(double beta, double gamma, double epsilon, int K) {
    if (K < 0) throw std::invalid_argument("b_k: K must be >= 0");
    check_gamma(gamma);
    return (1.0 - std::pow(gamma, K)) / (1.0 - gamma) * epsilon * beta;
}

inline double kl_bound(double B_K, double C_K) { return 4.0 * B_K + 2.0 * C_K; }

struct ZetaChoice {
    double zeta_star = 0.0;  // unclamped maximizer
    double zeta = 0.0;       // clamped to [0,1]
    double bound = 0.0;      // surrogate value at zeta
};

inline double surrogate(double A, double kappa, double zeta) { return zeta * A - kappa * zeta * zeta; }

/// Maximize g over [0,1]. A < 0 gives zeta = 0, bound 0 (the caller decides
/// whether that means rejection). kappa = 0 gives zeta = 1.
inline ZetaChoice maximize_surrogate(double A, double kappa) {
    if (!std::isfinite(A) || !std::isfinite(kappa) || kappa < 0.0)
        throw std::invalid_argument("maximize_surrogate: bad coefficients");
    ZetaChoice c;
    if (A <= 0.0) return c;
    if (kappa == 0.0) {
        c.zeta_star = 1.0;
        c.zeta = 1.0;
        c.bound = A;
        return c;
    }
    c.zeta_star = A / (2.0 * kappa);
    c.zeta = std::min(1.0, c.zeta_star);
    c.bound = surrogate(A, kappa, c.zeta);
    return c;
}

inline double kappa_mi_cvi(double gamma, double C_K) {
    const double h = 1.0 - gamma;
    return 4.0 * gamma * C_K / (h * h * h);
}

inline double kappa_spi(double gamma, double delta, double delta_A) {
    const double h = 1.0 - gamma;
    return gamma * delta * delta_A / (2.0 * h * h);
}

inline double kappa_spi_approx(double gamma) {
    const double h = 1.0 - gamma;
    return 2.0 * gamma / (h * h * h);
}

/// zeta* = (1-g)^3 A / (8 g C_K), bound (1-g)^3 A^2 / (16 g C_K) when unclamped.
inline ZetaChoice zeta_mi_cvi(double expected_advantage, double gamma, double C_K) {
    check_gamma(gamma);
    if (!(C_K > 0.0)) throw std::invalid_argument("zeta_mi_cvi: C_K must be positive");
    return maximize_surrogate(expected_advantage, kappa_mi_cvi(gamma, C_K));
}

/// zeta* = (1-g)^2 A / (g delta dA), bound ((1-g) A)^2 / (2 g delta dA).
/// delta * dA = 0 imposes no constraint.
inline ZetaChoice zeta_spi(double expected_advantage, double gamma, double delta, double delta_A) {
    check_gamma(gamma);
    if (delta < 0.0 || delta_A < 0.0) throw std::invalid_argument("zeta_spi: negative delta");
    return maximize_surrogate(expected_advantage, kappa_spi(gamma, delta, delta_A));
}

struct SpiQuantities {
    double delta = 0.0;    // max_s sum_a |pi_new - pi|
    double delta_A = 0.0;  // max_s A(s) - min_s A(s)
};

/// From per-state policy L1 distances and per-state advantages over the same states.
inline SpiQuantities spi_exact_quantities(std::span<const double> l1_per_state,
                                          std::span<const double> advantage) {
    if (l1_per_state.empty() || advantage.empty())
        throw std::invalid_argument("spi_exact_quantities: empty state set");
    SpiQuantities q;
    q.delta = *std::max_element(l1_per_state.begin(), l1_per_state.end());
    const auto [lo, hi] = std::minmax_element(advantage.begin(), advantage.end());
    q.delta_A = *hi - *lo;
    return q;
}

/// zeta_spi with delta * dA relaxed to 4 / (1 - g).
inline ZetaChoice zeta_spi_approx(double expected_advantage, double gamma) {
    check_gamma(gamma);
    return maximize_surrogate(expected_advantage, kappa_spi_approx(gamma));
}

/// Bound on || d^{mixture} - d^{pi_k} ||_1.
inline double visitation_shift_bound(double zeta, double gamma, double C_K) {
    check_gamma(gamma);
    const double h = 1.0 - gamma;
    return 2.0 * zeta * gamma * std::sqrt(C_K) / (h * h);
}

/// Loss from evaluating the advantage under d^{pi_k} instead of d^{pi_new}.
inline double first_order_loss_bound(double gamma, double a_l1) {
    check_gamma(gamma);
    return (1.0 - gamma) * a_l1 * a_l1;
}

enum class BoundMethod { none, mi_cvi, spi_exact, spi_approx };

inline std::string to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::mi_cvi: return "mi_cvi";
        case BoundMethod::spi_exact: return "spi_exact";
        case BoundMethod::spi_approx: return "spi_approx";
        default: return "none";
    }
}

/// Everything decided in one update step.
struct BoundReport {
    int K = 0;
    double c_k = 0.0;
    double b_k = 0.0;
    double expected_advantage = 0.0;
    double advantage_l1 = 0.0;
    double zeta_star = 0.0;
    double zeta = 0.0;
    double improvement_bound = 0.0;
    BoundMethod method = BoundMethod::none;
    double delta = 0.0;
    double delta_A = 0.0;
    double kl_max = 0.0;
    bool accepted = true;
    bool rejected_retry = false;
};

}  // namespace monotone_rl
