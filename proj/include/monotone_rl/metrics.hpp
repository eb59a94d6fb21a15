#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace monotone_rl {

struct OscillationResult {
    double osc_inf = 0.0;
    double osc_2 = 0.0;
    int drop_count = 0;
};

/// Size of the drops R_{k+1} < R_k in a return sequence.
inline OscillationResult oscillation(std::span<const double> returns) {
    if (returns.size() < 2) throw std::invalid_argument("oscillation: need at least two returns");
    OscillationResult r;
    double sq = 0.0;
    for (std::size_t k = 0; k + 1 < returns.size(); ++k) {
        const double diff = returns[k + 1] - returns[k];
        if (diff < 0.0) {
            r.osc_inf = std::max(r.osc_inf, -diff);
            sq += diff * diff;
            ++r.drop_count;
        }
    }
    r.osc_2 = std::sqrt(sq);
    return r;
}

struct SampleStats {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n - 1)
    std::size_t n = 0;
};

inline SampleStats sample_stats(std::span<const double> x) {
    SampleStats s;
    s.n = x.size();
    if (x.empty()) return s;
    for (double v : x) s.mean += v;
    s.mean /= static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    }
    return s;
}

struct WelchResult {
    double t = 0.0;
    double dof = 0.0;
    double p_two_sided = 1.0;
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: need >= 2 samples per group");
    const SampleStats sa = sample_stats(a), sb = sample_stats(b);
    const double va = sa.sd * sa.sd / static_cast<double>(sa.n);
    const double vb = sb.sd * sb.sd / static_cast<double>(sb.n);
    const double se2 = va + vb;
    if (!(se2 > 0.0)) throw std::invalid_argument("welch_t_test: both samples have zero variance");
    WelchResult r;
    r.t = (sa.mean - sb.mean) / std::sqrt(se2);
    r.dof = se2 * se2 /
            (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
    const boost::math::students_t dist(r.dof);
    r.p_two_sided = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

/// Per-iteration mean and sample std over trials; rows are trials.
struct Aggregate {
    std::vector<double> mean;
    std::vector<double> sd;
};

inline Aggregate aggregate(const std::vector<std::vector<double>>& per_trial) {
    Aggregate out;
    if (per_trial.empty()) return out;
    const std::size_t len = per_trial.front().size();
    for (const auto& row : per_trial)
        if (row.size() != len) throw std::invalid_argument("aggregate: ragged trials");
    std::vector<double> column(per_trial.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t t = 0; t < per_trial.size(); ++t) column[t] = per_trial[t][i];
        const SampleStats s = sample_stats(column);
        out.mean.push_back(s.mean);
        out.sd.push_back(s.sd);
    }
    return out;
}

}  // namespace monotone_rl
