#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "agent.hpp"
#include "config.hpp"
#include "metrics.hpp"

namespace monotone_rl {

inline const char* kCsvHeader =
    "trial,iteration,method,return,zeta,zeta_star,expected_advantage,improvement_bound,c_k,kl_max,accepted,"
    "rejected_retry";

struct MetricsRow {
    int trial = 0;
    int iteration = 0;
    std::string method;
    double ret = 0.0;
    double zeta = 0.0;
    double zeta_star = 0.0;
    double expected_advantage = 0.0;
    double improvement_bound = 0.0;
    double c_k = 0.0;
    double kl_max = 0.0;
    bool accepted = true;
    bool rejected_retry = false;
};

inline std::string fmt12(double v) {
    if (v == 0.0) v = 0.0;  // drop negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_line(const MetricsRow& r) {
    std::string s = std::to_string(r.trial) + "," + std::to_string(r.iteration) + "," + r.method;
    for (double v : {r.ret, r.zeta, r.zeta_star, r.expected_advantage, r.improvement_bound, r.c_k, r.kl_max})
        s += "," + fmt12(v);
    s += r.accepted ? ",1" : ",0";
    s += r.rejected_retry ? ",1" : ",0";
    return s;
}

inline std::string to_csv(std::vector<MetricsRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.trial != b.trial) return a.trial < b.trial;
        return a.iteration < b.iteration;
    });
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) out += csv_line(r) + "\n";
    return out;
}

inline std::vector<MetricsRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("metrics.csv: unexpected header");
    std::vector<MetricsRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 12) throw std::runtime_error("metrics.csv line " + std::to_string(lineno) + ": expected 12 fields");
        try {
            MetricsRow r;
            r.trial = std::stoi(f[0]);
            r.iteration = std::stoi(f[1]);
            r.method = f[2];
            r.ret = std::stod(f[3]);
            r.zeta = std::stod(f[4]);
            r.zeta_star = std::stod(f[5]);
            r.expected_advantage = std::stod(f[6]);
            r.improvement_bound = std::stod(f[7]);
            r.c_k = std::stod(f[8]);
            r.kl_max = std::stod(f[9]);
            r.accepted = f[10] == "1";
            r.rejected_retry = f[11] == "1";
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw std::runtime_error("metrics.csv line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

inline MetricsRow to_row(const std::string& method, int trial, const IterationRecord& rec) {
    MetricsRow r;
    r.trial = trial;
    r.iteration = rec.iteration;
    r.method = method;
    r.ret = rec.episode_return;
    r.zeta = rec.report.zeta;
    r.zeta_star = rec.report.zeta_star;
    r.expected_advantage = rec.report.expected_advantage;
    r.improvement_bound = rec.report.improvement_bound;
    r.c_k = rec.report.c_k;
    r.kl_max = rec.report.kl_max;
    r.accepted = rec.report.accepted;
    r.rejected_retry = rec.report.rejected_retry;
    return r;
}

/// Results for every (agent, trial), indexed [agent][trial].
struct ExperimentResult {
    std::vector<std::vector<TrainResult>> runs;
    std::vector<MetricsRow> rows() const;
    const ExperimentConfig* config = nullptr;
};

inline TrainResult run_trial(const ExperimentConfig& cfg, const AgentConfig& agent, int trial) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
    if (cfg.environment == EnvironmentKind::gridworld)
        return train_tabular(gridworld_build(cfg.gridworld), cfg.gridworld.max_episode_steps, agent, seed);
    return train_pendulum(cfg.pendulum, agent, seed);
}

/// Fan trials out over `jobs` worker threads. Output order does not depend on scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
    ExperimentResult res;
    res.config = &cfg;
    const std::size_t n_agents = cfg.agents.size();
    res.runs.assign(n_agents, std::vector<TrainResult>(static_cast<std::size_t>(cfg.trials)));
    const std::size_t total = n_agents * static_cast<std::size_t>(cfg.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t a = i / static_cast<std::size_t>(cfg.trials);
            const int t = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
            res.runs[a][static_cast<std::size_t>(t)] = run_trial(cfg, cfg.agents[a], t);
        }
    };
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return res;
}

inline std::vector<MetricsRow> ExperimentResult::rows() const {
    std::vector<MetricsRow> out;
    for (std::size_t a = 0; a < runs.size(); ++a)
        for (std::size_t t = 0; t < runs[a].size(); ++t)
            for (const auto& rec : runs[a][t].records)
                out.push_back(to_row(config->agents[a].name, static_cast<int>(t), rec));
    return out;
}

/// Per-method return sequences, [method][trial] -> returns by iteration.
inline std::map<std::string, std::map<int, std::vector<double>>> returns_by_method(const std::vector<MetricsRow>& rows) {
    std::map<std::string, std::map<int, std::vector<std::pair<int, double>>>> tmp;
    for (const auto& r : rows) tmp[r.method][r.trial].emplace_back(r.iteration, r.ret);
    std::map<std::string, std::map<int, std::vector<double>>> out;
    for (auto& [m, trials] : tmp)
        for (auto& [t, seq] : trials) {
            std::sort(seq.begin(), seq.end());
            for (const auto& [it, v] : seq) out[m][t].push_back(v);
        }
    return out;
}

/// Per-trial oscillation for every method.
inline std::map<std::string, std::vector<OscillationResult>> oscillation_by_method(const std::vector<MetricsRow>& rows) {
    std::map<std::string, std::vector<OscillationResult>> out;
    for (const auto& [m, trials] : returns_by_method(rows))
        for (const auto& [t, seq] : trials)
            if (seq.size() >= 2) out[m].push_back(oscillation(seq));
    return out;
}

inline std::string summarize(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    const auto returns = returns_by_method(rows);
    const auto osc = oscillation_by_method(rows);
    std::vector<std::string> methods;
    for (const auto& [m, _] : returns) methods.push_back(m);

    std::map<std::string, std::vector<double>> zetas;
    for (const auto& r : rows)
        if (r.iteration > 0) zetas[r.method].push_back(r.zeta);

    out << "methods:";
    for (const auto& m : methods) out << ' ' << m << " (" << returns.at(m).size() << " trials)";
    out << "\n\nmean return per iteration (mean +/- sd over trials)\n";
    out << "iteration";
    for (const auto& m : methods) out << ',' << m << "_mean," << m << "_sd";
    out << '\n';
    std::map<std::string, Aggregate> agg;
    std::size_t len = 0;
    for (const auto& m : methods) {
        std::vector<std::vector<double>> per_trial;
        std::size_t shortest = SIZE_MAX;
        for (const auto& [t, seq] : returns.at(m)) shortest = std::min(shortest, seq.size());
        for (const auto& [t, seq] : returns.at(m)) per_trial.emplace_back(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(shortest));
        agg[m] = aggregate(per_trial);
        len = std::max(len, agg[m].mean.size());
    }
    for (std::size_t i = 0; i < len; ++i) {
        out << i;
        for (const auto& m : methods) {
            const Aggregate& a = agg[m];
            if (i < a.mean.size()) out << ',' << fmt12(a.mean[i]) << ',' << fmt12(a.sd[i]);
            else out << ",,";
        }
        out << '\n';
    }

    out << "\noscillation over trials (mean +/- sd)\n";
    out << "method,osc_inf_mean,osc_inf_sd,osc_2_mean,osc_2_sd,drops_mean,zeta_mean\n";
    for (const auto& m : methods) {
        std::vector<double> inf, two, drops;
        for (const auto& o : osc.count(m) ? osc.at(m) : std::vector<OscillationResult>{}) {
            inf.push_back(o.osc_inf);
            two.push_back(o.osc_2);
            drops.push_back(o.drop_count);
        }
        const SampleStats si = sample_stats(inf), s2 = sample_stats(two), sd = sample_stats(drops);
        const SampleStats sz = sample_stats(zetas[m]);
        out << m << ',' << fmt12(si.mean) << ',' << fmt12(si.sd) << ',' << fmt12(s2.mean) << ',' << fmt12(s2.sd)
            << ',' << fmt12(sd.mean) << ',' << fmt12(sz.mean) << '\n';
    }

    out << "\npairwise Welch t-tests on per-trial oscillation (two-sided; * marks p < 0.05)\n";
    out << "metric,method_a,method_b,t,dof,p,sig\n";
    for (const char* metric : {"osc_inf", "osc_2"}) {
        for (std::size_t i = 0; i < methods.size(); ++i)
            for (std::size_t j = i + 1; j < methods.size(); ++j) {
                auto pick = [&](const std::string& m) {
                    std::vector<double> v;
                    if (osc.count(m))
                        for (const auto& o : osc.at(m)) v.push_back(std::string(metric) == "osc_2" ? o.osc_2 : o.osc_inf);
                    return v;
                };
                const auto a = pick(methods[i]), b = pick(methods[j]);
                out << metric << ',' << methods[i] << ',' << methods[j] << ',';
                try {
                    const WelchResult w = welch_t_test(a, b);
                    out << fmt12(w.t) << ',' << fmt12(w.dof) << ',' << fmt12(w.p_two_sided) << ','
                        << (w.p_two_sided < 0.05 ? "*" : "") << '\n';
                } catch (const std::invalid_argument&) {
                    out << ",,,n/a\n";
                }
            }
    }
    return out.str();
}

}  // namespace monotone_rl
