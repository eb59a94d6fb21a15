// Command-line front end: run, verify, report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "monotone_rl/config.hpp"
#include "monotone_rl/experiment.hpp"
#include "monotone_rl/verification.hpp"

namespace fs = std::filesystem;
using namespace monotone_rl;

namespace {

constexpr int kOk = 0, kUsage = 1, kConfig = 2, kVerify = 3;

int resolve_jobs(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("MONOTONE_RL_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring MONOTONE_RL_JOBS='" << env << "'\n";
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

int cmd_run(const std::string& config_path, const std::string& output_override, bool force, int jobs_flag) {
    std::string text;
    ExperimentConfig cfg;
    try {
        text = read_file(config_path);
        cfg = parse_config(text);
    } catch (const ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return kConfig;
    }
    const fs::path out = output_override.empty() ? fs::path(cfg.output_dir) : fs::path(output_override);
    if (fs::exists(out) && !force) {
        std::cerr << "output directory '" << out.string() << "' exists; pass --force to overwrite\n";
        return kUsage;
    }
    fs::create_directories(out);
    write_text(out / "config.ini", text);

    const int jobs = resolve_jobs(jobs_flag);
    std::cerr << "running " << cfg.agents.size() << " agents x " << cfg.trials << " trials on " << jobs
              << " worker(s)\n";
    const ExperimentResult res = run_experiment(cfg, jobs);
    int aborted = 0;
    for (std::size_t a = 0; a < res.runs.size(); ++a)
        for (std::size_t t = 0; t < res.runs[a].size(); ++t)
            if (!res.runs[a][t].error.empty()) {
                ++aborted;
                std::cerr << cfg.agents[a].name << " trial " << t << " aborted: " << res.runs[a][t].error << '\n';
            }
    const auto rows = res.rows();
    const std::string csv = to_csv(rows);
    write_text(out / "metrics.csv", csv);
    // summarize the rounded values so `report` reproduces this file exactly
    write_text(out / "summary.txt", summarize(parse_csv(csv)));
    std::cerr << "wrote " << rows.size() << " rows to " << (out / "metrics.csv").string() << '\n';
    return aborted ? kVerify : kOk;
}

void print_check(const UpdateCheck& c) {
    std::cout << "  " << c.agent << " trial " << c.trial << " iteration " << c.iteration << ": zeta=" << fmt12(c.zeta)
              << " dJ=" << fmt12(c.delta_j()) << " bound=" << fmt12(c.improvement_bound)
              << " kl=" << fmt12(c.kl_max) << " kl_limit=" << fmt12(c.kl_limit) << " d_shift=" << fmt12(c.d_shift)
              << " d_limit=" << fmt12(c.d_shift_limit)
              << " approx_loss=" << fmt12(std::abs(c.delta_j() - c.approx_delta_j))
              << " loss_limit=" << fmt12(c.approx_loss_limit) << '\n';
}

int cmd_verify(const std::string& config_path) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config(read_file(config_path));
    } catch (const ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return kConfig;
    }
    if (cfg.environment != EnvironmentKind::gridworld) {
        std::cerr << config_path << ": verify needs a tabular environment (gridworld)\n";
        return kConfig;
    }
    const VerificationSummary s =
        verify_tabular(gridworld_build(cfg.gridworld), cfg.gridworld.max_episode_steps, cfg.agents, cfg.trials,
                       cfg.base_seed);
    for (const auto& e : s.errors) std::cout << "aborted: " << e << '\n';
    if (s.failures() == 0 && s.errors.empty()) {
        std::cout << "all " << s.inequality_checks() << " inequality checks passed\n";
        return kOk;
    }
    struct Kind {
        const char* name;
        int count;
        bool (UpdateCheck::*ok)() const;
    };
    const Kind kinds[] = {{"kl <= 4 B_K + 2 C_K", s.kl_failures, &UpdateCheck::kl_ok},
                          {"dJ >= improvement bound", s.improvement_failures, &UpdateCheck::improvement_ok},
                          {"||d_new - d_old||_1 <= distribution-shift bound", s.shift_failures, &UpdateCheck::shift_ok},
                          {"|dJ - dJ_approx| <= (1-gamma) ||A||_1^2", s.loss_failures, &UpdateCheck::loss_ok}};
    for (const Kind& k : kinds) {
        std::cout << k.name << ": " << k.count << " violation(s) out of " << s.checks.size() << '\n';
        int shown = 0;
        for (const auto& c : s.checks)
            if (!(c.*k.ok)() && shown++ < 3) print_check(c);
    }
    return kVerify;
}

int cmd_report(const std::string& dir) {
    const fs::path csv = fs::path(dir) / "metrics.csv";
    try {
        const std::string summary = summarize(parse_csv(read_file(csv.string())));
        std::cout << summary;
        write_text(fs::path(dir) / "summary.txt", summary);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kConfig;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-regularized policy iteration with safe interpolation: experiments and checks"};
    app.require_subcommand(1);

    std::string config, output, dir;
    bool force = false;
    int jobs = 0;
    auto* run = app.add_subcommand("run", "run every agent in the config over all trials");
    run->add_option("config", config, "experiment config file")->required();
    run->add_option("-o,--output", output, "output directory (overrides output_dir)");
    run->add_flag("--force", force, "overwrite an existing output directory");
    run->add_option("--jobs", jobs, "worker threads (default: MONOTONE_RL_JOBS or all cores)")
        ->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "check the improvement inequalities with exact evaluation");
    verify->add_option("config", config, "experiment config file")->required();

    auto* report = app.add_subcommand("report", "recompute summary.txt from a run directory");
    report->add_option("output-dir", dir, "directory containing metrics.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        if (*run) return cmd_run(config, output, force, jobs);
        if (*verify) return cmd_verify(config);
        return cmd_report(dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    }
}
