#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agent.hpp"
#include "pendulum.hpp"
#include "tabular_mdp.hpp"

namespace monotone_rl {

// Flat key = value text with [section] headers, '#' or ';' comments.
//
//   name = gridworld_study
//   environment = gridworld
//   trials = 100
//   [gridworld]
//   danger = 1,2 2,2 3,2
//   [agent mi_cvi]
//   method = mi_cvi
//
// Top-level agent keys (tau, iterations, ...) act as defaults for every
// [agent NAME] section.

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& msg)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct IniEntry {
    std::string value;
    int line = 0;
};

struct IniSection {
    std::string name;  // "" for top level, "gridworld", "agent NAME"
    int line = 0;
    std::map<std::string, IniEntry> entries;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<IniSection> parse_ini(const std::string& text) {
    std::vector<IniSection> sections(1);
    std::set<std::string> seen{""};
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            std::istringstream words(name);
            std::string w, norm;
            while (words >> w) norm += (norm.empty() ? "" : " ") + w;
            if (norm.empty()) throw ConfigError(lineno, "empty section name");
            if (!seen.insert(norm).second) throw ConfigError(lineno, "duplicate section [" + norm + "]");
            sections.push_back({norm, lineno, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(lineno, "missing key before '='");
        auto& entries = sections.back().entries;
        if (entries.count(key)) throw ConfigError(lineno, "duplicate key '" + key + "'");
        entries[key] = {value, lineno};
    }
    return sections;
}

enum class EnvironmentKind { gridworld, pendulum };

struct ExperimentConfig {
    std::string name = "experiment";
    EnvironmentKind environment = EnvironmentKind::gridworld;
    GridworldSpec gridworld;
    PendulumSpec pendulum;
    std::vector<AgentConfig> agents;
    int trials = 100;
    std::uint64_t base_seed = 0;
    std::string output_dir = "results";
    bool oracle_mode = false;
    double gamma = 0.95;
};

namespace detail {

inline double to_double(const IniEntry& e, const std::string& key) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (e.value.empty() || end != s + e.value.size() || errno == ERANGE)
        throw ConfigError(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
    return v;
}

inline long long to_int(const IniEntry& e, const std::string& key) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s, &end, 10);
    if (e.value.empty() || end != s + e.value.size() || errno == ERANGE)
        throw ConfigError(e.line, "'" + key + "' expects an integer, got '" + e.value + "'");
    return v;
}

inline bool to_bool(const IniEntry& e, const std::string& key) {
    if (e.value == "true" || e.value == "1" || e.value == "yes" || e.value == "on") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no" || e.value == "off") return false;
    throw ConfigError(e.line, "'" + key + "' expects true/false, got '" + e.value + "'");
}

inline std::vector<double> to_list(const IniEntry& e, const std::string& key) {
    std::string s = e.value;
    for (char& c : s)
        if (c == ',') c = ' ';
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_double({tok, e.line}, key));
    return out;
}

inline Cell to_cell(const IniEntry& e, const std::string& key) {
    const auto v = to_list(e, key);
    if (v.size() != 2) throw ConfigError(e.line, "'" + key + "' expects 'x,y'");
    return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

// Cells separated by whitespace, coordinates by commas: "1,2 2,2 3,2".
inline std::vector<Cell> to_cells(const IniEntry& e, const std::string& key) {
    std::istringstream in(e.value);
    std::vector<Cell> cells;
    std::string tok;
    while (in >> tok) cells.push_back(to_cell({tok, e.line}, key));
    return cells;
}

// Applies agent keys found in `sec`; returns false for keys it does not know.
inline bool apply_agent_key(AgentConfig& a, const std::string& key, const IniEntry& e) {
    if (key == "method") {
        const auto m = parse_method(e.value);
        if (!m) throw ConfigError(e.line, "unknown method '" + e.value + "' (cvi, mi_cvi, spi_exact, spi_approx)");
        a.method = *m;
    } else if (key == "tau") a.regularization.tau = to_double(e, key);
    else if (key == "sigma") a.regularization.sigma = to_double(e, key);
    else if (key == "iterations") a.iterations = static_cast<int>(to_int(e, key));
    else if (key == "steps_per_iteration") a.steps_per_iteration = static_cast<int>(to_int(e, key));
    else if (key == "rejection") a.rejection_enabled = to_bool(e, key);
    else if (key == "perturbation_rate") a.perturbation_rate = to_double(e, key);
    else if (key == "epsilon") a.epsilon = to_double(e, key);
    else if (key == "zeta_override") a.zeta_override = to_double(e, key);
    else if (key == "eval_episodes") a.eval_episodes = static_cast<int>(to_int(e, key));
    else if (key == "features") a.features = static_cast<int>(to_int(e, key));
    else if (key == "ridge") a.ridge = to_double(e, key);
    else return false;
    return true;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    using namespace detail;
    const auto sections = parse_ini(text);
    ExperimentConfig cfg;
    AgentConfig defaults;
    bool steps_set = false, eval_set = false;

    const IniSection& top = sections.front();
    std::vector<std::pair<std::string, IniEntry>> agent_defaults;
    for (const auto& [key, e] : top.entries) {
        if (key == "name") cfg.name = e.value;
        else if (key == "environment") {
            if (e.value == "gridworld") cfg.environment = EnvironmentKind::gridworld;
            else if (e.value == "pendulum") cfg.environment = EnvironmentKind::pendulum;
            else throw ConfigError(e.line, "unknown environment '" + e.value + "' (gridworld, pendulum)");
        } else if (key == "trials") {
            cfg.trials = static_cast<int>(to_int(e, key));
            if (cfg.trials < 1) throw ConfigError(e.line, "trials must be >= 1");
        } else if (key == "base_seed") {
            const long long s = to_int(e, key);
            if (s < 0) throw ConfigError(e.line, "base_seed must be >= 0");
            cfg.base_seed = static_cast<std::uint64_t>(s);
        } else if (key == "output_dir") cfg.output_dir = e.value;
        else if (key == "oracle_mode") cfg.oracle_mode = to_bool(e, key);
        else if (key == "gamma") {
            cfg.gamma = to_double(e, key);
            if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError(e.line, "gamma must lie in (0,1)");
        } else agent_defaults.emplace_back(key, e);
    }
    for (const auto& [key, e] : agent_defaults) {
        if (!apply_agent_key(defaults, key, e)) throw ConfigError(e.line, "unknown key '" + key + "'");
        steps_set |= key == "steps_per_iteration";
        eval_set |= key == "eval_episodes";
    }
    if (cfg.environment == EnvironmentKind::pendulum) {
        if (!steps_set) defaults.steps_per_iteration = 200;
        if (!eval_set) defaults.eval_episodes = 1;
    }

    for (std::size_t i = 1; i < sections.size(); ++i) {
        const IniSection& sec = sections[i];
        if (sec.name == "gridworld") {
            GridworldSpec& g = cfg.gridworld;
            for (const auto& [key, e] : sec.entries) {
                if (key == "width") g.width = static_cast<int>(to_int(e, key));
                else if (key == "height") g.height = static_cast<int>(to_int(e, key));
                else if (key == "start") g.start = to_cell(e, key);
                else if (key == "goal") g.goal = to_cell(e, key);
                else if (key == "danger") g.danger_cells = to_cells(e, key);
                else if (key == "move_success_prob") g.move_success_prob = to_double(e, key);
                else if (key == "step_reward") g.step_reward = to_double(e, key);
                else if (key == "goal_reward") g.goal_reward = to_double(e, key);
                else if (key == "danger_reward") g.danger_reward = to_double(e, key);
                else if (key == "max_episode_steps") g.max_episode_steps = static_cast<int>(to_int(e, key));
                else throw ConfigError(e.line, "unknown gridworld key '" + key + "'");
            }
            try {
                g.validate();
            } catch (const std::invalid_argument& ex) {
                throw ConfigError(sec.line, ex.what());
            }
        } else if (sec.name == "pendulum") {
            PendulumSpec& p = cfg.pendulum;
            for (const auto& [key, e] : sec.entries) {
                if (key == "length") p.length = to_double(e, key);
                else if (key == "mass") p.mass = to_double(e, key);
                else if (key == "torques") p.torques = to_list(e, key);
                else if (key == "dt") p.dt = to_double(e, key);
                else if (key == "max_speed") p.max_speed = to_double(e, key);
                else if (key == "reward_scale") p.reward_scale = to_double(e, key);
                else if (key == "angle_weight") p.angle_weight = to_double(e, key);
                else if (key == "velocity_weight") p.velocity_weight = to_double(e, key);
                else if (key == "episode_steps") p.episode_steps = static_cast<int>(to_int(e, key));
                else if (key == "gravity") p.gravity = to_double(e, key);
                else if (key == "start_angle") p.start_angle = to_double(e, key);
                else if (key == "start_speed") p.start_speed = to_double(e, key);
                else throw ConfigError(e.line, "unknown pendulum key '" + key + "'");
            }
            try {
                p.validate();
            } catch (const std::invalid_argument& ex) {
                throw ConfigError(sec.line, ex.what());
            }
        } else if (sec.name.rfind("agent ", 0) == 0) {
            AgentConfig a = defaults;
            a.name = sec.name.substr(6);
            if (a.name.find_first_of(",\"") != std::string::npos)
                throw ConfigError(sec.line, "agent names may not contain ',' or '\"'");
            if (const auto m = parse_method(a.name)) a.method = *m;
            bool has_method = static_cast<bool>(parse_method(a.name));
            for (const auto& [key, e] : sec.entries) {
                if (!apply_agent_key(a, key, e)) throw ConfigError(e.line, "unknown agent key '" + key + "'");
                has_method |= key == "method";
            }
            if (!has_method) throw ConfigError(sec.line, "agent '" + a.name + "' needs a method");
            cfg.agents.push_back(a);
        } else {
            throw ConfigError(sec.line, "unknown section [" + sec.name + "]");
        }
    }
    if (cfg.agents.empty()) throw ConfigError(0, "no [agent NAME] sections");

    cfg.gridworld.gamma = cfg.gamma;
    cfg.pendulum.gamma = cfg.gamma;
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        AgentConfig& a = cfg.agents[i];
        a.gamma = cfg.gamma;
        a.oracle_mode = cfg.oracle_mode;
        try {
            a.validate();
        } catch (const std::invalid_argument& ex) {
            int line = 0;
            for (const auto& sec : sections)
                if (sec.name == "agent " + a.name) line = sec.line;
            throw ConfigError(line, ex.what());
        }
    }
    return cfg;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(0, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace monotone_rl
