#include "tw/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tw {

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::InitEq: return "init-eq";
        case Scenario::SweepG: return "sweep-g";
        case Scenario::Quench: return "quench";
        case Scenario::Validate: return "validate";
        case Scenario::MemoryCheck: return "memory-check";
        case Scenario::Unset: break;
    }
    return "unset";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "init-eq") return Scenario::InitEq;
    if (name == "sweep-g") return Scenario::SweepG;
    if (name == "quench") return Scenario::Quench;
    if (name == "validate") return Scenario::Validate;
    if (name == "memory-check") return Scenario::MemoryCheck;
    throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v, int line) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "': cannot parse '" + v + "' as a number");
    }
}

int parse_int(const std::string& key, const std::string& v, int line) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "': cannot parse '" + v + "' as an integer");
    }
}

bool parse_bool(const std::string& key, const std::string& v, int line) {
    if (v == "0" || v == "false") return false;
    if (v == "1" || v == "true") return true;
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                      "': expected 0/1, got '" + v + "'");
}

void require_range(bool ok, const std::string& key, int line, const std::string& what) {
    if (!ok)
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' " + what);
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    bool seen_n = false, seen_beta = false, seen_delta = false, seen_gb = false,
         seen_ga = false;

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty key or value");

        if (key == "N_total") {
            cfg.params.n_total = parse_double(key, val, line);
            require_range(cfg.params.n_total > 0.0, key, line, "must be > 0");
            seen_n = true;
        } else if (key == "beta") {
            cfg.params.beta = parse_double(key, val, line);
            require_range(cfg.params.beta > 0.0, key, line, "must be > 0");
            seen_beta = true;
        } else if (key == "Delta") {
            cfg.params.delta = parse_double(key, val, line);
            require_range(cfg.params.delta > 0.0, key, line, "must be > 0");
            seen_delta = true;
        } else if (key == "gbar_before") {
            cfg.params.gbar_before = parse_double(key, val, line);
            require_range(cfg.params.gbar_before >= 0.0, key, line, "must be >= 0");
            seen_gb = true;
        } else if (key == "gbar_after") {
            cfg.params.gbar_after = parse_double(key, val, line);
            require_range(cfg.params.gbar_after >= 0.0, key, line, "must be >= 0");
            seen_ga = true;
        } else if (key == "dt") {
            cfg.evolution.dt = parse_double(key, val, line);
            require_range(cfg.evolution.dt > 0.0, key, line, "must be > 0");
        } else if (key == "t_max") {
            cfg.evolution.t_max = parse_double(key, val, line);
            require_range(cfg.evolution.t_max > 0.0, key, line, "must be > 0");
        } else if (key == "sc_tol") {
            cfg.evolution.sc_tol = parse_double(key, val, line);
            require_range(cfg.evolution.sc_tol > 0.0, key, line, "must be > 0");
        } else if (key == "sc_max_iter") {
            cfg.evolution.sc_max_iter = parse_int(key, val, line);
            require_range(cfg.evolution.sc_max_iter >= 1, key, line, "must be >= 1");
        } else if (key == "output_stride") {
            cfg.evolution.output_stride = parse_int(key, val, line);
            require_range(cfg.evolution.output_stride >= 1, key, line, "must be >= 1");
        } else if (key == "zero_offdiag") {
            cfg.evolution.zero_offdiag = parse_bool(key, val, line);
        } else if (key == "scenario") {
            try {
                cfg.scenario = scenario_from_string(val);
            } catch (const ConfigError&) {
                throw ConfigError("line " + std::to_string(line) +
                                  ": unknown scenario '" + val + "'");
            }
        } else if (key == "output_dir") {
            cfg.output_dir = val;
        } else if (key == "parallel") {
            cfg.parallel = parse_bool(key, val, line);
        } else if (key == "sweep_gbar_max") {
            cfg.sweep_gbar_max = parse_double(key, val, line);
            require_range(cfg.sweep_gbar_max >= 0.0, key, line, "must be >= 0");
        } else if (key == "sweep_gbar_step") {
            cfg.sweep_gbar_step = parse_double(key, val, line);
            require_range(cfg.sweep_gbar_step > 0.0, key, line, "must be > 0");
        } else if (key == "mc_k_points") {
            cfg.mc_k_points = parse_int(key, val, line);
            require_range(cfg.mc_k_points >= 16, key, line, "must be >= 16");
        } else {
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key +
                              "'");
        }
    }

    std::string missing;
    if (!seen_n) missing += " N_total";
    if (!seen_beta) missing += " beta";
    if (!seen_delta) missing += " Delta";
    if (!seen_gb) missing += " gbar_before";
    if (!seen_ga) missing += " gbar_after";
    if (!missing.empty())
        throw ConfigError("missing mandatory key(s):" + missing);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# resolved configuration\n";
    os << "N_total = " << fmt17(cfg.params.n_total) << "\n";
    os << "beta = " << fmt17(cfg.params.beta) << "\n";
    os << "Delta = " << fmt17(cfg.params.delta) << "\n";
    os << "gbar_before = " << fmt17(cfg.params.gbar_before) << "\n";
    os << "gbar_after = " << fmt17(cfg.params.gbar_after) << "\n";
    os << "dt = " << fmt17(cfg.evolution.dt) << "\n";
    os << "t_max = " << fmt17(cfg.evolution.t_max) << "\n";
    os << "sc_tol = " << fmt17(cfg.evolution.sc_tol) << "\n";
    os << "sc_max_iter = " << cfg.evolution.sc_max_iter << "\n";
    os << "output_stride = " << cfg.evolution.output_stride << "\n";
    os << "zero_offdiag = " << (cfg.evolution.zero_offdiag ? 1 : 0) << "\n";
    if (cfg.scenario != Scenario::Unset) os << "scenario = " << to_string(cfg.scenario) << "\n";
    os << "output_dir = " << cfg.output_dir << "\n";
    os << "parallel = " << (cfg.parallel ? 1 : 0) << "\n";
    os << "sweep_gbar_max = " << fmt17(cfg.sweep_gbar_max) << "\n";
    os << "sweep_gbar_step = " << fmt17(cfg.sweep_gbar_step) << "\n";
    os << "mc_k_points = " << cfg.mc_k_points << "\n";
    return os.str();
}

} // namespace tw
