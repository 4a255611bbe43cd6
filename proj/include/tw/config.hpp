#ifndef TW_CONFIG_HPP
#define TW_CONFIG_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "tw/evolution.hpp"
#include "tw/model.hpp"

namespace tw {

enum class Scenario { InitEq, SweepG, Quench, Validate, MemoryCheck, Unset };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

// Fully deterministic run description: model parameters, integrator knobs,
// scenario and output location. No seeds anywhere.
struct RunConfig {
    ModelParams params;           // mu resolved later by the equilibrium solve
    EvolutionConfig evolution;
    Scenario scenario = Scenario::Unset;
    std::string output_dir = "out";
    bool parallel = false;

    // sweep-g
    double sweep_gbar_max = 0.3;
    double sweep_gbar_step = 0.05;
    // memory-check
    int mc_k_points = 6000;

    bool operator==(const RunConfig&) const = default;
};

// Parses the flat `key = value` format ('#' comments, UTF-8, one pair per
// line). Mandatory keys: N_total, beta, Delta, gbar_before, gbar_after.
// Unknown keys and out-of-range values are rejected with the offending key
// and line number.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

// The resolved-configuration echo written to <output_dir>/config.resolved.
// parse_config applied to this text reproduces the RunConfig exactly.
std::string render_config(const RunConfig& cfg);

} // namespace tw

#endif
