#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tw/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"triplewell: quantum transport and frame relaxation for a "
                 "triple well coupled to a reservoir"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    bool parallel = false;

    const char* names[] = {"init-eq", "sweep-g", "quench", "validate", "memory-check"};
    const char* descs[] = {
        "solve the t<0 equilibrium and write equilibrium.csv",
        "equilibrium sweep over the coupling; writes fig1.csv",
        "quench run; writes timeseries.csv, fig2.csv, fig3a.csv, fig3b.csv",
        "run the invariant suite; writes validate.txt",
        "frozen-history memory integrals vs the Markovian formulas",
    };
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", config_path, "flat key = value config file")
            ->required();
        sub->add_option("--output", output_dir, "output directory (default: from config)");
        sub->add_flag("--parallel", parallel, "fan sweep points out to worker threads");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        tw::RunConfig cfg = tw::parse_config_file(config_path);
        cfg.scenario = tw::scenario_from_string(app.get_subcommands().front()->get_name());
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (parallel) cfg.parallel = true;
        const bool ok = tw::run_scenario(cfg);
        if (!ok) {
            std::cerr << "validation reported FAIL lines (see validate.txt)\n";
            return 1;
        }
        return 0;
    } catch (const tw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const tw::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << '\n';
        return 3;
    } catch (const tw::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 4;
    } catch (const tw::ContractError& e) {
        std::cerr << "contract violation: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
