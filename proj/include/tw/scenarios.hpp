#ifndef TW_SCENARIOS_HPP
#define TW_SCENARIOS_HPP

#include <string>

#include "tw/config.hpp"

namespace tw {

// Executes the configured scenario, writing CSVs, plot scripts, the resolved
// config echo and run metadata into cfg.output_dir. Partially written files
// are removed when an error escapes. Returns false only for the validate
// scenario when at least one invariant line reports FAIL.
bool run_scenario(const RunConfig& cfg);

// Writes one gnuplot script per figure CSV found in output_dir. Errors if
// none of the known figure CSVs is present.
void emit_plot_scripts(const std::string& output_dir, double t_max = 300.0);

// 17-significant-digit serialization used for every CSV number.
std::string csv_num(double x);

} // namespace tw

#endif
