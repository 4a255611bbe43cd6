#ifndef TW_EVOLUTION_HPP
#define TW_EVOLUTION_HPP

#include <functional>
#include <vector>

#include "tw/equilibrium.hpp"
#include "tw/model.hpp"

namespace tw {

// Snapshot of the coupled frame / occupation / energy evolution.
struct SystemState {
    double t;
    UnitaryFrame frame;
    Vec3 n;
    Vec3 omega;
    HermitianView delta_omega_ell;
};

struct EvolutionConfig {
    double dt = 0.01;
    double t_max = 300.0;
    double sc_tol = 1e-12;   // on the max-norm change of the counter term
    int sc_max_iter = 50;
    int output_stride = 10;
    bool zero_offdiag = false; // ablation: keep only diagonal counter terms

    bool operator==(const EvolutionConfig&) const = default;
};

// One CSV row of observables.
struct TimeSeriesRecord {
    double t;
    double abs_v[3][3]; // [site x = +1,0,-1][mode l = g,o,e]
    Vec3 n;
    Vec3 omega;
    cplx dw[6]; // upper triangle gg, go, ge, oo, oe, ee
    int sc_iters;
};

// State at t = 0+: the equilibrium frame and occupations with the counter
// term and energies re-solved at the post-quench coupling.
SystemState initial_state(const EquilibriumSolution& eq, const ModelParams& p,
                          double gbar, bool zero_offdiag = false);

// Advance by one self-consistent implicit-midpoint step. Columns are
// propagated by the shared midpoint generator so the frame stays unitary to
// rounding; the occupations take one implicit-midpoint step of the transport
// equation; counter term, overlaps and energies are iterated to sc_tol.
SystemState step(const SystemState& s, const ModelParams& p, double gbar,
                 const EvolutionConfig& cfg, int* sc_iters = nullptr);

using StateObserver = std::function<void(const SystemState&, int sc_iters)>;

// Quench scenario: evolve from t = 0 with p.gbar_after until cfg.t_max,
// emitting one record every cfg.output_stride steps (including t = 0).
std::vector<TimeSeriesRecord> run_quench(const EquilibriumSolution& eq,
                                         const ModelParams& p,
                                         const EvolutionConfig& cfg,
                                         const StateObserver& observe = {});

TimeSeriesRecord make_record(const SystemState& s, int sc_iters);

// Frozen-history evaluation of the non-Markovian memory integrals with the
// adiabatic regulator e^{eps (s - t)}: Gauss-Legendre in k, trapezoid in s
// over [t - s_window, t]. The occupation integral excludes k below half the
// slowest resonant momentum: the reservoir Bose factor is non-integrable at
// k -> 0 in this band measure, and the eps -> 0 limit is insensitive to the
// off-resonant region.
struct MemoryCheckResult {
    HermitianView delta_omega_nm;
    Vec3 n_dot_nm;
};

MemoryCheckResult frozen_history_memory_check(const SystemState& s, const ModelParams& p,
                                              double gbar, double epsilon, int k_points,
                                              double s_window);

// Runs the check over a list of regulators, extrapolates eps -> 0
// (polynomial/Neville), and compares with the Markovian formulas.
struct MemoryCheckReport {
    std::vector<double> epsilons;
    std::vector<MemoryCheckResult> per_epsilon;
    MemoryCheckResult extrapolated;
    HermitianView delta_omega_markov;
    Vec3 n_dot_markov;
    double max_rel_err_delta; // over entries with non-negligible magnitude
    double max_rel_err_ndot;  // over modes g, e
};

MemoryCheckReport memory_check_report(const SystemState& s, const ModelParams& p,
                                      double gbar, const std::vector<double>& epsilons,
                                      int k_points);

} // namespace tw

#endif
