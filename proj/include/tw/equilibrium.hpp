#ifndef TW_EQUILIBRIUM_HPP
#define TW_EQUILIBRIUM_HPP

#include <optional>
#include <string>
#include <vector>

#include "tw/model.hpp"

namespace tw {

// Self-consistent t < 0 solution: chemical potential from the particle-number
// constraint, counter-term fixed point, eigenframe, energies, occupations.
struct EquilibriumSolution {
    double mu;
    Vec3 omega;
    UnitaryFrame frame; // columns u_g, u_o, u_e
    Vec3 n0;
    HermitianView delta_omega_ell;
    double residual; // fixed-point defect, max-norm on the counter term
};

struct EquilibriumOptions {
    double damping = 0.5;     // on counter-term updates
    int max_inner = 500;
    double inner_tol = 1e-13;
    double mu_tol = 1e-10;    // on |sum n - N_total|
    bool diag_only = false;   // zero off-diagonal counter terms (ablation)
};

// Fixed point of {frame, omega} -> eig(h0 + V dw^l(I, omega) V^dag) at the mu
// solving sum_l n(beta, omega_l) = N_total. Deterministic: the inner
// iteration always starts from the gbar = 0 frame; the outer search is
// bisection followed by a secant polish.
EquilibriumSolution solve_equilibrium(const ModelParams& p, double gbar,
                                      const EquilibriumOptions& opt = {});

struct SweepRow {
    double gbar;
    bool converged = false;
    std::string error;        // set when converged is false
    double mu = 0.0;
    double abs_u1g = 0.0;     // |u_{+1,g}| = |u_{-1,g}|
    Vec3 omega{};
};

// Equilibrium solve per coupling value. Serial runs warm-start the mu search
// from the previous point; parallel runs solve each point independently.
std::vector<SweepRow> sweep_gbar(const ModelParams& p, const std::vector<double>& gbars,
                                 bool parallel = false,
                                 const EquilibriumOptions& opt = {});

} // namespace tw

#endif
