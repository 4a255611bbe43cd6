#include <doctest.h>

#include <cmath>

#include "tw/evolution.hpp"

using namespace tw;

namespace {

ModelParams base_params() {
    ModelParams p;
    p.delta = 10.0;
    p.beta = 1.0;
    p.n_total = 10.0;
    p.gbar_before = 0.2;
    p.gbar_after = 0.1;
    return p;
}

SystemState quenched_state(const ModelParams& p, ModelParams& q) {
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    q = p;
    q.mu = eq.mu;
    return initial_state(eq, q, p.gbar_after);
}

} // namespace

TEST_CASE("memory check: odd-mode entries vanish for any regulator") {
    const ModelParams p = base_params();
    ModelParams q;
    const SystemState s = quenched_state(p, q);
    for (double eps : {0.2, 0.02}) {
        const MemoryCheckResult r =
            frozen_history_memory_check(s, q, p.gbar_after, eps, 2000, 50.0 / eps);
        for (int l = 0; l < 3; ++l) {
            CHECK(std::abs(r.delta_omega_nm(kO, l)) <= 1e-18);
            CHECK(std::abs(r.delta_omega_nm(l, kO)) <= 1e-18);
        }
        CHECK(std::abs(r.n_dot_nm[kO]) <= 1e-18);
        CHECK(hermiticity_defect(r.delta_omega_nm.matrix()) == 0.0);
    }
}

TEST_CASE("memory check: detailed balance sends the occupation flux to zero") {
    const ModelParams p = base_params();
    ModelParams q;
    SystemState s = quenched_state(p, q);
    for (int l = 0; l < 3; ++l) s.n[l] = bose_einstein(q.beta, s.omega[l]);

    const MemoryCheckReport rep =
        memory_check_report(s, q, p.gbar_after, {0.04, 0.02, 0.01, 0.005}, 6000);
    // residual flux small against the rate coefficient times the occupation
    const double scale = 0.1 * s.n[kG];
    for (int l = 0; l < 3; ++l)
        CHECK(std::abs(rep.extrapolated.n_dot_nm[l]) <= 1e-3 * scale);
}

TEST_CASE("memory check: extrapolated integrals match the Markovian formulas") {
    const ModelParams p = base_params();
    ModelParams q;
    SystemState s = quenched_state(p, q);
    s.n[kG] += 2.0; // make both transport brackets order one
    s.n[kE] += 1.0;

    const MemoryCheckReport rep =
        memory_check_report(s, q, p.gbar_after, {0.04, 0.02, 0.01, 0.005}, 6000);
    CHECK(rep.max_rel_err_delta <= 0.02);
    CHECK(rep.max_rel_err_ndot <= 0.02);

    // raw values carry an O(eps) bias that shrinks with the regulator
    CHECK(std::abs(rep.per_epsilon.back().n_dot_nm[kG] - rep.n_dot_markov[kG]) <
          std::abs(rep.per_epsilon.front().n_dot_nm[kG] - rep.n_dot_markov[kG]));
}

TEST_CASE("memory check: parameter validation") {
    const ModelParams p = base_params();
    ModelParams q;
    const SystemState s = quenched_state(p, q);
    CHECK_THROWS_AS(frozen_history_memory_check(s, q, 0.1, 0.0, 2000, 100.0),
                    ContractError);
    CHECK_THROWS_AS(frozen_history_memory_check(s, q, 0.1, 0.1, 4, 100.0), ContractError);
    CHECK_THROWS_AS(memory_check_report(s, q, 0.1, {0.1}, 2000), ContractError);
}
