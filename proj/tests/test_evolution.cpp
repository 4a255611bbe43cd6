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

double max_abs_v_change(const std::vector<TimeSeriesRecord>& recs) {
    double dev = 0.0;
    for (const TimeSeriesRecord& r : recs)
        for (int x = 0; x < 3; ++x)
            for (int l = 0; l < 3; ++l)
                dev = std::max(dev, std::abs(r.abs_v[x][l] - recs.front().abs_v[x][l]));
    return dev;
}

} // namespace

TEST_CASE("initial_state: self-consistent energies after the coupling change") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    ModelParams q = p;
    q.mu = eq.mu;
    const SystemState s = initial_state(eq, q, p.gbar_after);

    CHECK(s.t == 0.0);
    // omega matches diag(V^dag h_u V)
    const HermitianView dx = delta_omega_to_site_basis(s.delta_omega_ell, s.frame);
    const ComplexMatrix g = s.frame.matrix().adjoint() *
                            (build_h0(q).matrix() + dx.matrix()) * s.frame.matrix();
    for (int l = 0; l < 3; ++l)
        CHECK(std::abs(g(l, l).real() - s.omega[l]) <= 1e-12);
    // counter term consistent with its own inputs
    const HermitianView d =
        counterterm_markovian(overlaps(s.frame), s.omega, q, p.gbar_after);
    CHECK((d.matrix() - s.delta_omega_ell.matrix()).max_abs() <= 1e-13);
}

TEST_CASE("step: equilibrium state is stationary without a quench") {
    ModelParams p = base_params();
    p.gbar_after = p.gbar_before; // no quench
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    EvolutionConfig cfg;
    cfg.t_max = 2.0;
    cfg.output_stride = 10;

    const std::vector<TimeSeriesRecord> recs = run_quench(eq, p, cfg);
    double dn = 0.0, dv = 0.0, dw = 0.0;
    for (const TimeSeriesRecord& r : recs)
        for (int l = 0; l < 3; ++l) {
            dn = std::max(dn, std::abs(r.n[l] - recs.front().n[l]));
            dw = std::max(dw, std::abs(r.omega[l] - recs.front().omega[l]));
            for (int x = 0; x < 3; ++x)
                dv = std::max(dv, std::abs(r.abs_v[x][l] - recs.front().abs_v[x][l]));
        }
    CHECK(dv <= 1e-9);
    CHECK(dn <= 1e-12);
    CHECK(dw <= 1e-10);
}

TEST_CASE("step: zero coupling freezes the state") {
    ModelParams p = base_params();
    p.gbar_before = 0.0;
    p.gbar_after = 0.0;
    const EquilibriumSolution eq = solve_equilibrium(p, 0.0);
    EvolutionConfig cfg;
    cfg.t_max = 1.0;
    cfg.output_stride = 5;
    const std::vector<TimeSeriesRecord> recs = run_quench(eq, p, cfg);
    CHECK(max_abs_v_change(recs) <= 1e-12);
    for (const TimeSeriesRecord& r : recs)
        for (int l = 0; l < 3; ++l) CHECK(r.n[l] == recs.front().n[l]);
}

TEST_CASE("step: odd column is pinned to (1,0,-1)/sqrt2 with zero phase") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    EvolutionConfig cfg;
    cfg.t_max = 2.0;
    cfg.output_stride = 1;
    const double isq2 = 1.0 / std::sqrt(2.0);
    double dev = 0.0;
    run_quench(eq, p, cfg, [&](const SystemState& s, int) {
        dev = std::max({dev, std::abs(s.frame(0, kO) - cplx{isq2}),
                        std::abs(s.frame(1, kO)),
                        std::abs(s.frame(2, kO) + cplx{isq2})});
    });
    CHECK(dev <= 1e-12);
}

TEST_CASE("step: unitarity is preserved along the quench") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    EvolutionConfig cfg;
    cfg.t_max = 3.0;
    cfg.output_stride = 1;
    double defect = 0.0;
    run_quench(eq, p, cfg, [&](const SystemState& s, int) {
        defect = std::max(defect, unitarity_defect(s.frame.matrix()));
    });
    CHECK(defect <= 1e-11);
}

TEST_CASE("step: a real quench moves the frame weights") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    EvolutionConfig cfg;
    cfg.t_max = 5.0;
    const std::vector<TimeSeriesRecord> recs = run_quench(eq, p, cfg);
    CHECK(max_abs_v_change(recs) > 1e-4);
}

TEST_CASE("step: self-consistency exhaustion raises a convergence error") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    ModelParams q = p;
    q.mu = eq.mu;
    const SystemState s = initial_state(eq, q, p.gbar_after);
    EvolutionConfig cfg;
    cfg.sc_max_iter = 1;
    cfg.sc_tol = 1e-16;
    CHECK_THROWS_AS(step(s, q, p.gbar_after, cfg), ConvergenceError);
}

TEST_CASE("step: converges at second order in dt") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);

    // t_max divisible by every dt so all runs end at the same instant
    auto observables_at = [&](double dt) {
        EvolutionConfig cfg;
        cfg.dt = dt;
        cfg.t_max = 4.8;
        cfg.output_stride = 1 << 20; // only t = 0 and the final record
        const std::vector<TimeSeriesRecord> recs = run_quench(eq, p, cfg);
        return recs.back();
    };

    const TimeSeriesRecord a = observables_at(0.08);
    const TimeSeriesRecord b = observables_at(0.04);
    const TimeSeriesRecord c = observables_at(0.02);

    double e1 = 0.0, e2 = 0.0;
    for (int x = 0; x < 3; ++x)
        for (int l = 0; l < 3; ++l) {
            e1 = std::max(e1, std::abs(a.abs_v[x][l] - b.abs_v[x][l]));
            e2 = std::max(e2, std::abs(b.abs_v[x][l] - c.abs_v[x][l]));
        }
    for (int l = 0; l < 3; ++l) {
        e1 = std::max({e1, std::abs(a.n[l] - b.n[l]), std::abs(a.omega[l] - b.omega[l])});
        e2 = std::max({e2, std::abs(b.n[l] - c.n[l]), std::abs(b.omega[l] - c.omega[l])});
    }
    const double order = std::log2(e1 / e2);
    INFO("e1=", e1, " e2=", e2, " order=", order);
    CHECK(order >= 1.9);
    CHECK(order <= 3.2);
}

TEST_CASE("ablation: diagonal-only counter terms freeze every |v|") {
    const ModelParams p = base_params();
    EquilibriumOptions opt;
    opt.diag_only = true;
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before, opt);

    // the diagonal-only equilibrium frame is the bare h0 frame
    const double isq2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(eq.frame(0, kG) - cplx{0.5}) <= 1e-12);
    CHECK(std::abs(eq.frame(1, kG) - cplx{isq2}) <= 1e-12);
    CHECK(std::abs(eq.frame(0, kE) + cplx{0.5}) <= 1e-12);
    CHECK(std::abs(eq.frame(1, kE) - cplx{isq2}) <= 1e-12);

    EvolutionConfig cfg;
    cfg.zero_offdiag = true;
    cfg.t_max = 5.0;
    const std::vector<TimeSeriesRecord> recs = run_quench(eq, p, cfg);
    CHECK(max_abs_v_change(recs) <= 1e-10);
    // occupations still relax in the ablated run
    CHECK(std::abs(recs.back().n[kG] - recs.front().n[kG]) > 1e-3);
}

TEST_CASE("run_quench: no-quench records are reproducible at t = 0") {
    ModelParams p = base_params();
    p.gbar_after = p.gbar_before;
    const EquilibriumSolution eq = solve_equilibrium(p, p.gbar_before);
    EvolutionConfig cfg;
    cfg.t_max = 0.5;
    cfg.output_stride = 10;
    const std::vector<TimeSeriesRecord> r1 = run_quench(eq, p, cfg);
    const std::vector<TimeSeriesRecord> r2 = run_quench(eq, p, cfg);
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].t == r2[i].t);
        for (int l = 0; l < 3; ++l) CHECK(r1[i].n[l] == r2[i].n[l]);
        for (int x = 0; x < 3; ++x)
            for (int l = 0; l < 3; ++l) CHECK(r1[i].abs_v[x][l] == r2[i].abs_v[x][l]);
    }
}
