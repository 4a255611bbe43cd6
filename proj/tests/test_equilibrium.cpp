#include <doctest.h>

#include <cmath>

#include "tw/equilibrium.hpp"

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

// Scalar oracle for the free case: bisection on
//   sum_l 1/(e^{beta w_l(mu)} - 1) = N_total,  w(mu) = -mu - sqrt2, -mu, -mu + sqrt2.
double free_mu_oracle(double beta, double n_total) {
    const double sq2 = std::sqrt(2.0);
    auto nsum = [&](double mu) {
        double s = 0.0;
        for (double w : {-mu - sq2, -mu, -mu + sq2}) s += 1.0 / std::expm1(beta * w);
        return s;
    };
    double lo = -sq2 - 8.0, hi = -sq2 - 1e-9;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (nsum(mid) > n_total ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("equilibrium: free case against the scalar bisection oracle") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, 0.0);

    const double sq2 = std::sqrt(2.0);
    const double mu_star = free_mu_oracle(p.beta, p.n_total);
    CHECK(eq.mu == doctest::Approx(mu_star).epsilon(1e-9));
    CHECK(eq.mu == doctest::Approx(-1.5125).epsilon(2e-4));

    CHECK(eq.omega[0] == doctest::Approx(-mu_star - sq2).epsilon(1e-9));
    CHECK(eq.omega[1] == doctest::Approx(-mu_star).epsilon(1e-9));
    CHECK(eq.omega[2] == doctest::Approx(-mu_star + sq2).epsilon(1e-9));

    for (int l = 0; l < 3; ++l)
        CHECK(eq.n0[l] ==
              doctest::Approx(1.0 / std::expm1(p.beta * eq.omega[l])).epsilon(1e-12));
    CHECK(eq.n0[0] == doctest::Approx(9.68).epsilon(2e-3));
    CHECK(eq.n0[1] == doctest::Approx(0.28).epsilon(2e-2));
    CHECK(eq.n0[2] == doctest::Approx(0.056).epsilon(2e-2));

    // analytic frame, no counter term
    const double isq2 = 1.0 / sq2;
    CHECK(std::abs(eq.frame(0, kG) - cplx{0.5}) <= 1e-13);
    CHECK(std::abs(eq.frame(1, kG) - cplx{isq2}) <= 1e-13);
    CHECK(std::abs(eq.frame(2, kG) - cplx{0.5}) <= 1e-13);
    CHECK(eq.delta_omega_ell.matrix().max_abs() == 0.0);
    CHECK(eq.residual == 0.0);
}

TEST_CASE("equilibrium: particle-number constraint and parity at finite coupling") {
    const ModelParams p = base_params();
    for (double g : {0.1, 0.2, 0.3}) {
        const EquilibriumSolution eq = solve_equilibrium(p, g);

        double nsum = 0.0;
        for (int l = 0; l < 3; ++l) nsum += eq.n0[l];
        CHECK(std::abs(nsum - p.n_total) <= 1e-8);

        // u_o = (1, 0, -1)/sqrt2 exactly (phase fixed by the eig convention)
        CHECK(std::abs(eq.frame(0, kO) - cplx{1.0 / std::sqrt(2.0)}) <= 1e-13);
        CHECK(std::abs(eq.frame(1, kO)) <= 1e-13);
        CHECK(std::abs(eq.frame(2, kO) + eq.frame(0, kO)) <= 1e-13);

        // parity of the even columns
        for (int l : {kG, kE})
            CHECK(std::abs(std::abs(eq.frame(0, l)) - std::abs(eq.frame(2, l))) <= 1e-12);

        for (int l = 0; l < 3; ++l) {
            CHECK(eq.omega[l] > 0.0);
            CHECK(eq.omega[l] < p.delta);
        }
        CHECK(eq.residual <= 1e-10);
    }
}

TEST_CASE("equilibrium: fixed-point verification and eigenvalue consistency") {
    const ModelParams p = base_params();
    const EquilibriumSolution eq = solve_equilibrium(p, 0.2);

    ModelParams q = p;
    q.mu = eq.mu;
    const HermitianView d =
        counterterm_markovian(overlaps(eq.frame), eq.omega, q, 0.2);
    CHECK((d.matrix() - eq.delta_omega_ell.matrix()).max_abs() <= 1e-9);

    const HermitianView dx = delta_omega_to_site_basis(d, eq.frame);
    const HermitianView hu(build_h0(q).matrix() + dx.matrix());
    const EigResult e = eig_hermitian_nondegenerate(hu);
    for (int l = 0; l < 3; ++l) {
        CHECK(std::abs(e.eigenvalues[l] - eq.omega[l]) <= 1e-9);
        // h_u u_l = w_l u_l on the stored frame
        double resid = 0.0;
        for (int i = 0; i < 3; ++i) {
            cplx acc{};
            for (int j = 0; j < 3; ++j) acc += hu(i, j) * eq.frame(j, l);
            resid = std::max(resid, std::abs(acc - eq.omega[l] * eq.frame(i, l)));
        }
        CHECK(resid <= 1e-10);
    }
}

TEST_CASE("equilibrium: gbar = 0.2 frame weight stays in the narrow band") {
    const EquilibriumSolution eq = solve_equilibrium(base_params(), 0.2);
    const double w = std::abs(eq.frame(0, kG));
    CHECK(w >= 0.4994);
    CHECK(w <= 0.5);
}

TEST_CASE("equilibrium: bit-reproducible across runs") {
    const ModelParams p = base_params();
    const EquilibriumSolution a = solve_equilibrium(p, 0.25);
    const EquilibriumSolution b = solve_equilibrium(p, 0.25);
    CHECK(a.mu == b.mu);
    for (int l = 0; l < 3; ++l) {
        CHECK(a.omega[l] == b.omega[l]);
        CHECK(a.n0[l] == b.n0[l]);
    }
    CHECK((a.frame.matrix() - b.frame.matrix()).max_abs() == 0.0);
}

TEST_CASE("equilibrium: no in-band solution is a domain error") {
    ModelParams p = base_params();
    p.delta = 2.0; // omega_e needs ~2 sqrt2 of headroom; cannot fit
    CHECK_THROWS_AS(solve_equilibrium(p, 0.1), DomainError);
}

TEST_CASE("sweep_gbar: single free point, monotone band, smooth departure") {
    const ModelParams p = base_params();

    const std::vector<SweepRow> one = sweep_gbar(p, {0.0});
    REQUIRE(one.size() == 1);
    CHECK(one[0].converged);
    CHECK(one[0].abs_u1g == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> gs;
    for (int i = 0; i <= 6; ++i) gs.push_back(0.05 * i);
    const std::vector<SweepRow> rows = sweep_gbar(p, gs);
    REQUIRE(rows.size() == 7);
    for (size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].converged);
        CHECK(rows[i].abs_u1g >= 0.4994);
        CHECK(rows[i].abs_u1g <= 0.5 + 1e-15);
        if (i > 0) {
            CHECK(rows[i].abs_u1g <= rows[i - 1].abs_u1g + 1e-15);
            // quadratic-in-g departure: adjacent points differ by O(dg * g)
            const double dg = gs[i] - gs[i - 1];
            CHECK(std::abs(rows[i].abs_u1g - rows[i - 1].abs_u1g) <=
                  0.05 * dg * (gs[i] + gs[i - 1]) + 1e-12);
        }
    }
}

TEST_CASE("sweep_gbar: parallel agrees with serial and keeps the point order") {
    const ModelParams p = base_params();
    std::vector<double> gs{0.0, 0.1, 0.2, 0.3};
    const std::vector<SweepRow> serial = sweep_gbar(p, gs, false);
    const std::vector<SweepRow> par = sweep_gbar(p, gs, true);
    REQUIRE(par.size() == serial.size());
    for (size_t i = 0; i < gs.size(); ++i) {
        CHECK(par[i].gbar == serial[i].gbar);
        CHECK(par[i].converged == serial[i].converged);
        CHECK(std::abs(par[i].mu - serial[i].mu) <= 1e-9);
        CHECK(std::abs(par[i].abs_u1g - serial[i].abs_u1g) <= 1e-9);
    }
}

TEST_CASE("sweep_gbar: failed points are marked, not fatal") {
    ModelParams p = base_params();
    p.delta = 2.0;
    const std::vector<SweepRow> rows = sweep_gbar(p, {0.0, 0.1});
    REQUIRE(rows.size() == 2);
    CHECK(!rows[0].converged);
    CHECK(!rows[0].error.empty());
}
