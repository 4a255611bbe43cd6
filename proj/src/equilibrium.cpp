#include "tw/equilibrium.hpp"

#include <cmath>
#include <future>
#include <limits>

namespace tw {

namespace {

struct InnerSolution {
    Vec3 omega;
    UnitaryFrame frame;
    HermitianView delta;
    double residual;
};

// Damped fixed point on the counter term at fixed mu, from the gbar = 0 frame.
InnerSolution solve_fixed_mu(const ModelParams& p, double mu, double gbar,
                             const EquilibriumOptions& opt) {
    ModelParams q = p;
    q.mu = mu;
    EigResult e = eig_hermitian_nondegenerate(build_h0(q));
    Vec3 omega{e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]};
    UnitaryFrame frame = e.eigenvectors;
    ComplexMatrix delta(kModes);

    if (gbar == 0.0) {
        for (int l = 0; l < kModes; ++l) check_in_band(omega[l], p.delta);
        return {omega, frame, HermitianView(delta, 0.0), 0.0};
    }

    double residual = 0.0;
    for (int it = 0; it < opt.max_inner; ++it) {
        HermitianView target = counterterm_markovian(overlaps(frame), omega, p, gbar);
        ComplexMatrix next = target.matrix();
        if (opt.diag_only)
            for (int a = 0; a < kModes; ++a)
                for (int b = 0; b < kModes; ++b)
                    if (a != b) next(a, b) = 0.0;
        if (it > 0) next = cplx{opt.damping} * delta + cplx{1.0 - opt.damping} * next;

        residual = (next - delta).max_abs();
        delta = next;

        const HermitianView dx =
            delta_omega_to_site_basis(HermitianView(delta, 1e-14), frame);
        const HermitianView hu(build_h0(q).matrix() + dx.matrix());
        e = eig_hermitian_nondegenerate(hu);
        omega = {e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]};
        frame = e.eigenvectors;

        if (residual < opt.inner_tol)
            return {omega, frame, HermitianView(delta, 1e-14), residual};
    }
    throw ConvergenceError("equilibrium inner fixed point did not converge", residual);
}

double occupation_sum(const ModelParams& p, const Vec3& omega) {
    double s = 0.0;
    for (int l = 0; l < kModes; ++l) s += bose_einstein(p.beta, omega[l]);
    return s;
}

// mu bracketing and root refinement; mu_hint (when finite) seeds a narrow
// bracket around a previous solution.
EquilibriumSolution solve_impl(const ModelParams& p, double gbar,
                               const EquilibriumOptions& opt, double mu_hint) {
    p.validate();
    const double sq2 = std::sqrt(2.0);

    // sum_l n(omega_l(mu)) is increasing in mu; bracket the constraint.
    // Upper end: the gap omega_g -> 0+ sends n_g -> infinity.
    auto constraint = [&](double mu) {
        return occupation_sum(p, solve_fixed_mu(p, mu, gbar, opt).omega) - p.n_total;
    };

    double hi = std::isfinite(mu_hint) ? std::min(mu_hint + 0.05, -sq2 - 1e-4)
                                       : -sq2 - 0.05;
    bool ok = false;
    for (int i = 0; i < 16; ++i) {
        try {
            if (constraint(hi) > 0.0) {
                ok = true;
                break;
            }
        } catch (const DomainError&) {
            // band guard hit; stop tightening
            break;
        }
        hi = -sq2 - 0.5 * (-sq2 - hi);
    }
    if (!ok) throw DomainError("solve_equilibrium: no in-band solution (upper bracket)");

    double lo = std::isfinite(mu_hint) ? std::min(mu_hint - 0.05, hi - 0.1) : hi - 1.0;
    ok = false;
    for (int i = 0; i < 16; ++i) {
        try {
            if (constraint(lo) < 0.0) {
                ok = true;
                break;
            }
        } catch (const DomainError&) {
            break; // omega_e left the band; cannot widen further
        }
        lo = hi - 2.0 * (hi - lo);
    }
    if (!ok) throw DomainError("solve_equilibrium: no in-band solution (lower bracket)");

    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (constraint(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }

    // Secant polish on the bracket endpoints.
    double a = lo, b = hi, fa = constraint(a), fb = constraint(b);
    for (int i = 0; i < 20 && std::abs(fb) > opt.mu_tol; ++i) {
        if (fb == fa) break;
        const double c = b - fb * (b - a) / (fb - fa);
        a = b;
        fa = fb;
        b = c;
        fb = constraint(b);
    }
    const double mu = std::abs(fb) < std::abs(fa) ? b : a;

    InnerSolution s = solve_fixed_mu(p, mu, gbar, opt);
    Vec3 n0;
    for (int l = 0; l < kModes; ++l) {
        check_in_band(s.omega[l], p.delta);
        n0[l] = bose_einstein(p.beta, s.omega[l]);
    }
    return {mu, s.omega, s.frame, n0, s.delta, s.residual};
}

} // namespace

EquilibriumSolution solve_equilibrium(const ModelParams& p, double gbar,
                                      const EquilibriumOptions& opt) {
    return solve_impl(p, gbar, opt, std::numeric_limits<double>::quiet_NaN());
}

std::vector<SweepRow> sweep_gbar(const ModelParams& p, const std::vector<double>& gbars,
                                 bool parallel, const EquilibriumOptions& opt) {
    auto solve_row = [&](double g, double hint) {
        SweepRow row;
        row.gbar = g;
        try {
            const EquilibriumSolution eq = solve_impl(p, g, opt, hint);
            row.converged = true;
            row.mu = eq.mu;
            row.abs_u1g = std::abs(eq.frame(0, kG));
            row.omega = eq.omega;
        } catch (const Error& err) {
            row.error = err.what();
        }
        return row;
    };

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SweepRow> rows(gbars.size());
    if (parallel) {
        // Independent cold solves; result order is fixed by index.
        std::vector<std::future<SweepRow>> futs;
        futs.reserve(gbars.size());
        for (double g : gbars)
            futs.push_back(std::async(std::launch::async, solve_row, g, nan));
        for (size_t i = 0; i < futs.size(); ++i) rows[i] = futs[i].get();
    } else {
        double hint = nan;
        for (size_t i = 0; i < gbars.size(); ++i) {
            rows[i] = solve_row(gbars[i], hint);
            if (rows[i].converged) hint = rows[i].mu;
        }
    }
    return rows;
}

} // namespace tw
