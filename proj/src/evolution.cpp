#include "tw/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace tw {

namespace {

ComplexMatrix zero_offdiagonal(const ComplexMatrix& d) {
    ComplexMatrix r(d.dim());
    for (int i = 0; i < d.dim(); ++i) r(i, i) = cplx{d(i, i).real(), 0.0};
    return r;
}

HermitianView counterterm_for(const UnitaryFrame& frame, const Vec3& omega,
                              const ModelParams& p, double gbar, bool zero_offdiag) {
    HermitianView d = counterterm_markovian(overlaps(frame), omega, p, gbar);
    if (!zero_offdiag) return d;
    return HermitianView(zero_offdiagonal(d.matrix()), 0.0);
}

Vec3 energies_of(const UnitaryFrame& frame, const HermitianView& h0,
                 const HermitianView& delta_ell) {
    // omega_l = v_l^dag h_u v_l = (V^dag h0 V)_ll + dw_ll
    const ComplexMatrix g = frame.matrix().adjoint() * h0.matrix() * frame.matrix();
    Vec3 w;
    for (int l = 0; l < kModes; ++l) w[l] = g(l, l).real() + delta_ell(l, l).real();
    return w;
}

} // namespace

SystemState initial_state(const EquilibriumSolution& eq, const ModelParams& p,
                          double gbar, bool zero_offdiag) {
    ModelParams q = p;
    q.mu = eq.mu;
    const HermitianView h0 = build_h0(q);

    // The coupling changes instantaneously; re-solve the counter term and the
    // energies at the frozen frame.
    Vec3 omega = eq.omega;
    HermitianView d = eq.delta_omega_ell;
    for (int it = 0; it < 200; ++it) {
        const HermitianView d_new = counterterm_for(eq.frame, omega, q, gbar, zero_offdiag);
        const double resid = (d_new.matrix() - d.matrix()).max_abs();
        d = d_new;
        omega = energies_of(eq.frame, h0, d);
        if (resid < 1e-15) break;
    }
    for (int l = 0; l < kModes; ++l) check_in_band(omega[l], p.delta);
    return SystemState{0.0, eq.frame, eq.n0, omega, d};
}

SystemState step(const SystemState& s, const ModelParams& p, double gbar,
                 const EvolutionConfig& cfg, int* sc_iters) {
    const double pi = 4.0 * std::atan(1.0);
    const HermitianView h0 = build_h0(p);
    const HermitianView dx0 = delta_omega_to_site_basis(s.delta_omega_ell, s.frame);
    const Overlaps ov0 = overlaps(s.frame);

    // Self-consistency iterates for the state at t + dt.
    ComplexMatrix v_next = s.frame.matrix();
    Vec3 n_next = s.n;
    Vec3 w_next = s.omega;
    ComplexMatrix d_next = s.delta_omega_ell.matrix();
    ComplexMatrix dx_next = dx0.matrix();
    Overlaps ov_next = ov0;

    double resid = 0.0;
    int it = 0;
    for (it = 1; it <= cfg.sc_max_iter; ++it) {
        const HermitianView hu_mid(
            h0.matrix() + cplx{0.5} * (dx0.matrix() + dx_next), 1e-11);
        Vec3 w_mid, n_mid;
        CVec3 i_mid;
        for (int l = 0; l < kModes; ++l) {
            w_mid[l] = 0.5 * (s.omega[l] + w_next[l]);
            n_mid[l] = 0.5 * (s.n[l] + n_next[l]);
            i_mid[l] = 0.5 * (ov0.value[l] + ov_next.value[l]);
        }

        // Frame: every column shares the midpoint generator, shifted by its
        // own midpoint energy.
        ComplexMatrix v_new(kModes);
        for (int l = 0; l < kModes; ++l) {
            const ComplexMatrix u = propagate_unitary(hu_mid, w_mid[l], cfg.dt);
            for (int x = 0; x < kModes; ++x) {
                cplx acc{};
                for (int y = 0; y < kModes; ++y) acc += u(x, y) * s.frame(y, l);
                v_new(x, l) = acc;
            }
        }

        // Occupations: implicit midpoint of the transport equation, solved in
        // closed form (the rhs is linear in n).
        Vec3 n_new;
        for (int l = 0; l < kModes; ++l) {
            const double rate = 2.0 * pi * gbar * gbar * std::norm(i_mid[l]) *
                                kernel_c(w_mid[l], p.delta);
            const double a = 0.5 * rate * cfg.dt;
            const double nres = bose_einstein(p.beta, w_mid[l]);
            n_new[l] = (s.n[l] * (1.0 - a) + 2.0 * a * nres) / (1.0 + a);
        }

        // Close the loop: overlaps, counter term and energies at t + dt.
        const UnitaryFrame frame_new(v_new, 1e-8);
        ov_next = overlaps(frame_new);
        HermitianView d_new = counterterm_markovian(ov_next, w_next, p, gbar);
        if (cfg.zero_offdiag) d_new = HermitianView(zero_offdiagonal(d_new.matrix()), 0.0);

        resid = (d_new.matrix() - d_next).max_abs();
        v_next = v_new;
        n_next = n_new;
        d_next = d_new.matrix();
        const HermitianView dxn = delta_omega_to_site_basis(d_new, frame_new);
        dx_next = dxn.matrix();
        w_next = energies_of(frame_new, h0, d_new);

        if (resid < cfg.sc_tol) break;
    }
    if (resid >= cfg.sc_tol && it > cfg.sc_max_iter)
        throw ConvergenceError("step: self-consistency stalled at t = " +
                               std::to_string(s.t), resid);
    if (sc_iters) *sc_iters = std::min(it, cfg.sc_max_iter);

    for (int l = 0; l < kModes; ++l) {
        if (n_next[l] < 0.0) throw DomainError("step: negative occupation");
        check_in_band(w_next[l], p.delta);
    }
    return SystemState{s.t + cfg.dt, reunitarize(v_next), n_next, w_next,
                       HermitianView(d_next, 1e-11)};
}

TimeSeriesRecord make_record(const SystemState& s, int sc_iters) {
    TimeSeriesRecord r{};
    r.t = s.t;
    for (int x = 0; x < kModes; ++x)
        for (int l = 0; l < kModes; ++l) r.abs_v[x][l] = std::abs(s.frame(x, l));
    r.n = s.n;
    r.omega = s.omega;
    int k = 0;
    for (int a = 0; a < kModes; ++a)
        for (int b = a; b < kModes; ++b) r.dw[k++] = s.delta_omega_ell(a, b);
    r.sc_iters = sc_iters;
    return r;
}

std::vector<TimeSeriesRecord> run_quench(const EquilibriumSolution& eq,
                                         const ModelParams& p,
                                         const EvolutionConfig& cfg,
                                         const StateObserver& observe) {
    ModelParams q = p;
    q.mu = eq.mu;
    const double gbar = p.gbar_after;
    SystemState s = initial_state(eq, q, gbar, cfg.zero_offdiag);

    const long nsteps = std::lround(cfg.t_max / cfg.dt);
    std::vector<TimeSeriesRecord> out;
    out.reserve(static_cast<size_t>(nsteps / std::max(cfg.output_stride, 1)) + 2);
    out.push_back(make_record(s, 0));
    if (observe) observe(s, 0);

    for (long k = 1; k <= nsteps; ++k) {
        int iters = 0;
        try {
            s = step(s, q, gbar, cfg, &iters); // ConvergenceError already carries t
        } catch (const DomainError& e) {
            throw DomainError("run_quench at t = " + std::to_string(s.t) + ": " + e.what());
        }
        if (k % cfg.output_stride == 0 || k == nsteps) {
            out.push_back(make_record(s, iters));
            if (observe) observe(s, iters);
        }
    }
    return out;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n,
// cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_canonical(int n) {
    static std::mutex mtx;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> x(n), w(n);
    const double pi = 4.0 * std::atan(1.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5)); // Tricomi start
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / pp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = -t; // ascending
        w[i] = 2.0 / ((1.0 - t * t) * pp * pp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x,
                    std::vector<double>& w) {
    const auto& [cx, cw] = gauss_legendre_canonical(n);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = 0.5 * (b - a) * cx[i] + 0.5 * (a + b);
        w[i] = 0.5 * (b - a) * cw[i];
    }
}

// Trapezoid sum of int_0^W dtau e^{-(eps + i x) tau} with step h, evaluated
// through the closed form of the geometric series.
cplx regulated_window(double x, double eps, double window, double h) {
    const long m = std::lround(std::ceil(window / h));
    const double hh = window / static_cast<double>(m);
    const cplx z{eps, x};
    const cplx r = std::exp(-z * hh);
    const cplx rm = std::exp(-z * window);
    return hh * (0.5 * (1.0 + rm) + (r - rm) / (1.0 - r));
}

struct NmIntegrals {
    ComplexMatrix delta{kModes};
    Vec3 ndot{};
};

NmIntegrals nm_integrate(const SystemState& s, const ModelParams& p, double gbar,
                         double eps, int k_points, double window) {
    const double kc = std::sqrt(p.delta);
    const double h = 0.01; // trapezoid step in s, resolves phases up to Delta
    const CVec3 I = overlaps(s.frame).value;

    std::vector<double> xk, wk;
    gauss_legendre(k_points, 0.0, kc, xk, wk);

    NmIntegrals out;
    // delta: full band
    std::vector<cplx> A(static_cast<size_t>(k_points) * kModes);
    for (int l = 0; l < kModes; ++l)
        for (int i = 0; i < k_points; ++i)
            A[static_cast<size_t>(l) * k_points + i] =
                regulated_window(xk[i] * xk[i] - s.omega[l], eps, window, h);
    for (int a = 0; a < kModes; ++a) {
        {
            double im = 0.0;
            for (int i = 0; i < k_points; ++i)
                im += wk[i] * A[static_cast<size_t>(a) * k_points + i].imag();
            // -i (g^2/2)(1/kc) |I|^2 (A - conj A) = (g^2/kc) |I|^2 Im A
            out.delta(a, a) = cplx{gbar * gbar / kc * std::norm(I[a]) * im, 0.0};
        }
        for (int b = a + 1; b < kModes; ++b) {
            cplx acc{};
            for (int i = 0; i < k_points; ++i)
                acc += wk[i] * (A[static_cast<size_t>(a) * k_points + i] -
                                std::conj(A[static_cast<size_t>(b) * k_points + i]));
            const cplx entry =
                cplx{0.0, -0.5 * gbar * gbar / kc} * std::conj(I[a]) * I[b] * acc;
            out.delta(a, b) = entry;
            out.delta(b, a) = std::conj(entry);
        }
    }

    // occupations: resonant band only (Bose factor non-integrable at k -> 0)
    const double w_min = *std::min_element(s.omega.begin(), s.omega.end());
    const double k_lo = 0.5 * std::sqrt(w_min);
    gauss_legendre(k_points, k_lo, kc, xk, wk);
    for (int l = 0; l < kModes; ++l) {
        double acc = 0.0;
        for (int i = 0; i < k_points; ++i) {
            const cplx a = regulated_window(xk[i] * xk[i] - s.omega[l], eps, window, h);
            acc += wk[i] * a.real() * (s.n[l] - bose_einstein(p.beta, xk[i] * xk[i]));
        }
        out.ndot[l] = -2.0 * gbar * gbar / kc * std::norm(I[l]) * acc;
    }
    return out;
}

} // namespace

MemoryCheckResult frozen_history_memory_check(const SystemState& s, const ModelParams& p,
                                              double gbar, double epsilon, int k_points,
                                              double s_window) {
    if (!(epsilon > 0.0)) throw ContractError("frozen_history_memory_check: epsilon > 0");
    if (k_points < 16) throw ContractError("frozen_history_memory_check: k_points too small");

    const NmIntegrals full = nm_integrate(s, p, gbar, epsilon, k_points, s_window);
    const NmIntegrals half = nm_integrate(s, p, gbar, epsilon, k_points / 2, s_window);

    const double scale = std::max(full.delta.max_abs(), 1e-12);
    const double drift = (full.delta - half.delta).max_abs() / scale;
    if (drift > 1e-2)
        throw ConvergenceError(
            "frozen_history_memory_check: k quadrature not converged at " +
                std::to_string(k_points) + " points",
            drift);

    return MemoryCheckResult{HermitianView(full.delta, 0.0), full.ndot};
}

namespace {

cplx neville_at_zero(const std::vector<double>& xs, const std::vector<cplx>& ys) {
    std::vector<cplx> t = ys;
    const size_t n = xs.size();
    for (size_t j = 1; j < n; ++j)
        for (size_t i = 0; i + j < n; ++i)
            t[i] = (xs[i + j] * t[i] - xs[i] * t[i + 1]) / (xs[i + j] - xs[i]);
    return t[0];
}

} // namespace

MemoryCheckReport memory_check_report(const SystemState& s, const ModelParams& p,
                                      double gbar, const std::vector<double>& epsilons,
                                      int k_points) {
    if (epsilons.size() < 2)
        throw ContractError("memory_check_report: need at least two regulators");

    MemoryCheckReport rep{epsilons,
                          {},
                          MemoryCheckResult{HermitianView(ComplexMatrix(kModes), 0.0), {}},
                          counterterm_markovian(overlaps(s.frame), s.omega, p, gbar),
                          transport_rhs(s.n, overlaps(s.frame), s.omega, p, gbar),
                          0.0,
                          0.0};
    for (double eps : epsilons)
        rep.per_epsilon.push_back(
            frozen_history_memory_check(s, p, gbar, eps, k_points, 50.0 / eps));

    ComplexMatrix dex(kModes);
    for (int a = 0; a < kModes; ++a)
        for (int b = 0; b < kModes; ++b) {
            std::vector<cplx> ys;
            for (const MemoryCheckResult& r : rep.per_epsilon)
                ys.push_back(r.delta_omega_nm(a, b));
            dex(a, b) = neville_at_zero(epsilons, ys);
        }
    Vec3 nex{};
    for (int l = 0; l < kModes; ++l) {
        std::vector<cplx> ys;
        for (const MemoryCheckResult& r : rep.per_epsilon) ys.push_back(r.n_dot_nm[l]);
        nex[l] = neville_at_zero(epsilons, ys).real();
    }
    rep.extrapolated = MemoryCheckResult{HermitianView(dex, 1e-12), nex};

    const double dscale = rep.delta_omega_markov.matrix().max_abs();
    for (int a = 0; a < kModes; ++a)
        for (int b = 0; b < kModes; ++b) {
            const double ref = std::abs(rep.delta_omega_markov(a, b));
            const double err = std::abs(dex(a, b) - rep.delta_omega_markov(a, b));
            // entries that vanish by parity are compared on the global scale
            const double rel = ref > 1e-6 * dscale ? err / ref : err / dscale;
            rep.max_rel_err_delta = std::max(rep.max_rel_err_delta, rel);
        }
    for (int l : {kG, kE}) {
        const double ref = std::abs(rep.n_dot_markov[l]);
        if (ref > 0.0)
            rep.max_rel_err_ndot =
                std::max(rep.max_rel_err_ndot, std::abs(nex[l] - rep.n_dot_markov[l]) / ref);
    }
    return rep;
}

} // namespace tw
