#include "tw/model.hpp"

#include <cmath>
#include <string>

namespace tw {

void ModelParams::validate() const {
    if (!(delta > 0.0)) throw DomainError("ModelParams: Delta must be positive");
    if (!(beta > 0.0)) throw DomainError("ModelParams: beta must be positive");
    if (gbar_before < 0.0 || gbar_after < 0.0)
        throw DomainError("ModelParams: gbar must be non-negative");
    if (!(n_total > 0.0)) throw DomainError("ModelParams: N_total must be positive");
}

HermitianView build_h0(const ModelParams& p) {
    ComplexMatrix h(kModes);
    for (int i = 0; i < kModes; ++i) h(i, i) = -p.mu;
    h(0, 1) = h(1, 0) = h(1, 2) = h(2, 1) = -1.0; // -J, J = 1
    return HermitianView(std::move(h));
}

double bose_einstein(double beta, double omega) {
    const double x = beta * omega;
    if (!(x > 0.0))
        throw DomainError("bose_einstein: beta*omega must be positive, got " +
                          std::to_string(x));
    return 1.0 / std::expm1(x);
}

void check_in_band(double omega, double delta) {
    const double guard = 1e-6 * delta;
    if (!(omega > guard) || !(omega < delta - guard))
        throw DomainError("omega = " + std::to_string(omega) +
                          " outside the reservoir band (0, " + std::to_string(delta) + ")");
}

double kernel_c(double omega, double delta) {
    check_in_band(omega, delta);
    return 1.0 / (2.0 * std::sqrt(omega * delta));
}

double kernel_cbar(double omega, double delta) {
    check_in_band(omega, delta);
    const double sd = std::sqrt(delta), sw = std::sqrt(omega);
    return 1.0 / (2.0 * std::sqrt(omega * delta)) * std::log((sd - sw) / (sd + sw));
}

cplx kernel_retarded(double omega, double delta) {
    const double pi = 4.0 * std::atan(1.0);
    return {kernel_cbar(omega, delta), pi * kernel_c(omega, delta)};
}

Overlaps overlaps(const UnitaryFrame& v) {
    Overlaps ov{};
    for (int l = 0; l < kModes; ++l) {
        cplx s{};
        for (int x = 0; x < kModes; ++x) s += v(x, l);
        ov.value[l] = s;
    }
    return ov;
}

HermitianView counterterm_markovian(const Overlaps& ov, const Vec3& omega,
                                    const ModelParams& p, double gbar) {
    CVec3 w;
    for (int l = 0; l < kModes; ++l) w[l] = kernel_retarded(omega[l], p.delta);

    const double pref = -0.5 * gbar * gbar;
    ComplexMatrix d(kModes);
    for (int a = 0; a < kModes; ++a) {
        d(a, a) = cplx{pref * std::norm(ov.value[a]) * 2.0 * w[a].real(), 0.0};
        for (int b = a + 1; b < kModes; ++b) {
            const cplx entry =
                pref * std::conj(ov.value[a]) * ov.value[b] * (w[a] + std::conj(w[b]));
            d(a, b) = entry;
            d(b, a) = std::conj(entry);
        }
    }
    return HermitianView(std::move(d), 0.0);
}

Vec3 transport_rhs(const Vec3& n, const Overlaps& ov, const Vec3& omega,
                   const ModelParams& p, double gbar) {
    const double pi = 4.0 * std::atan(1.0);
    Vec3 rhs{};
    for (int l = 0; l < kModes; ++l) {
        if (n[l] < 0.0) throw DomainError("transport_rhs: negative occupation");
        const double rate = 2.0 * pi * gbar * gbar * std::norm(ov.value[l]) *
                            kernel_c(omega[l], p.delta);
        rhs[l] = -rate * (n[l] - bose_einstein(p.beta, omega[l]));
    }
    return rhs;
}

HermitianView delta_omega_to_site_basis(const HermitianView& d, const UnitaryFrame& v) {
    ComplexMatrix x = v.matrix() * d.matrix() * v.matrix().adjoint();
    for (int i = 0; i < x.dim(); ++i) {
        x(i, i) = cplx{x(i, i).real(), 0.0};
        for (int j = i + 1; j < x.dim(); ++j) {
            const cplx h = 0.5 * (x(i, j) + std::conj(x(j, i)));
            x(i, j) = h;
            x(j, i) = std::conj(h);
        }
    }
    return HermitianView(std::move(x), 0.0);
}

} // namespace tw
