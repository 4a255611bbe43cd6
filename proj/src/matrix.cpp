#include "tw/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tw {

double hermiticity_defect(const ComplexMatrix& m) {
    double d = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
    return d;
}

double unitarity_defect(const ComplexMatrix& v) {
    const int n = v.dim();
    double d = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx s = (i == j) ? cplx{-1.0} : cplx{};
            for (int x = 0; x < n; ++x) s += std::conj(v(x, i)) * v(x, j);
            d = std::max(d, std::abs(s));
        }
    return d;
}

HermitianView::HermitianView(ComplexMatrix m, double tol) : m_(std::move(m)) {
    if (!m_.all_finite()) throw ContractError("HermitianView: non-finite entries");
    const double d = hermiticity_defect(m_);
    if (d > tol)
        throw ContractError("HermitianView: matrix is not Hermitian (defect " +
                            std::to_string(d) + ")");
}

UnitaryFrame::UnitaryFrame(ComplexMatrix v, double tol) : v_(std::move(v)) {
    if (!v_.all_finite()) throw ContractError("UnitaryFrame: non-finite entries");
    const double d = unitarity_defect(v_);
    if (d > tol)
        throw ContractError("UnitaryFrame: matrix is not unitary (defect " +
                            std::to_string(d) + ")");
}

namespace {

double offdiag_max(const ComplexMatrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            if (i != j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

// One Jacobi rotation zeroing a(p,q), accumulated into v.
void rotate(ComplexMatrix& a, ComplexMatrix& v, int p, int q) {
    const cplx apq = a(p, q);
    const double g = std::abs(apq);
    if (g == 0.0) return;
    const cplx phase = apq / g; // e^{i phi}

    const double alpha = a(p, p).real();
    const double beta = a(q, q).real();
    const double tau = (beta - alpha) / (2.0 * g);
    const double sgn = (tau >= 0.0) ? 1.0 : -1.0;
    const double t = sgn / (std::abs(tau) + std::hypot(1.0, tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    // R(p,p)=c, R(p,q)=s*phase, R(q,p)=-s*conj(phase), R(q,q)=c
    const int n = a.dim();
    for (int i = 0; i < n; ++i) { // columns: A <- A R
        const cplx aip = a(i, p), aiq = a(i, q);
        a(i, p) = c * aip - s * std::conj(phase) * aiq;
        a(i, q) = s * phase * aip + c * aiq;
    }
    for (int j = 0; j < n; ++j) { // rows: A <- R^dag A
        const cplx apj = a(p, j), aqj = a(q, j);
        a(p, j) = c * apj - s * phase * aqj;
        a(q, j) = s * std::conj(phase) * apj + c * aqj;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = cplx{a(p, p).real(), 0.0};
    a(q, q) = cplx{a(q, q).real(), 0.0};
    for (int i = 0; i < n; ++i) { // eigenvectors: V <- V R
        const cplx vip = v(i, p), viq = v(i, q);
        v(i, p) = c * vip - s * std::conj(phase) * viq;
        v(i, q) = s * phase * vip + c * viq;
    }
}

} // namespace

EigResult eig_hermitian(const HermitianView& m) {
    const int n = m.dim();
    ComplexMatrix a = m.matrix();
    // Work on the exactly Hermitian average; the view already guarantees the
    // defect is below 1e-12.
    for (int i = 0; i < n; ++i) {
        a(i, i) = cplx{a(i, i).real(), 0.0};
        for (int j = i + 1; j < n; ++j) {
            const cplx h = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = h;
            a(j, i) = std::conj(h);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double scale = std::max(a.max_abs(), 1.0);
    const double tol = 1e-15 * scale;
    const int max_sweeps = 60;
    int sweep = 0;
    while (offdiag_max(a) > tol) {
        if (++sweep > max_sweeps)
            throw ConvergenceError("eig_hermitian: Jacobi sweeps exhausted", offdiag_max(a));
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > tol * 1e-2) rotate(a, v, p, q);
    }

    std::vector<double> lam(n);
    for (int i = 0; i < n; ++i) lam[i] = a(i, i).real();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return lam[i] < lam[j]; });

    ComplexMatrix sorted(n);
    std::vector<double> w(n);
    for (int c = 0; c < n; ++c) {
        w[c] = lam[order[c]];
        for (int r = 0; r < n; ++r) sorted(r, c) = v(r, order[c]);
    }

    // Phase convention: largest-magnitude component real positive. Near-ties
    // (within 1e-9 relative) resolve to the lowest index so that symmetric
    // vectors like (1,0,-1)/sqrt2 are not re-phased by rounding noise.
    for (int c = 0; c < n; ++c) {
        int k = 0;
        double best = 0.0;
        for (int r = 0; r < n; ++r) {
            const double ab = std::abs(sorted(r, c));
            if (ab > best * (1.0 + 1e-9)) {
                best = ab;
                k = r;
            }
        }
        const cplx ph = std::conj(sorted(k, c)) / best;
        for (int r = 0; r < n; ++r) sorted(r, c) *= ph;
        sorted(k, c) = cplx{best, 0.0};
    }

    return EigResult{std::move(w), UnitaryFrame(std::move(sorted))};
}

EigResult eig_hermitian_nondegenerate(const HermitianView& m, double gap_tol) {
    EigResult r = eig_hermitian(m);
    for (size_t i = 1; i < r.eigenvalues.size(); ++i)
        if (r.eigenvalues[i] - r.eigenvalues[i - 1] < gap_tol)
            throw DomainError("degenerate spectrum: eigenvalue gap " +
                              std::to_string(r.eigenvalues[i] - r.eigenvalues[i - 1]) +
                              " below " + std::to_string(gap_tol));
    return r;
}

ComplexMatrix propagate_unitary(const HermitianView& h, double shift, double dt) {
    if (!(dt > 0.0)) throw ContractError("propagate_unitary: dt must be positive");
    const EigResult e = eig_hermitian(h);
    const int n = h.dim();
    const ComplexMatrix& v = e.eigenvectors.matrix();
    ComplexMatrix u(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx s{};
            for (int k = 0; k < n; ++k) {
                const double th = -dt * (e.eigenvalues[k] - shift);
                s += v(i, k) * cplx{std::cos(th), std::sin(th)} * std::conj(v(j, k));
            }
            u(i, j) = s;
        }
    return u;
}

UnitaryFrame reunitarize(const ComplexMatrix& v) {
    const double defect = unitarity_defect(v);
    if (defect <= 1e-13) return UnitaryFrame(v);
    if (defect > 0.25)
        throw ContractError("reunitarize: input too far from unitary (defect " +
                            std::to_string(defect) + ")");
    const int n = v.dim();
    const ComplexMatrix b = v.adjoint() * v; // Hermitian positive definite
    const EigResult e = eig_hermitian(HermitianView(b));
    if (e.eigenvalues.front() < 1e-12)
        throw DomainError("reunitarize: singular frame (smallest Gram eigenvalue " +
                          std::to_string(e.eigenvalues.front()) + ")");
    // polar factor V (V^dag V)^{-1/2}
    const ComplexMatrix& w = e.eigenvectors.matrix();
    ComplexMatrix isqrt(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx s{};
            for (int k = 0; k < n; ++k)
                s += w(i, k) * (1.0 / std::sqrt(e.eigenvalues[k])) * std::conj(w(j, k));
            isqrt(i, j) = s;
        }
    return UnitaryFrame(v * isqrt);
}

} // namespace tw
