#ifndef TW_MATRIX_HPP
#define TW_MATRIX_HPP

#include <complex>
#include <vector>

#include "tw/errors.hpp"

namespace tw {

using cplx = std::complex<double>;

// Dense square complex matrix, row-major. Sized for small N (the model uses
// N = 3) but nothing below assumes a fixed dimension.
class ComplexMatrix {
  public:
    explicit ComplexMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {
        if (n <= 0) throw ContractError("ComplexMatrix: dimension must be positive");
    }

    static ComplexMatrix identity(int n) {
        ComplexMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& z : a_) m = std::max(m, std::abs(z));
        return m;
    }

    bool all_finite() const {
        for (const cplx& z : a_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        ComplexMatrix r(a.n_);
        for (int i = 0; i < a.n_; ++i)
            for (int k = 0; k < a.n_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (int j = 0; j < a.n_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
        ComplexMatrix r(a.n_);
        for (size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = a.a_[i] + b.a_[i];
        return r;
    }

    friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
        ComplexMatrix r(a.n_);
        for (size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = a.a_[i] - b.a_[i];
        return r;
    }

    friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
        ComplexMatrix r(a.n_);
        for (size_t i = 0; i < a.a_.size(); ++i) r.a_[i] = s * a.a_[i];
        return r;
    }

    bool operator==(const ComplexMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

  private:
    int n_;
    std::vector<cplx> a_;
};

// Max-norm distance from Hermitian symmetry.
double hermiticity_defect(const ComplexMatrix& m);
// Max-norm of V^dag V - I.
double unitarity_defect(const ComplexMatrix& v);

// A matrix checked Hermitian on construction (||M - M^dag||_max <= 1e-12,
// energies measured in units of J throughout).
class HermitianView {
  public:
    explicit HermitianView(ComplexMatrix m, double tol = 1e-12);
    const ComplexMatrix& matrix() const { return m_; }
    int dim() const { return m_.dim(); }
    const cplx& operator()(int i, int j) const { return m_(i, j); }

  private:
    ComplexMatrix m_;
};

// A matrix checked unitary on construction (||V^dag V - I||_max <= 1e-10).
// For the model, column l runs over the ground / odd / even-excited states.
class UnitaryFrame {
  public:
    explicit UnitaryFrame(ComplexMatrix v, double tol = 1e-10);
    const ComplexMatrix& matrix() const { return v_; }
    int dim() const { return v_.dim(); }
    const cplx& operator()(int x, int l) const { return v_(x, l); }

  private:
    ComplexMatrix v_;
};

struct EigResult {
    std::vector<double> eigenvalues; // ascending
    UnitaryFrame eigenvectors;       // column i pairs with eigenvalues[i]
};

// Cyclic complex Jacobi diagonalization. Eigenvalues ascending; each
// eigenvector's largest-magnitude component is made real positive so the
// result is deterministic.
EigResult eig_hermitian(const HermitianView& m);

// eig_hermitian plus a rejection of (near-)degenerate spectra, used on the
// model's diagonalization paths where reproducible eigenvectors are required.
EigResult eig_hermitian_nondegenerate(const HermitianView& m, double gap_tol = 1e-10);

// exp(-i dt (H - shift I)) via the spectral decomposition of H. dt > 0.
ComplexMatrix propagate_unitary(const HermitianView& h, double shift, double dt);

// Nearest unitary in Frobenius norm (polar factor). Inputs already unitary
// within 1e-13 are returned unchanged.
UnitaryFrame reunitarize(const ComplexMatrix& v);

} // namespace tw

#endif
