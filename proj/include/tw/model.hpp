#ifndef TW_MODEL_HPP
#define TW_MODEL_HPP

#include <array>

#include "tw/matrix.hpp"

namespace tw {

// Mode labels. Row index x runs over sites +1, 0, -1 in that order.
enum Mode : int { kG = 0, kO = 1, kE = 2 };
constexpr int kModes = 3;

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

// Physical constants of the triple well + reservoir, in units of the hopping
// J (times in 1/J). The chemical potential is fixed by the equilibrium solve,
// not by the user.
struct ModelParams {
    double mu = 0.0;       // chemical potential, set by solve_equilibrium
    double delta = 0.0;    // reservoir bandwidth
    double gbar_before = 0.0;
    double gbar_after = 0.0;
    double beta = 0.0;     // inverse temperature
    double n_total = 0.0;  // initial total particle number of the well system

    void validate() const;
    bool operator==(const ModelParams&) const = default;
};

// Mode sums I_l = sum_x V[x][l].
struct Overlaps {
    CVec3 value;
};

// -mu on the diagonal, -J = -1 on the nearest-neighbour off-diagonals.
HermitianView build_h0(const ModelParams& p);

// 1/(e^{beta omega} - 1); beta*omega must be positive.
double bose_einstein(double beta, double omega);

// Reservoir kernels for the quadratic band Omega_k = k^2 of width delta.
// Valid strictly inside the band; the log in cbar diverges at the edge.
double kernel_c(double omega, double delta);     // 1/(2 sqrt(omega delta))
double kernel_cbar(double omega, double delta);  // c * log((sqD-sqw)/(sqD+sqw))
// cbar(omega) + i pi c(omega), the retarded combination.
cplx kernel_retarded(double omega, double delta);

// Rejects omega within 1e-6*delta of either band edge.
void check_in_band(double omega, double delta);

Overlaps overlaps(const UnitaryFrame& v);

// Markovian counter term:
//   dw[l1][l2] = -(gbar^2/2) conj(I_l1) I_l2 (W(w_l1) + conj(W(w_l2))),
// with W = cbar + i pi c. Hermitian by construction; diagonal entries are
// -gbar^2 |I_l|^2 cbar(w_l).
HermitianView counterterm_markovian(const Overlaps& ov, const Vec3& omega,
                                    const ModelParams& p, double gbar);

// Transport right-hand side dn_l/dt = -2 pi gbar^2 |I_l|^2 c(w_l) (n_l - N(w_l)).
Vec3 transport_rhs(const Vec3& n, const Overlaps& ov, const Vec3& omega,
                   const ModelParams& p, double gbar);

// dw^x = V dw^l V^dag (site basis), symmetrized against rounding.
HermitianView delta_omega_to_site_basis(const HermitianView& d, const UnitaryFrame& v);

} // namespace tw

#endif
