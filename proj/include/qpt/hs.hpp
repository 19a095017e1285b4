#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "qpt/errors.hpp"

namespace qpt {

// ============================================================================
// Hilbert-Schmidt space: Hermitian operators on a d-dimensional Hilbert space
// represented as real d^2-vectors over an orthonormal Hermitian basis.
//
// The basis is always ordered with B0 = 1/sqrt(d) first, so a state vector
// has first coordinate 1/sqrt(d) and a trace-preserving transfer matrix has
// first row (1, 0, ..., 0).
// ============================================================================

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

enum class OperatorKind { state, effect };

// Orthonormal Hermitian basis of B(H): Tr[Bi^dag Bj] = delta_ij, B0 = 1/sqrt(d).
// For d=2 the elements are {1, X, Y, Z}/sqrt(2) in that order; for d>2 the
// remaining elements are normalized generalized Gell-Mann matrices.
struct HermitianBasis {
    int dim = 0;
    std::vector<CMatrix> elements;

    int size() const { return dim * dim; }
};

HermitianBasis build_basis(int d);

// Coordinates of a Hermitian operator in a HermitianBasis. States are column
// vectors, effects row vectors; the distinction matters for apply().
struct HSVector {
    Vector coords;
    OperatorKind kind = OperatorKind::state;

    int size() const { return static_cast<int>(coords.size()); }
};

// Transfer matrix of a Hermiticity-preserving map: real d^2 x d^2.
struct Superoperator {
    Matrix mat;
    int dim = 0;

    int size() const { return dim * dim; }

    static Superoperator identity(int d);
};

struct ChoiMatrix {
    CMatrix mat;
    int dim = 0;
};

struct CptpReport {
    double cp_slack = 0.0;  // min eigenvalue of the Choi matrix (negative => CP violated)
    double tp_slack = 0.0;  // max |first row of transfer matrix - e0^T|
    bool cp_ok = false;
    bool tp_ok = false;
};

enum class FidelityConvention { entanglement, average };

struct GateFidelity {
    double entanglement = 0.0;
    double average = 0.0;

    double value(FidelityConvention c) const {
        return c == FidelityConvention::entanglement ? entanglement : average;
    }
};

// ----------------------------------------------------------------------------
// Vectorization and the Born rule
// ----------------------------------------------------------------------------

// coords[k] = Tr[Bk^dag op]. Input must be Hermitian to 1e-10 entrywise.
HSVector vectorize(const CMatrix& op, const HermitianBasis& basis, OperatorKind kind);

// Inverse of vectorize: sum_k coords[k] Bk.
CMatrix devectorize(const HSVector& v, const HermitianBasis& basis);

// Tr[E rho] as the real inner product of coordinates. Not clamped.
double born_probability(const HSVector& effect, const HSVector& state);

// ----------------------------------------------------------------------------
// Channel constructors
// ----------------------------------------------------------------------------

// Transfer matrix of rho -> U rho U^dag. Requires U^dag U = 1 to 1e-10.
Superoperator unitary_to_superop(const CMatrix& u, const HermitianBasis& basis);

// Transfer matrix of rho -> gamma rho + (1-gamma) 1/d, i.e. diag(1, gamma, ...).
Superoperator depolarizing_superop(double gamma, const HermitianBasis& basis);

// compose(A, B) is "B then A": matrix product A*B.
Superoperator compose(const Superoperator& a, const Superoperator& b);

// Apply a channel: states transform as mat*v, effects as mat^T*v (the adjoint
// action, so that born(apply(A, E), rho) = born(E, apply(A, rho))).
HSVector apply(const Superoperator& a, const HSVector& v);

// ----------------------------------------------------------------------------
// Diagnostics
// ----------------------------------------------------------------------------

// Choi matrix (G (x) 1)[|bell><bell|] with |bell> = sum_i |ii>/sqrt(d).
ChoiMatrix choi_from_superop(const Superoperator& g);

// CP slack (min Choi eigenvalue) and TP slack (first-row deviation).
// Diagnostic only; never modifies g.
CptpReport cptp_report(const Superoperator& g, double tol = 1e-10);

// Entanglement (process) fidelity Tr[T_U^T mat(G)]/d^2 and the average gate
// fidelity (d F_e + 1)/(d + 1) of G against the unitary target U.
GateFidelity gate_fidelity(const Superoperator& g, const CMatrix& u);

// |psi_phi><psi_phi| with |psi_phi> = cos(phi)|psi> + sin(phi)|psi_perp>.
// Requires orthonormal kets; infidelity with |psi> is sin^2(phi).
CMatrix rotated_state(const CVector& psi, const CVector& psi_perp, double phi);

}  // namespace qpt
