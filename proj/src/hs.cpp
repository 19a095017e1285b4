#include "qpt/hs.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <string>

namespace qpt {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kImagTol = 1e-10;

bool is_hermitian(const CMatrix& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_square_dim(const Superoperator& g) {
    if (g.dim < 2 || g.mat.rows() != g.size() || g.mat.cols() != g.size()) {
        throw ShapeError("superoperator matrix is not d^2 x d^2");
    }
}

}  // namespace

Superoperator Superoperator::identity(int d) {
    return {Matrix::Identity(d * d, d * d), d};
}

HermitianBasis build_basis(int d) {
    if (d < 2) {
        throw InvalidArgument("basis dimension must be >= 2, got " + std::to_string(d));
    }
    HermitianBasis basis;
    basis.dim = d;
    basis.elements.reserve(static_cast<std::size_t>(d) * d);

    basis.elements.push_back(CMatrix::Identity(d, d) / std::sqrt(double(d)));

    // Generalized Gell-Mann construction, normalized to Tr[B^2] = 1. For each
    // pair i<j the symmetric element precedes the antisymmetric one, so d=2
    // yields X/sqrt(2), Y/sqrt(2); the diagonal elements follow (Z/sqrt(2)).
    const Complex im(0.0, 1.0);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            CMatrix sym = CMatrix::Zero(d, d);
            sym(i, j) = 1.0 / std::sqrt(2.0);
            sym(j, i) = 1.0 / std::sqrt(2.0);
            basis.elements.push_back(sym);

            CMatrix anti = CMatrix::Zero(d, d);
            anti(i, j) = -im / std::sqrt(2.0);
            anti(j, i) = im / std::sqrt(2.0);
            basis.elements.push_back(anti);
        }
    }
    for (int l = 1; l < d; ++l) {
        CMatrix diag = CMatrix::Zero(d, d);
        const double norm = 1.0 / std::sqrt(double(l) * (l + 1));
        for (int k = 0; k < l; ++k) diag(k, k) = norm;
        diag(l, l) = -double(l) * norm;
        basis.elements.push_back(diag);
    }
    return basis;
}

HSVector vectorize(const CMatrix& op, const HermitianBasis& basis, OperatorKind kind) {
    const int d = basis.dim;
    if (op.rows() != d || op.cols() != d) {
        throw ShapeError("operator dimension does not match basis");
    }
    if (!is_hermitian(op, kHermTol)) {
        throw InvalidArgument("vectorize: input operator is not Hermitian within 1e-10");
    }
    HSVector v;
    v.kind = kind;
    v.coords.resize(d * d);
    for (int k = 0; k < d * d; ++k) {
        v.coords[k] = (basis.elements[k].adjoint() * op).trace().real();
    }
    return v;
}

CMatrix devectorize(const HSVector& v, const HermitianBasis& basis) {
    if (v.size() != basis.size()) {
        throw ShapeError("coordinate vector length does not match basis");
    }
    CMatrix op = CMatrix::Zero(basis.dim, basis.dim);
    for (int k = 0; k < basis.size(); ++k) {
        op += v.coords[k] * basis.elements[k];
    }
    return op;
}

double born_probability(const HSVector& effect, const HSVector& state) {
    if (effect.size() != state.size()) {
        throw ShapeError("born_probability: dimension mismatch");
    }
    if (effect.kind != OperatorKind::effect || state.kind != OperatorKind::state) {
        throw InvalidArgument("born_probability: expected (effect, state) arguments");
    }
    return effect.coords.dot(state.coords);
}

Superoperator unitary_to_superop(const CMatrix& u, const HermitianBasis& basis) {
    const int d = basis.dim;
    if (u.rows() != d || u.cols() != d) {
        throw ShapeError("unitary dimension does not match basis");
    }
    if ((u.adjoint() * u - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
        throw InvalidArgument("unitary_to_superop: U^dag U != 1 within 1e-10");
    }
    Superoperator g;
    g.dim = d;
    g.mat.resize(d * d, d * d);
    for (int j = 0; j < d * d; ++j) {
        const CMatrix conj = u * basis.elements[j] * u.adjoint();
        for (int i = 0; i < d * d; ++i) {
            const Complex entry = (basis.elements[i].adjoint() * conj).trace();
            if (std::abs(entry.imag()) > kImagTol) {
                throw NumericalError("unitary_to_superop: imaginary residue " +
                                     std::to_string(entry.imag()) + " exceeds 1e-10");
            }
            g.mat(i, j) = entry.real();
        }
    }
    return g;
}

Superoperator depolarizing_superop(double gamma, const HermitianBasis& basis) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw InvalidArgument("depolarizing retention must be in [0,1], got " +
                              std::to_string(gamma));
    }
    // rho -> gamma rho + (1-gamma) Tr[rho] 1/d. Entrywise over the basis:
    // gamma delta_ij + ((1-gamma)/d) Tr[Bi^dag] Tr[Bj]; only B0 has a trace.
    const int n = basis.size();
    Superoperator g;
    g.dim = basis.dim;
    g.mat = gamma * Matrix::Identity(n, n);
    CVector traces(n);
    for (int k = 0; k < n; ++k) traces[k] = basis.elements[k].trace();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Complex corr =
                (1.0 - gamma) / double(basis.dim) * std::conj(traces[i]) * traces[j];
            g.mat(i, j) += corr.real();
        }
    }
    return g;
}

Superoperator compose(const Superoperator& a, const Superoperator& b) {
    if (a.dim != b.dim) {
        throw ShapeError("compose: dimension mismatch");
    }
    return {a.mat * b.mat, a.dim};
}

HSVector apply(const Superoperator& a, const HSVector& v) {
    if (v.size() != a.size()) {
        throw ShapeError("apply: dimension mismatch");
    }
    HSVector out;
    out.kind = v.kind;
    out.coords = (v.kind == OperatorKind::state) ? Vector(a.mat * v.coords)
                                                 : Vector(a.mat.transpose() * v.coords);
    return out;
}

ChoiMatrix choi_from_superop(const Superoperator& g) {
    require_square_dim(g);
    const int d = g.dim;
    const HermitianBasis basis = build_basis(d);

    // Complex-linear extension of G to matrix units, via the Hermitian split
    // E_ij = (S + iA)/2 with S = E_ij + E_ji and A = -i(E_ij - E_ji).
    auto apply_herm = [&](const CMatrix& h) {
        HSVector hv = vectorize(h, basis, OperatorKind::state);
        HSVector gv{Vector(g.mat * hv.coords), OperatorKind::state};
        return devectorize(gv, basis);
    };

    const Complex im(0.0, 1.0);
    ChoiMatrix choi;
    choi.dim = d;
    choi.mat = CMatrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            CMatrix unit = CMatrix::Zero(d, d);
            unit(i, j) = 1.0;
            CMatrix image;
            if (i == j) {
                image = apply_herm(unit);
            } else {
                CMatrix sym = CMatrix::Zero(d, d);
                sym(i, j) = 1.0;
                sym(j, i) = 1.0;
                CMatrix anti = CMatrix::Zero(d, d);
                anti(i, j) = -im;
                anti(j, i) = im;
                image = 0.5 * (apply_herm(sym) + im * apply_herm(anti));
            }
            choi.mat += Eigen::kroneckerProduct(image, unit).eval() / double(d);
        }
    }
    // The construction is Hermitian up to roundoff; symmetrize it away.
    choi.mat = 0.5 * (choi.mat + choi.mat.adjoint().eval());
    return choi;
}

CptpReport cptp_report(const Superoperator& g, double tol) {
    require_square_dim(g);
    CptpReport report;

    const ChoiMatrix choi = choi_from_superop(g);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(choi.mat, Eigen::EigenvaluesOnly);
    report.cp_slack = es.eigenvalues().minCoeff();

    Vector first_row = g.mat.row(0).transpose();
    first_row[0] -= 1.0;
    report.tp_slack = first_row.cwiseAbs().maxCoeff();

    report.cp_ok = report.cp_slack >= -tol;
    report.tp_ok = report.tp_slack <= tol;
    return report;
}

GateFidelity gate_fidelity(const Superoperator& g, const CMatrix& u) {
    require_square_dim(g);
    const HermitianBasis basis = build_basis(g.dim);
    const Superoperator target = unitary_to_superop(u, basis);
    const double d = double(g.dim);

    GateFidelity f;
    f.entanglement = (target.mat.transpose() * g.mat).trace() / (d * d);
    f.average = (d * f.entanglement + 1.0) / (d + 1.0);
    return f;
}

CMatrix rotated_state(const CVector& psi, const CVector& psi_perp, double phi) {
    if (psi.size() != psi_perp.size()) {
        throw ShapeError("rotated_state: ket dimension mismatch");
    }
    if (std::abs(psi.norm() - 1.0) > 1e-10 || std::abs(psi_perp.norm() - 1.0) > 1e-10) {
        throw InvalidArgument("rotated_state: kets must be normalized");
    }
    if (std::abs(psi.dot(psi_perp)) > 1e-10) {
        throw InvalidArgument("rotated_state: kets must be orthogonal");
    }
    const CVector rotated = std::cos(phi) * psi + std::sin(phi) * psi_perp;
    return rotated * rotated.adjoint();
}

}  // namespace qpt
