// Independent test oracles: direct complex-matrix computations that do not
// route through the library's Hilbert-Schmidt machinery, plus seeded random
// generators and brute-force reference implementations.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Complex = std::complex<double>;

inline MatrixXcd pauli_i() { return MatrixXcd::Identity(2, 2); }
inline MatrixXcd pauli_x() {
    MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline MatrixXcd pauli_y() {
    MatrixXcd m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
inline MatrixXcd pauli_z() {
    MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// |+x>, |0>, ... as raw kets.
inline VectorXcd ket(const std::string& label) {
    const double s = 1.0 / std::sqrt(2.0);
    VectorXcd v(2);
    if (label == "+x") v << s, s;
    else if (label == "-x") v << s, -s;
    else if (label == "+y") v << s, Complex(0, s);
    else if (label == "-y") v << s, Complex(0, -s);
    else if (label == "+z") v << 1, 0;
    else if (label == "-z") v << 0, 1;
    else throw std::runtime_error("oracle::ket: unknown label " + label);
    return v;
}

inline MatrixXcd proj(const VectorXcd& psi) { return psi * psi.adjoint(); }

// Born rule straight from the 2x2 (or dxd) matrices.
inline double direct_born(const MatrixXcd& effect, const MatrixXcd& rho) {
    return (effect.adjoint() * rho).trace().real();
}

// Transfer matrix of U . U^dag over the normalized Pauli basis, written out
// longhand so it does not share code with the library path.
inline MatrixXd conjugation_transfer(const MatrixXcd& u) {
    const std::vector<MatrixXcd> basis = {pauli_i() / std::sqrt(2.0), pauli_x() / std::sqrt(2.0),
                                          pauli_y() / std::sqrt(2.0),
                                          pauli_z() / std::sqrt(2.0)};
    MatrixXd t(4, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            t(i, j) = (basis[i].adjoint() * u * basis[j] * u.adjoint()).trace().real();
        }
    }
    return t;
}

inline MatrixXcd random_ginibre(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXcd g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = Complex(normal(rng), normal(rng));
    }
    return g;
}

inline MatrixXcd random_hermitian(std::mt19937_64& rng, int d) {
    const MatrixXcd g = random_ginibre(rng, d);
    return 0.5 * (g + g.adjoint());
}

inline MatrixXcd random_unitary(std::mt19937_64& rng, int d) {
    const Eigen::HouseholderQR<MatrixXcd> qr(random_ginibre(rng, d));
    MatrixXcd q = qr.householderQ();
    // Fix the phases so the distribution is Haar (and deterministic).
    const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        const Complex diag = r(j, j);
        if (std::abs(diag) > 0) q.col(j) *= diag / std::abs(diag);
    }
    return q;
}

inline MatrixXd random_real(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = scale * normal(rng);
    }
    return m;
}

// Exhaustive permutation minimum of (1/n) sum |a_i - b_pi(i)|.
inline double brute_force_delta(std::vector<Complex> a, std::vector<Complex> b) {
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[perm[i]]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / double(a.size());
}

}  // namespace oracle
