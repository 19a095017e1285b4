#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

#include "qpt/errors.hpp"

namespace qpt::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;

struct SVDFactors {
    Matrix u;      // left singular vectors (thin)
    Vector sigma;  // non-increasing, non-negative
    Matrix v;      // right singular vectors (thin)

    Matrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

// Eigenvalues with multiplicity, ordered by (-|lambda|, phase).
struct EigenSet {
    std::vector<Complex> values;

    std::size_t size() const { return values.size(); }
};

SVDFactors svd(const Matrix& a);

// Moore-Penrose pseudoinverse. Singular values below rtol * sigma_max are
// zeroed; if rank is given, exactly the top `rank` singular values are kept.
Matrix pinv(const Matrix& a, std::optional<int> rank = std::nullopt, double rtol = 1e-12);

// Best rank-r approximation in Frobenius/spectral norm (Eckart-Young).
Matrix truncate_to_rank(const Matrix& a, int r);

// A^p by complex eigendecomposition with principal-branch powers.
// Requires A diagonalizable (eigenvector condition number < 1e8), no
// eigenvalue with |lambda| < 1e-10, and for non-integer p no eigenvalue on
// the closed negative real axis.
Matrix frac_power(const Matrix& a, double p);

EigenSet eigenvalues(const Matrix& a);

// Mean matched absolute eigenvalue error (1/n) min_pi sum_i |a_i - b_pi(i)|.
// Exact permutation minimum for n <= 6, greedy nearest-neighbour above
// (the greedy pairing can be suboptimal).
double eigen_delta(const EigenSet& true_vals, const EigenSet& est_vals);

}  // namespace qpt::linalg
