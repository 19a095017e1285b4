#include "qpt/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qpt::linalg {

namespace {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

std::string fmt_complex(Complex z) {
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return os.str();
}

bool is_integer(double p) { return p == std::round(p); }

}  // namespace

SVDFactors svd(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) {
        throw ShapeError("svd: empty matrix");
    }
    Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Matrix pinv(const Matrix& a, std::optional<int> rank, double rtol) {
    const SVDFactors f = svd(a);
    const int n = static_cast<int>(f.sigma.size());
    if (rank && (*rank < 0 || *rank > n)) {
        throw InvalidArgument("pinv: forced rank " + std::to_string(*rank) +
                              " exceeds min(dims) = " + std::to_string(n));
    }
    const double cutoff = rtol * f.sigma[0];
    Vector inv = Vector::Zero(n);
    const int keep = rank ? *rank : n;
    for (int i = 0; i < keep; ++i) {
        if (!rank && f.sigma[i] <= cutoff) break;
        if (f.sigma[i] > 0.0) inv[i] = 1.0 / f.sigma[i];
    }
    return f.v * inv.asDiagonal() * f.u.transpose();
}

Matrix truncate_to_rank(const Matrix& a, int r) {
    if (r <= 0) {
        throw InvalidArgument("truncate_to_rank: target rank must be positive");
    }
    const int n = static_cast<int>(std::min(a.rows(), a.cols()));
    if (r > n) {
        throw InvalidArgument("truncate_to_rank: rank " + std::to_string(r) +
                              " exceeds min(dims) = " + std::to_string(n));
    }
    const SVDFactors f = svd(a);
    Vector sigma = f.sigma;
    for (int i = r; i < n; ++i) sigma[i] = 0.0;
    return f.u * sigma.asDiagonal() * f.v.transpose();
}

Matrix frac_power(const Matrix& a, double p) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ShapeError("frac_power: matrix must be square and nonempty");
    }
    if (p == 0.0) return Matrix::Identity(a.rows(), a.cols());
    if (p == 1.0) return a;

    const int n = static_cast<int>(a.rows());
    CVector lambda(n);
    CMatrix vecs(n, n);

    // Symmetric matrices get the self-adjoint solver: orthonormal eigenvectors
    // even with repeated eigenvalues (e.g. depolarizing SPAM error matrices).
    const bool symmetric = (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
    if (symmetric) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        lambda = es.eigenvalues().cast<Complex>();
        vecs = es.eigenvectors().cast<Complex>();
    } else {
        Eigen::EigenSolver<Matrix> es(a);
        lambda = es.eigenvalues();
        vecs = es.eigenvectors();

        Eigen::JacobiSVD<CMatrix> vsvd(vecs);
        const double cond =
            vsvd.singularValues()[0] / vsvd.singularValues()[vsvd.singularValues().size() - 1];
        if (!(cond < 1e8)) {
            // Report the closest eigenvalue pair: the near-degeneracy behind
            // the ill-conditioned eigenbasis.
            double best = std::numeric_limits<double>::infinity();
            Complex l1 = lambda[0], l2 = lambda[0];
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    const double gap = std::abs(lambda[i] - lambda[j]);
                    if (gap < best) {
                        best = gap;
                        l1 = lambda[i];
                        l2 = lambda[j];
                    }
                }
            }
            throw NumericalError(
                "frac_power: near-defective matrix (eigenvector condition number " +
                std::to_string(cond) + "; closest eigenvalues " + fmt_complex(l1) + ", " +
                fmt_complex(l2) + ")");
        }
    }

    for (int i = 0; i < n; ++i) {
        const Complex l = lambda[i];
        if (std::abs(l) < 1e-10) {
            throw NumericalError("frac_power: eigenvalue " + fmt_complex(l) +
                                 " too close to zero");
        }
        const bool on_negative_axis =
            l.real() < 0.0 && std::abs(l.imag()) <= 1e-12 * std::max(1.0, std::abs(l));
        if (on_negative_axis && !is_integer(p)) {
            throw NumericalError("frac_power: eigenvalue " + fmt_complex(l) +
                                 " lies on the negative real axis (principal branch undefined)");
        }
    }

    CVector powered(n);
    for (int i = 0; i < n; ++i) powered[i] = std::pow(lambda[i], p);
    const CMatrix result = vecs * powered.asDiagonal() * vecs.inverse();

    const double imag_residue = result.imag().cwiseAbs().maxCoeff();
    if (imag_residue > 1e-8) {
        throw NumericalError("frac_power: imaginary residue " + std::to_string(imag_residue) +
                             " exceeds 1e-8");
    }
    return result.real();
}

EigenSet eigenvalues(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ShapeError("eigenvalues: matrix must be square and nonempty");
    }
    Eigen::EigenSolver<Matrix> es(a, false);
    EigenSet set;
    set.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
    std::sort(set.values.begin(), set.values.end(), [](Complex x, Complex y) {
        if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
        return std::arg(x) < std::arg(y);
    });
    return set;
}

double eigen_delta(const EigenSet& true_vals, const EigenSet& est_vals) {
    const std::size_t n = true_vals.size();
    if (n != est_vals.size()) {
        throw ShapeError("eigen_delta: eigenvalue sets differ in length");
    }
    if (n == 0) return 0.0;

    if (n <= 6) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                total += std::abs(true_vals.values[i] - est_vals.values[perm[i]]);
            }
            best = std::min(best, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best / double(n);
    }

    // Greedy nearest-neighbour pairing; may be suboptimal.
    std::vector<bool> used(n, false);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double dist = std::abs(true_vals.values[i] - est_vals.values[j]);
            if (dist < best) {
                best = dist;
                pick = j;
            }
        }
        used[pick] = true;
        total += best;
    }
    return total / double(n);
}

}  // namespace qpt::linalg
