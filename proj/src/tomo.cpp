#include "qpt/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qpt {

namespace {

constexpr double kCondLimit = 1e8;
constexpr double kRankRtol = 1e-10;

int svd_rank(const Matrix& a, double rtol = kRankRtol) {
    const linalg::SVDFactors f = linalg::svd(a);
    const double cutoff = rtol * f.sigma[0];
    int rank = 0;
    for (int i = 0; i < f.sigma.size(); ++i) {
        if (f.sigma[i] > cutoff) ++rank;
    }
    return rank;
}

double condition_number(const Matrix& a) {
    const linalg::SVDFactors f = linalg::svd(a);
    const double smin = f.sigma[f.sigma.size() - 1];
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return f.sigma[0] / smin;
}

Matrix invert_frame_matrix(const Matrix& a, const std::string& name) {
    const double cond = condition_number(a);
    if (!(cond < kCondLimit)) {
        throw NumericalError("frame matrix " + name + " is singular or ill-conditioned "
                             "(condition number " + std::to_string(cond) + ")");
    }
    return a.inverse();
}

void require_square_frame(const Frame& frame, const std::string& op) {
    if (!frame.square()) {
        throw ShapeError(op + ": requires a square frame (K_E = K_S = d^2), got " +
                         std::to_string(frame.num_effects()) + " effects and " +
                         std::to_string(frame.num_states()) + " states");
    }
}

void require_table_shape(const Frame& frame, const ProbMatrix& table, const std::string& name) {
    if (table.rows() != frame.num_effects() || table.cols() != frame.num_states()) {
        throw ShapeError(name + " table is " + std::to_string(table.rows()) + "x" +
                         std::to_string(table.cols()) + " but the frame has " +
                         std::to_string(frame.num_effects()) + " effects and " +
                         std::to_string(frame.num_states()) + " states");
    }
}

EstimateDiagnostics make_diagnostics(const Superoperator& g_hat, const Superoperator& g0) {
    EstimateDiagnostics diag;
    const CptpReport report = cptp_report(g_hat);
    diag.cp_slack = report.cp_slack;
    diag.tp_slack = report.tp_slack;
    diag.spectrum = linalg::eigenvalues(g_hat.mat);
    diag.g0 = g0;
    return diag;
}

Matrix frac_power_of_spam(const Matrix& e_hat, double p) {
    try {
        return linalg::frac_power(e_hat, p);
    } catch (const NumericalError& err) {
        throw NumericalError(std::string(err.what()) +
                             "; the observed SPAM error is too large for gauge "
                             "regularization (E-hat must be close to the identity)");
    }
}

}  // namespace

ProbMatrix select_rows(const ProbMatrix& table, const std::vector<std::string>& labels) {
    ProbMatrix out;
    out.exact = table.exact;
    out.col_labels = table.col_labels;
    out.row_labels = labels;
    out.values.resize(labels.size(), table.cols());
    if (table.shots) out.shots.emplace(labels.size(), table.cols());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto it = std::find(table.row_labels.begin(), table.row_labels.end(), labels[i]);
        if (it == table.row_labels.end()) {
            throw ShapeError("select_rows: no row labelled '" + labels[i] + "'");
        }
        const auto src = static_cast<int>(it - table.row_labels.begin());
        out.values.row(static_cast<int>(i)) = table.values.row(src);
        if (table.shots) out.shots->row(static_cast<int>(i)) = table.shots->row(src);
    }
    return out;
}

Frame::Frame(Matrix m, Matrix s, int d, std::vector<std::string> effects,
             std::vector<std::string> states)
    : m0(std::move(m)), s0(std::move(s)), dim(d),
      effect_labels(std::move(effects)), state_labels(std::move(states)) {
    const int d2 = dim * dim;
    if (dim < 2 || m0.cols() != d2 || s0.rows() != d2) {
        throw ShapeError("frame matrices must be K_E x d^2 and d^2 x K_S");
    }
    if (m0.rows() < d2 || s0.cols() < d2) {
        throw ShapeError("frame needs at least d^2 effects and d^2 states");
    }
    if (svd_rank(m0) != d2) {
        throw NumericalError("effect matrix M0 is not informationally complete (rank < d^2)");
    }
    if (svd_rank(s0) != d2) {
        throw NumericalError("state matrix S0 is not informationally complete (rank < d^2)");
    }
    if (!effect_labels.empty() && static_cast<int>(effect_labels.size()) != m0.rows()) {
        throw ShapeError("effect label count does not match M0");
    }
    if (!state_labels.empty() && static_cast<int>(state_labels.size()) != s0.cols()) {
        throw ShapeError("state label count does not match S0");
    }
}

Estimate standard_qpt(const Frame& frame, const ProbMatrix& p_hat) {
    require_square_frame(frame, "standard_qpt");
    require_table_shape(frame, p_hat, "gate");

    const Matrix m_inv = invert_frame_matrix(frame.m0, "M0");
    const Matrix s_inv = invert_frame_matrix(frame.s0, "S0");

    Estimate est;
    est.g_hat = {m_inv * p_hat.values * s_inv, frame.dim};
    est.diagnostics = make_diagnostics(est.g_hat, est.g_hat);
    return est;
}

Superoperator estimate_spam_error(const Frame& frame, const ProbMatrix& i_hat) {
    require_square_frame(frame, "estimate_spam_error");
    require_table_shape(frame, i_hat, "calibration");

    const Matrix m_inv = invert_frame_matrix(frame.m0, "M0");
    const Matrix s_inv = invert_frame_matrix(frame.s0, "S0");
    return {m_inv * i_hat.values * s_inv, frame.dim};
}

Estimate spam_corrected_qpt(const Frame& frame, const ProbMatrix& i_hat,
                            const ProbMatrix& p_hat, double gauge_p) {
    const Superoperator e_hat = estimate_spam_error(frame, i_hat);
    const Estimate uncorrected = standard_qpt(frame, p_hat);
    const Superoperator& g0 = uncorrected.g_hat;

    const Matrix left = frac_power_of_spam(e_hat.mat, gauge_p - 1.0);
    const Matrix right = frac_power_of_spam(e_hat.mat, -gauge_p);

    Estimate est;
    est.g_hat = {left * g0.mat * right, frame.dim};
    est.e_hat = e_hat;
    est.gauge_p = gauge_p;
    est.m_hat = frame.m0 * frac_power_of_spam(e_hat.mat, 1.0 - gauge_p);
    est.s_hat = frac_power_of_spam(e_hat.mat, gauge_p) * frame.s0;
    est.diagnostics = make_diagnostics(est.g_hat, g0);
    return est;
}

SpamConsistencyReport spam_consistency_check(const Frame& frame, const ProbMatrix& i_hat) {
    require_table_shape(frame, i_hat, "calibration");
    if (!i_hat.exact && !i_hat.shots) {
        throw InvalidArgument("spam_consistency_check: calibration table has no shot counts");
    }

    const Matrix predicted = frame.m0 * frame.s0;
    SpamConsistencyReport report;
    report.entries = i_hat.rows() * i_hat.cols();

    for (int i = 0; i < i_hat.rows(); ++i) {
        for (int j = 0; j < i_hat.cols(); ++j) {
            const double deviation = i_hat.values(i, j) - predicted(i, j);
            double z = 0.0;
            if (i_hat.exact) {
                z = std::abs(deviation) <= 1e-12 ? 0.0
                                                 : std::numeric_limits<double>::infinity();
            } else {
                const double n = static_cast<double>((*i_hat.shots)(i, j));
                const double q =
                    std::clamp(predicted(i, j), 1.0 / (2.0 * n), 1.0 - 1.0 / (2.0 * n));
                z = deviation / std::sqrt(q * (1.0 - q) / n);
            }
            report.max_abs_z = std::max(report.max_abs_z, std::abs(z));
            if (std::abs(z) > 3.0) ++report.outliers;
        }
    }
    report.pass = report.max_abs_z <= 5.0 &&
                  report.outliers <= 0.05 * static_cast<double>(report.entries);
    return report;
}

Estimate ols_qpt(const Frame& frame, const ProbMatrix& p_hat) {
    require_table_shape(frame, p_hat, "gate");
    const int d2 = frame.dim * frame.dim;

    Estimate est;
    est.g_hat = {linalg::pinv(frame.m0, d2) * p_hat.values * linalg::pinv(frame.s0, d2),
                 frame.dim};
    est.diagnostics = make_diagnostics(est.g_hat, est.g_hat);
    return est;
}

Estimate overcomplete_spam_corrected_qpt(const Frame& frame, const ProbMatrix& i_hat,
                                         const ProbMatrix& p_hat,
                                         const OvercompleteOptions& options) {
    require_table_shape(frame, i_hat, "calibration");
    require_table_shape(frame, p_hat, "gate");
    const int d2 = frame.dim * frame.dim;

    const Matrix i_t = linalg::truncate_to_rank(i_hat.values, d2);
    if (svd_rank(i_t) < d2) {
        throw NumericalError("calibration data is degenerate: truncated I-hat has rank < d^2");
    }
    const Matrix p_t =
        options.truncate_p ? linalg::truncate_to_rank(p_hat.values, d2) : p_hat.values;

    // Factor I_t = M S twice: once keeping M close to M0, once keeping S
    // close to S0; the gap between the two factorizations is the sloshable
    // SPAM error E.
    const Matrix s_mopt = linalg::pinv(frame.m0, d2) * i_t;
    const Matrix m_mopt = i_t * linalg::pinv(s_mopt, d2);
    const Matrix m_sopt = i_t * linalg::pinv(frame.s0, d2);
    const Matrix s_sopt = linalg::pinv(m_sopt, d2) * i_t;

    const Matrix e_mat = linalg::pinv(m_mopt, d2) * i_t * linalg::pinv(s_sopt, d2);

    const double factorization_residual = (m_mopt * s_mopt - i_t).norm();
    if (factorization_residual > 1e-9) {
        throw NumericalError("overcomplete factorization invalid: ||M_mopt S_mopt - I_t|| = " +
                             std::to_string(factorization_residual));
    }

    const double p = options.gauge_p;
    const Matrix m_hat = m_mopt * frac_power_of_spam(e_mat, 1.0 - p);
    const Matrix s_hat = frac_power_of_spam(e_mat, p) * s_sopt;

    Estimate est;
    est.g_hat = {linalg::pinv(m_hat, d2) * p_t * linalg::pinv(s_hat, d2), frame.dim};
    est.e_hat = Superoperator{e_mat, frame.dim};
    est.m_hat = m_hat;
    est.s_hat = s_hat;
    est.gauge_p = p;

    const Superoperator g0{linalg::pinv(frame.m0, d2) * p_t * linalg::pinv(frame.s0, d2),
                           frame.dim};
    est.diagnostics = make_diagnostics(est.g_hat, g0);
    est.diagnostics.m_discrepancy = (m_mopt - frame.m0).norm();
    est.diagnostics.s_discrepancy = (s_sopt - frame.s0).norm();
    est.diagnostics.factorization_residual = factorization_residual;
    return est;
}

Superoperator overcomplete_approx_diagnostic(const Frame& frame, const ProbMatrix& i_hat,
                                             const ProbMatrix& p_hat) {
    require_table_shape(frame, i_hat, "calibration");
    require_table_shape(frame, p_hat, "gate");
    const int d2 = frame.dim * frame.dim;

    const Matrix i_t = linalg::truncate_to_rank(i_hat.values, d2);
    if (svd_rank(i_t) < d2) {
        throw NumericalError("calibration data is degenerate: truncated I-hat has rank < d^2");
    }
    const Matrix i_t_pinv = linalg::pinv(i_t, d2);
    const Matrix proj_col = i_t * i_t_pinv;
    const Matrix proj_row = i_t_pinv * i_t;

    const Matrix s_mopt = linalg::pinv(frame.m0, d2) * i_t;
    const Matrix m_mopt = i_t * linalg::pinv(s_mopt, d2);
    const Matrix m_sopt = i_t * linalg::pinv(frame.s0, d2);
    const Matrix s_sopt = linalg::pinv(m_sopt, d2) * i_t;
    const Matrix e_mat = linalg::pinv(m_mopt, d2) * i_t * linalg::pinv(s_sopt, d2);

    const Matrix e_inv_half = frac_power_of_spam(e_mat, -0.5);
    const Matrix approx = e_inv_half * linalg::pinv(frame.m0, d2) * proj_col * p_hat.values *
                          proj_row * linalg::pinv(frame.s0, d2) * e_inv_half;
    return {approx, frame.dim};
}

}  // namespace qpt
