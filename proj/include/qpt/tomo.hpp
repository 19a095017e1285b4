#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpt/hs.hpp"
#include "qpt/linalg.hpp"

namespace qpt {

// ============================================================================
// Estimators: standard linear-inversion QPT, SPAM-error extraction, the
// gauge-split corrected estimate G(p) = E^(p-1) G0 E^(-p), and the
// overcomplete (pseudoinverse) pipeline.
// ============================================================================

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// A table of outcome probabilities: exact values, or empirical frequencies
// with per-entry shot counts. Rows are effects/outcomes, columns are preps.
struct ProbMatrix {
    Matrix values;
    std::optional<CountMatrix> shots;  // per-entry; absent for exact tables
    bool exact = false;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

// Select a subset of rows by label, preserving the requested order.
ProbMatrix select_rows(const ProbMatrix& table, const std::vector<std::string>& labels);

// Measurement matrix M0 (rows = a-priori effect vectors) and state matrix S0
// (columns = a-priori state vectors). Informational completeness
// (rank = d^2) is checked at construction.
struct Frame {
    Matrix m0;  // K_E x d^2
    Matrix s0;  // d^2 x K_S
    int dim = 0;
    std::vector<std::string> effect_labels;
    std::vector<std::string> state_labels;

    Frame() = default;
    Frame(Matrix m, Matrix s, int d, std::vector<std::string> effects = {},
          std::vector<std::string> states = {});

    int num_effects() const { return static_cast<int>(m0.rows()); }
    int num_states() const { return static_cast<int>(s0.cols()); }
    bool square() const { return num_effects() == dim * dim && num_states() == dim * dim; }
};

// Calibration (prepare-and-measure, no gate) and gate data tables.
struct DataSet {
    std::optional<ProbMatrix> calibration;  // I-hat
    ProbMatrix gate;                        // P-hat
};

struct EstimateDiagnostics {
    double cp_slack = 0.0;
    double tp_slack = 0.0;
    linalg::EigenSet spectrum;
    std::optional<Superoperator> g0;     // uncorrected linear-inversion/OLS estimate
    double m_discrepancy = 0.0;          // ||M_mopt - M0||_F (overcomplete only)
    double s_discrepancy = 0.0;          // ||S_sopt - S0||_F (overcomplete only)
    double factorization_residual = 0.0; // ||M_mopt S_mopt - I_t||_F (overcomplete only)
};

struct Estimate {
    Superoperator g_hat;
    std::optional<Superoperator> e_hat;
    std::optional<Matrix> m_hat;
    std::optional<Matrix> s_hat;
    std::optional<double> gauge_p;
    EstimateDiagnostics diagnostics;
};

struct SpamConsistencyReport {
    double max_abs_z = 0.0;
    int outliers = 0;      // entries with |z| > 3
    int entries = 0;
    bool pass = false;
};

struct OvercompleteOptions {
    bool truncate_p = true;  // also truncate P-hat to rank d^2
    double gauge_p = 0.5;
};

// ----------------------------------------------------------------------------
// Square-frame estimators
// ----------------------------------------------------------------------------

// G0 = M0^-1 P S0^-1. Requires a square frame with condition number < 1e8.
Estimate standard_qpt(const Frame& frame, const ProbMatrix& p_hat);

// E = M0^-1 I S0^-1. Not required to be a physical (CPTP) map.
Superoperator estimate_spam_error(const Frame& frame, const ProbMatrix& i_hat);

// G(p) = E^(p-1) G0 E^(-p), with S-hat = E^p S0 and M-hat = M0 E^(1-p).
// The spectrum of G(p) is the spectrum of E^-1 G0 for every p.
Estimate spam_corrected_qpt(const Frame& frame, const ProbMatrix& i_hat,
                            const ProbMatrix& p_hat, double gauge_p = 0.5);

// Standardized residuals of I-hat against M0 S0. Fails when any |z| > 5 or
// more than 5% of entries exceed |z| > 3.
SpamConsistencyReport spam_consistency_check(const Frame& frame, const ProbMatrix& i_hat);

// ----------------------------------------------------------------------------
// Overcomplete estimators
// ----------------------------------------------------------------------------

// G0 = M0^+ P S0^+ with pseudoinverses at forced rank d^2 (ordinary least
// squares). Coincides with standard_qpt for square frames.
Estimate ols_qpt(const Frame& frame, const ProbMatrix& p_hat);

// Full overcomplete correction pipeline: truncate I-hat (and optionally
// P-hat) to rank d^2, factor I_t via the m-opt/s-opt frames, extract E,
// split it by gauge_p, and invert.
Estimate overcomplete_spam_corrected_qpt(const Frame& frame, const ProbMatrix& i_hat,
                                         const ProbMatrix& p_hat,
                                         const OvercompleteOptions& options = {});

// The (AB)^+ ~ B^+ A^+ approximation E^-1/2 M0^+ Pi_c P Pi_r S0^+ E^-1/2,
// for comparison against the full pipeline. Never the primary estimate.
Superoperator overcomplete_approx_diagnostic(const Frame& frame, const ProbMatrix& i_hat,
                                             const ProbMatrix& p_hat);

}  // namespace qpt
