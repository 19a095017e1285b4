#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpt/tomo.hpp"

namespace qpt::sim {

// ============================================================================
// Monte-Carlo harness: ground-truth noise models, the 12/24-circuit qubit
// designs, seeded binomial sampling, replication sweeps and the two accuracy
// metrics (fidelity error and matched eigenvalue error delta).
// ============================================================================

// Named single-qubit kets: "+x","-x","+y","-y","+z","-z".
CVector pauli_eigenket(const std::string& label);

// The orthogonal pure state, phase-fixed so that the first nonzero
// computational-basis amplitude is real positive. Maps each Pauli eigenket
// to the opposite one on its axis.
CVector orthogonal_complement(const CVector& psi);

// X_{pi/2} = exp(-i pi X / 4), the simulated target gate.
CMatrix x90_unitary();

struct NoiseModel {
    enum class Kind { depolarizing_spam, coherent_prep };

    Kind kind = Kind::depolarizing_spam;
    double gamma_prep = 1.0;
    double gamma_meas = 1.0;
    double phi = 0.0;
    double gate_gamma = 0.99;

    static NoiseModel depolarizing_spam(double gamma_prep, double gamma_meas,
                                        double gate_gamma = 0.99);
    static NoiseModel coherent_prep(double phi, double gate_gamma = 0.99);
    static NoiseModel none(double gate_gamma = 0.99);

    // Per-side strength used as the sweep grid parameter:
    // 1 - gamma for depolarizing SPAM, phi for coherent.
    double strength() const;
};

struct ExperimentDesign {
    std::vector<std::string> preps;
    std::vector<std::string> bases;            // axis labels, e.g. {"x","y","z"}
    std::vector<std::string> tracked_effects;  // rows of the estimation frame
    std::optional<long> shots = 5000;          // nullopt = exact probabilities
    bool include_calibration = true;

    // 4 preps x 3 bases = 12 circuits per data matrix (24 with calibration),
    // tracked effects {+x,-x,+y,+z}.
    static ExperimentDesign paper_square();
    // All six Pauli eigenstates as preps and tracked effects.
    static ExperimentDesign overcomplete6();

    int circuit_count() const {
        return static_cast<int>(preps.size() * bases.size());
    }
    // Both outcomes per basis, ordered (+b, -b) per basis.
    std::vector<std::string> outcome_labels() const;
};

// A-priori (noise-free) matrices: full outcome rows and prep columns.
Matrix apriori_effect_rows(const ExperimentDesign& design);
Matrix apriori_state_cols(const ExperimentDesign& design);

// The estimation frame: tracked effect rows and all prep columns.
Frame design_frame(const ExperimentDesign& design);

// True (noisy) effect and state matrices. Depolarizing SPAM multiplies both
// sides; coherent noise rotates each prepared state toward its orthogonal
// complement and leaves effects noise-free.
struct TrueFrames {
    Matrix effect_rows;  // full outcome rows
    Matrix state_cols;
};
TrueFrames true_frames(const NoiseModel& noise, const ExperimentDesign& design);

// I = M S and P = M G S as full outcome tables, validated and clamped to
// [0,1]. An entry outside [-1e-12, 1+1e-12] signals a non-physical model.
std::pair<ProbMatrix, ProbMatrix> exact_prob_matrices(const Matrix& effect_rows,
                                                      const Superoperator& gate,
                                                      const Matrix& state_cols,
                                                      const ExperimentDesign& design);

// One binomial draw per circuit on the "+" outcome; the "-" frequency is
// 1 minus the "+" frequency from the same draw. Calibration and gate
// circuits use independent draws from the same seeded generator.
DataSet sample_dataset(const ProbMatrix& i_exact, const ProbMatrix& p_exact, long shots,
                       std::uint64_t seed);

// Truth model + exact probabilities + one (seeded) sampled dataset, or the
// exact tables themselves in exact mode. Calibration is dropped when the
// design excludes it.
DataSet simulate_dataset(const ExperimentDesign& design, const NoiseModel& noise,
                         std::uint64_t seed);

struct EstimatorSpec {
    enum class Kind { standard, corrected, ols, overcomplete };

    Kind kind = Kind::standard;
    double gauge_p = 0.5;
    bool truncate_p = true;

    static EstimatorSpec standard();
    static EstimatorSpec corrected(double gauge_p);
    static EstimatorSpec ols();
    static EstimatorSpec overcomplete(double gauge_p, bool truncate_p = true);

    std::string label() const;
};

struct SweepRecord {
    double noise_param = 0.0;
    std::string estimator;
    int run_index = 0;
    std::uint64_t seed = 0;
    double fidelity_error_ent = 0.0;  // F_e(G-hat) - F_e(G_true), signed
    double fidelity_error_avg = 0.0;
    double eigen_delta = 0.0;
    double cp_slack = 0.0;
    double tp_slack = 0.0;
    bool spam_checked = false;
    double spam_max_abs_z = 0.0;
    bool spam_pass = false;
    std::string error;  // nonempty if the estimator failed on this dataset

    bool ok() const { return error.empty(); }
};

// Build truth, sample one dataset, run every estimator on it (paired
// comparison), and score each against the true gate. Estimator failures are
// recorded per-record, never fatal.
std::vector<SweepRecord> run_replication(const ExperimentDesign& design,
                                         const NoiseModel& noise,
                                         const std::vector<EstimatorSpec>& estimators,
                                         std::uint64_t seed, int run_index = 0,
                                         double noise_param = 0.0);

struct SweepConfig {
    ExperimentDesign design;
    NoiseModel::Kind noise_kind = NoiseModel::Kind::depolarizing_spam;
    double gate_gamma = 0.99;
    std::vector<double> grid;  // per-side depolarizing strength (1-gamma) or phi
    int n_runs = 50;
    std::vector<EstimatorSpec> estimators;
    std::uint64_t base_seed = 0;
};

struct AggregateRow {
    double noise_param = 0.0;
    std::string estimator;
    int n = 0;         // successful runs
    int n_failed = 0;
    double fid_err_ent_mean = 0.0, fid_err_ent_sigma = 0.0;
    double fid_err_avg_mean = 0.0, fid_err_avg_sigma = 0.0;
    double abs_fid_err_ent_mean = 0.0, abs_fid_err_ent_sigma = 0.0;
    double abs_fid_err_avg_mean = 0.0, abs_fid_err_avg_sigma = 0.0;
    double delta_mean = 0.0, delta_sigma = 0.0;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<AggregateRow> aggregates;
};

// Run n_runs replications per grid point; run r uses seed base_seed + r at
// every grid point so that runs pair across the grid and across estimators.
SweepResult sweep(const SweepConfig& config);

NoiseModel noise_at(NoiseModel::Kind kind, double param, double gate_gamma);

}  // namespace qpt::sim
