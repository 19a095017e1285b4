#include "qpt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace qpt::sim {

namespace {

constexpr double kProbTol = 1e-12;

const HermitianBasis& qubit_basis() {
    static const HermitianBasis basis = build_basis(2);
    return basis;
}

CMatrix projector(const CVector& ket) { return ket * ket.adjoint(); }

Vector state_coords(const CMatrix& rho) {
    return vectorize(rho, qubit_basis(), OperatorKind::state).coords;
}

double sample_mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (double x : xs) total += x;
    return total / double(xs.size());
}

double sample_sigma(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(xs.size() - 1));
}

}  // namespace

CVector pauli_eigenket(const std::string& label) {
    static const std::map<std::string, CVector> kets = [] {
        const double s = 1.0 / std::sqrt(2.0);
        const Complex i(0.0, 1.0);
        std::map<std::string, CVector> m;
        m["+x"] = (CVector(2) << s, s).finished();
        m["-x"] = (CVector(2) << s, -s).finished();
        m["+y"] = (CVector(2) << s, i * s).finished();
        m["-y"] = (CVector(2) << s, -i * s).finished();
        m["+z"] = (CVector(2) << 1.0, 0.0).finished();
        m["-z"] = (CVector(2) << 0.0, 1.0).finished();
        return m;
    }();
    const auto it = kets.find(label);
    if (it == kets.end()) {
        throw InvalidArgument("unknown state label '" + label + "'");
    }
    return it->second;
}

CVector orthogonal_complement(const CVector& psi) {
    if (psi.size() != 2) {
        throw InvalidArgument("orthogonal_complement: only qubit kets supported");
    }
    CVector perp(2);
    perp << -std::conj(psi[1]), std::conj(psi[0]);
    for (int k = 0; k < 2; ++k) {
        if (std::abs(perp[k]) > 1e-12) {
            perp *= std::abs(perp[k]) / perp[k];
            break;
        }
    }
    return perp;
}

CMatrix x90_unitary() {
    const Complex i(0.0, 1.0);
    CMatrix u(2, 2);
    u << 1.0, -i, -i, 1.0;
    return u / std::sqrt(2.0);
}

NoiseModel NoiseModel::depolarizing_spam(double gamma_prep, double gamma_meas,
                                         double gate_gamma) {
    if (!(gamma_prep >= 0.0 && gamma_prep <= 1.0 && gamma_meas >= 0.0 && gamma_meas <= 1.0)) {
        throw InvalidArgument("depolarizing SPAM retentions must be in [0,1]");
    }
    NoiseModel noise;
    noise.kind = Kind::depolarizing_spam;
    noise.gamma_prep = gamma_prep;
    noise.gamma_meas = gamma_meas;
    noise.gate_gamma = gate_gamma;
    return noise;
}

NoiseModel NoiseModel::coherent_prep(double phi, double gate_gamma) {
    if (!(phi >= 0.0 && phi < M_PI / 2.0)) {
        throw InvalidArgument("coherent prep angle must be in [0, pi/2)");
    }
    NoiseModel noise;
    noise.kind = Kind::coherent_prep;
    noise.phi = phi;
    noise.gate_gamma = gate_gamma;
    return noise;
}

NoiseModel NoiseModel::none(double gate_gamma) {
    return depolarizing_spam(1.0, 1.0, gate_gamma);
}

double NoiseModel::strength() const {
    return kind == Kind::depolarizing_spam ? 1.0 - gamma_prep : phi;
}

ExperimentDesign ExperimentDesign::paper_square() {
    ExperimentDesign design;
    design.preps = {"+x", "-x", "+y", "+z"};
    design.bases = {"x", "y", "z"};
    design.tracked_effects = {"+x", "-x", "+y", "+z"};
    return design;
}

ExperimentDesign ExperimentDesign::overcomplete6() {
    ExperimentDesign design;
    design.preps = {"+x", "-x", "+y", "-y", "+z", "-z"};
    design.bases = {"x", "y", "z"};
    design.tracked_effects = {"+x", "-x", "+y", "-y", "+z", "-z"};
    return design;
}

std::vector<std::string> ExperimentDesign::outcome_labels() const {
    std::vector<std::string> labels;
    for (const auto& basis : bases) {
        labels.push_back("+" + basis);
        labels.push_back("-" + basis);
    }
    return labels;
}

Matrix apriori_effect_rows(const ExperimentDesign& design) {
    const auto labels = design.outcome_labels();
    Matrix rows(labels.size(), 4);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rows.row(static_cast<int>(i)) =
            state_coords(projector(pauli_eigenket(labels[i]))).transpose();
    }
    return rows;
}

Matrix apriori_state_cols(const ExperimentDesign& design) {
    Matrix cols(4, design.preps.size());
    for (std::size_t j = 0; j < design.preps.size(); ++j) {
        cols.col(static_cast<int>(j)) = state_coords(projector(pauli_eigenket(design.preps[j])));
    }
    return cols;
}

Frame design_frame(const ExperimentDesign& design) {
    const auto outcome = design.outcome_labels();
    for (const auto& label : design.tracked_effects) {
        if (std::find(outcome.begin(), outcome.end(), label) == outcome.end()) {
            throw InvalidArgument("tracked effect '" + label +
                                  "' is not an outcome of any measurement basis");
        }
    }
    Matrix m0(design.tracked_effects.size(), 4);
    for (std::size_t i = 0; i < design.tracked_effects.size(); ++i) {
        m0.row(static_cast<int>(i)) =
            state_coords(projector(pauli_eigenket(design.tracked_effects[i]))).transpose();
    }
    return Frame(m0, apriori_state_cols(design), 2, design.tracked_effects, design.preps);
}

TrueFrames true_frames(const NoiseModel& noise, const ExperimentDesign& design) {
    TrueFrames frames;
    frames.effect_rows = apriori_effect_rows(design);
    frames.state_cols = apriori_state_cols(design);

    if (noise.kind == NoiseModel::Kind::depolarizing_spam) {
        const Superoperator d_prep = depolarizing_superop(noise.gamma_prep, qubit_basis());
        const Superoperator d_meas = depolarizing_superop(noise.gamma_meas, qubit_basis());
        frames.effect_rows = frames.effect_rows * d_meas.mat;
        frames.state_cols = d_prep.mat * frames.state_cols;
    } else {
        for (std::size_t j = 0; j < design.preps.size(); ++j) {
            const CVector psi = pauli_eigenket(design.preps[j]);
            const CMatrix rho = rotated_state(psi, orthogonal_complement(psi), noise.phi);
            frames.state_cols.col(static_cast<int>(j)) = state_coords(rho);
        }
    }
    return frames;
}

std::pair<ProbMatrix, ProbMatrix> exact_prob_matrices(const Matrix& effect_rows,
                                                      const Superoperator& gate,
                                                      const Matrix& state_cols,
                                                      const ExperimentDesign& design) {
    if (effect_rows.cols() != gate.size() || state_cols.rows() != gate.size()) {
        throw ShapeError("exact_prob_matrices: dimension mismatch");
    }
    auto to_table = [&](Matrix values) {
        for (int i = 0; i < values.rows(); ++i) {
            for (int j = 0; j < values.cols(); ++j) {
                if (values(i, j) < -kProbTol || values(i, j) > 1.0 + kProbTol) {
                    throw NumericalError("exact probability " + std::to_string(values(i, j)) +
                                         " outside [0,1]: non-physical model");
                }
                values(i, j) = std::clamp(values(i, j), 0.0, 1.0);
            }
        }
        ProbMatrix table;
        table.values = std::move(values);
        table.exact = true;
        table.row_labels = design.outcome_labels();
        table.col_labels = design.preps;
        return table;
    };
    return {to_table(effect_rows * state_cols), to_table(effect_rows * gate.mat * state_cols)};
}

DataSet sample_dataset(const ProbMatrix& i_exact, const ProbMatrix& p_exact, long shots,
                       std::uint64_t seed) {
    if (shots < 1) {
        throw InvalidArgument("shot count must be >= 1");
    }
    std::mt19937_64 rng(seed);

    // Rows come in (+b, -b) pairs per basis; one binomial draw per circuit on
    // the "+" row, complement derived from the same draw.
    auto draw = [&](double p) -> long {
        if (p <= 0.0) return 0;
        if (p >= 1.0) return shots;
        std::binomial_distribution<long> dist(shots, p);
        return dist(rng);
    };
    auto sample_table = [&](const ProbMatrix& exact) {
        ProbMatrix sampled = exact;
        sampled.exact = false;
        sampled.shots.emplace(CountMatrix::Constant(exact.rows(), exact.cols(), shots));
        for (int pair = 0; pair + 1 < exact.rows(); pair += 2) {
            for (int j = 0; j < exact.cols(); ++j) {
                const double freq = double(draw(exact.values(pair, j))) / double(shots);
                sampled.values(pair, j) = freq;
                sampled.values(pair + 1, j) = 1.0 - freq;
            }
        }
        return sampled;
    };

    DataSet data;
    data.calibration = sample_table(i_exact);
    data.gate = sample_table(p_exact);
    return data;
}

EstimatorSpec EstimatorSpec::standard() { return {Kind::standard}; }
EstimatorSpec EstimatorSpec::corrected(double gauge_p) { return {Kind::corrected, gauge_p}; }
EstimatorSpec EstimatorSpec::ols() { return {Kind::ols}; }
EstimatorSpec EstimatorSpec::overcomplete(double gauge_p, bool truncate_p) {
    return {Kind::overcomplete, gauge_p, truncate_p};
}

std::string EstimatorSpec::label() const {
    auto fmt_p = [](double p) {
        std::string s = std::to_string(p);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    switch (kind) {
        case Kind::standard: return "standard";
        case Kind::corrected: return "corrected(p=" + fmt_p(gauge_p) + ")";
        case Kind::ols: return "ols";
        case Kind::overcomplete:
            return std::string("overcomplete(p=") + fmt_p(gauge_p) +
                   (truncate_p ? "" : ";no-trunc-p") + ")";
    }
    return "?";
}

DataSet simulate_dataset(const ExperimentDesign& design, const NoiseModel& noise,
                         std::uint64_t seed) {
    const Superoperator gate_true =
        compose(depolarizing_superop(noise.gate_gamma, qubit_basis()),
                unitary_to_superop(x90_unitary(), qubit_basis()));
    const TrueFrames truth = true_frames(noise, design);
    const auto [i_exact, p_exact] =
        exact_prob_matrices(truth.effect_rows, gate_true, truth.state_cols, design);

    DataSet data;
    if (design.shots) {
        data = sample_dataset(i_exact, p_exact, *design.shots, seed);
    } else {
        data.calibration = i_exact;
        data.gate = p_exact;
    }
    if (!design.include_calibration) data.calibration.reset();
    return data;
}

std::vector<SweepRecord> run_replication(const ExperimentDesign& design,
                                         const NoiseModel& noise,
                                         const std::vector<EstimatorSpec>& estimators,
                                         std::uint64_t seed, int run_index,
                                         double noise_param) {
    const Frame frame = design_frame(design);
    const Superoperator gate_true =
        compose(depolarizing_superop(noise.gate_gamma, qubit_basis()),
                unitary_to_superop(x90_unitary(), qubit_basis()));
    const GateFidelity fid_true = gate_fidelity(gate_true, x90_unitary());
    const linalg::EigenSet spec_true = linalg::eigenvalues(gate_true.mat);

    DataSet data = simulate_dataset(design, noise, seed);

    std::optional<ProbMatrix> i_hat;
    if (data.calibration) i_hat = select_rows(*data.calibration, design.tracked_effects);
    const ProbMatrix p_hat = select_rows(data.gate, design.tracked_effects);

    bool spam_checked = false;
    SpamConsistencyReport spam;
    if (i_hat) {
        spam = spam_consistency_check(frame, *i_hat);
        spam_checked = true;
    }

    std::vector<SweepRecord> records;
    records.reserve(estimators.size());
    for (const auto& spec : estimators) {
        SweepRecord record;
        record.noise_param = noise_param;
        record.estimator = spec.label();
        record.run_index = run_index;
        record.seed = seed;
        record.spam_checked = spam_checked;
        record.spam_max_abs_z = spam.max_abs_z;
        record.spam_pass = spam.pass;
        try {
            const bool needs_calibration = spec.kind == EstimatorSpec::Kind::corrected ||
                                           spec.kind == EstimatorSpec::Kind::overcomplete;
            if (needs_calibration && !i_hat) {
                throw InvalidArgument("estimator '" + spec.label() +
                                      "' requires calibration data, but the design "
                                      "excludes calibration circuits");
            }
            Estimate est;
            switch (spec.kind) {
                case EstimatorSpec::Kind::standard:
                    est = standard_qpt(frame, p_hat);
                    break;
                case EstimatorSpec::Kind::corrected:
                    est = spam_corrected_qpt(frame, *i_hat, p_hat, spec.gauge_p);
                    break;
                case EstimatorSpec::Kind::ols:
                    est = ols_qpt(frame, p_hat);
                    break;
                case EstimatorSpec::Kind::overcomplete:
                    est = overcomplete_spam_corrected_qpt(frame, *i_hat, p_hat,
                                                          {spec.truncate_p, spec.gauge_p});
                    break;
            }
            const GateFidelity fid = gate_fidelity(est.g_hat, x90_unitary());
            record.fidelity_error_ent = fid.entanglement - fid_true.entanglement;
            record.fidelity_error_avg = fid.average - fid_true.average;
            record.eigen_delta = linalg::eigen_delta(spec_true, est.diagnostics.spectrum);
            record.cp_slack = est.diagnostics.cp_slack;
            record.tp_slack = est.diagnostics.tp_slack;
        } catch (const std::exception& err) {
            record.error = err.what();
            record.fidelity_error_ent = std::numeric_limits<double>::quiet_NaN();
            record.fidelity_error_avg = std::numeric_limits<double>::quiet_NaN();
            record.eigen_delta = std::numeric_limits<double>::quiet_NaN();
            record.cp_slack = std::numeric_limits<double>::quiet_NaN();
            record.tp_slack = std::numeric_limits<double>::quiet_NaN();
        }
        records.push_back(std::move(record));
    }
    return records;
}

NoiseModel noise_at(NoiseModel::Kind kind, double param, double gate_gamma) {
    if (kind == NoiseModel::Kind::depolarizing_spam) {
        return NoiseModel::depolarizing_spam(1.0 - param, 1.0 - param, gate_gamma);
    }
    return NoiseModel::coherent_prep(param, gate_gamma);
}

SweepResult sweep(const SweepConfig& config) {
    if (config.grid.empty()) {
        throw InvalidArgument("sweep: noise grid is empty");
    }
    if (config.n_runs < 1) {
        throw InvalidArgument("sweep: n_runs must be >= 1");
    }

    SweepResult result;
    for (double param : config.grid) {
        const NoiseModel noise = noise_at(config.noise_kind, param, config.gate_gamma);
        for (int run = 0; run < config.n_runs; ++run) {
            auto records = run_replication(config.design, noise, config.estimators,
                                           config.base_seed + std::uint64_t(run), run, param);
            for (auto& record : records) result.records.push_back(std::move(record));
        }
    }

    for (double param : config.grid) {
        for (const auto& spec : config.estimators) {
            const std::string label = spec.label();
            std::vector<double> ent, avg, abs_ent, abs_avg, delta;
            int failed = 0;
            for (const auto& record : result.records) {
                if (record.noise_param != param || record.estimator != label) continue;
                if (!record.ok()) {
                    ++failed;
                    continue;
                }
                ent.push_back(record.fidelity_error_ent);
                avg.push_back(record.fidelity_error_avg);
                abs_ent.push_back(std::abs(record.fidelity_error_ent));
                abs_avg.push_back(std::abs(record.fidelity_error_avg));
                delta.push_back(record.eigen_delta);
            }
            AggregateRow row;
            row.noise_param = param;
            row.estimator = label;
            row.n = static_cast<int>(ent.size());
            row.n_failed = failed;
            row.fid_err_ent_mean = sample_mean(ent);
            row.fid_err_ent_sigma = sample_sigma(ent, row.fid_err_ent_mean);
            row.fid_err_avg_mean = sample_mean(avg);
            row.fid_err_avg_sigma = sample_sigma(avg, row.fid_err_avg_mean);
            row.abs_fid_err_ent_mean = sample_mean(abs_ent);
            row.abs_fid_err_ent_sigma = sample_sigma(abs_ent, row.abs_fid_err_ent_mean);
            row.abs_fid_err_avg_mean = sample_mean(abs_avg);
            row.abs_fid_err_avg_sigma = sample_sigma(abs_avg, row.abs_fid_err_avg_mean);
            row.delta_mean = sample_mean(delta);
            row.delta_sigma = sample_sigma(delta, row.delta_mean);
            result.aggregates.push_back(std::move(row));
        }
    }
    return result;
}

}  // namespace qpt::sim
