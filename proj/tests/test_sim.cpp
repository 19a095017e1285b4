#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qpt/sim.hpp"

using namespace qpt;
using namespace qpt::sim;

namespace {

Matrix depol_mat(double gamma) {
    Vector d(4);
    d << 1.0, gamma, gamma, gamma;
    return d.asDiagonal();
}

double mean_of(const std::vector<double>& xs) {
    double total = 0.0;
    for (double x : xs) total += x;
    return total / double(xs.size());
}

}  // namespace

TEST_CASE("pauli_eigenket and orthogonal_complement conventions") {
    for (const std::string axis : {"x", "y", "z"}) {
        const CVector plus = pauli_eigenket("+" + axis);
        const CVector minus = pauli_eigenket("-" + axis);
        CHECK(std::abs(plus.dot(minus)) < 1e-14);
        // The phase convention maps each eigenket's complement to the
        // opposite eigenket exactly.
        CHECK((orthogonal_complement(plus) - minus).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((orthogonal_complement(minus) - plus).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK_THROWS_AS(pauli_eigenket("up"), InvalidArgument);
}

TEST_CASE("x90_unitary is unitary and matches (1 - iX)/sqrt(2)") {
    const CMatrix u = x90_unitary();
    CHECK((u.adjoint() * u - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    const CMatrix expected =
        (oracle::pauli_i() - Complex(0, 1) * oracle::pauli_x()) / std::sqrt(2.0);
    CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("NoiseModel validation") {
    CHECK_THROWS_AS(NoiseModel::depolarizing_spam(-0.1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(NoiseModel::depolarizing_spam(1.0, 1.1), InvalidArgument);
    CHECK_THROWS_AS(NoiseModel::coherent_prep(M_PI / 2.0), InvalidArgument);
    CHECK(NoiseModel::depolarizing_spam(0.98, 0.97).strength() ==
          doctest::Approx(0.02).epsilon(1e-12));
    CHECK(NoiseModel::coherent_prep(0.1).strength() == doctest::Approx(0.1));
}

TEST_CASE("ExperimentDesign: the 12/24-circuit square design") {
    const auto design = ExperimentDesign::paper_square();
    CHECK(design.circuit_count() == 12);
    CHECK(design.tracked_effects.size() == 4);
    CHECK(design.outcome_labels() ==
          std::vector<std::string>{"+x", "-x", "+y", "-y", "+z", "-z"});

    const auto big = ExperimentDesign::overcomplete6();
    CHECK(big.circuit_count() == 18);
    CHECK(big.tracked_effects.size() == 6);

    auto bad = ExperimentDesign::paper_square();
    bad.tracked_effects.push_back("+w");
    CHECK_THROWS_AS(design_frame(bad), InvalidArgument);
}

TEST_CASE("design_frame: informationally complete with modest condition number") {
    const Frame frame = design_frame(ExperimentDesign::paper_square());
    CHECK(frame.square());
    CHECK(frame.dim == 2);

    const Frame big = design_frame(ExperimentDesign::overcomplete6());
    CHECK(big.num_effects() == 6);
    CHECK(big.num_states() == 6);
    CHECK_FALSE(big.square());
}

TEST_CASE("true_frames: no noise returns the a-priori frames") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::none(), design);
    CHECK((frames.effect_rows - apriori_effect_rows(design)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((frames.state_cols - apriori_state_cols(design)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("true_frames: depolarizing SPAM multiplies both sides") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::depolarizing_spam(0.98, 0.98), design);
    const Matrix m0 = apriori_effect_rows(design);
    const Matrix s0 = apriori_state_cols(design);
    CHECK((frames.effect_rows * frames.state_cols - m0 * depol_mat(0.98 * 0.98) * s0)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("true_frames: coherent noise rotates states, leaves effects alone") {
    const auto design = ExperimentDesign::paper_square();
    const double phi = 0.1;
    const TrueFrames frames = true_frames(NoiseModel::coherent_prep(phi), design);
    CHECK((frames.effect_rows - apriori_effect_rows(design)).cwiseAbs().maxCoeff() < 1e-14);

    // The |+z> column is the rotated state with overlap cos(phi).
    const CVector psi = oracle::ket("+z");
    const CVector perp = oracle::ket("-z");
    const CVector rotated = std::cos(phi) * psi + std::sin(phi) * perp;
    const CMatrix rho = rotated * rotated.adjoint();
    const std::vector<CMatrix> basis = {
        oracle::pauli_i() / std::sqrt(2.0), oracle::pauli_x() / std::sqrt(2.0),
        oracle::pauli_y() / std::sqrt(2.0), oracle::pauli_z() / std::sqrt(2.0)};
    for (int k = 0; k < 4; ++k) {
        CHECK(frames.state_cols(k, 3) ==
              doctest::Approx((basis[k].adjoint() * rho).trace().real()).epsilon(1e-12));
    }
    const double overlap = std::abs(psi.dot(rotated));
    CHECK(overlap == doctest::Approx(std::cos(phi)).epsilon(1e-12));
}

TEST_CASE("exact_prob_matrices: identity gate, perfect SPAM") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::none(), design);
    const auto [i_table, p_table] = exact_prob_matrices(
        frames.effect_rows, Superoperator::identity(2), frames.state_cols, design);

    CHECK((i_table.values - p_table.values).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(i_table.exact);
    // Matched prep/effect pairs hit probability 1.
    CHECK(i_table.values(0, 0) == doctest::Approx(1.0));   // (+x | +x)
    CHECK(i_table.values(1, 1) == doctest::Approx(1.0));   // (-x | -x)
    CHECK(i_table.values(2, 2) == doctest::Approx(1.0));   // (+y | +y)
    CHECK(i_table.values(4, 3) == doctest::Approx(1.0));   // (+z | +z)
}

TEST_CASE("exact_prob_matrices: X90 maps +y to +z (sign pinned by the 2x2 oracle)") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::none(), design);
    const HermitianBasis basis = build_basis(2);
    const Superoperator gate = unitary_to_superop(x90_unitary(), basis);
    const auto [i_table, p_table] =
        exact_prob_matrices(frames.effect_rows, gate, frames.state_cols, design);

    // Direct 2x2 computation: Tr[E_z U rho_y U^dag].
    const CMatrix u = x90_unitary();
    const CMatrix rho_y = oracle::proj(oracle::ket("+y"));
    const double expected =
        oracle::direct_born(oracle::proj(oracle::ket("+z")), u * rho_y * u.adjoint());
    REQUIRE(expected == doctest::Approx(1.0).epsilon(1e-12));

    // Row 4 is "+z", column 2 is "+y".
    CHECK(p_table.values(4, 2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(p_table.values(5, 2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("exact_prob_matrices: depolarizing SPAM entry value") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::depolarizing_spam(0.98, 0.98), design);
    const HermitianBasis basis = build_basis(2);
    const Superoperator gate = compose(depolarizing_superop(0.99, basis),
                                       unitary_to_superop(x90_unitary(), basis));
    const auto [i_table, p_table] =
        exact_prob_matrices(frames.effect_rows, gate, frames.state_cols, design);
    CHECK(i_table.values(0, 0) ==
          doctest::Approx((1.0 + 0.98 * 0.98) / 2.0).epsilon(1e-12));
}

TEST_CASE("exact_prob_matrices: rejects non-physical models") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::none(), design);
    CHECK_THROWS_AS(exact_prob_matrices(frames.effect_rows, Superoperator::identity(2),
                                        1.2 * frames.state_cols, design),
                    NumericalError);
}

TEST_CASE("sample_dataset: determinism, pairing, and the large-shot limit") {
    const auto design = ExperimentDesign::paper_square();
    const TrueFrames frames = true_frames(NoiseModel::depolarizing_spam(0.99, 0.99), design);
    const HermitianBasis basis = build_basis(2);
    const Superoperator gate = compose(depolarizing_superop(0.99, basis),
                                       unitary_to_superop(x90_unitary(), basis));
    const auto [i_exact, p_exact] =
        exact_prob_matrices(frames.effect_rows, gate, frames.state_cols, design);

    const DataSet a = sample_dataset(i_exact, p_exact, 5000, 123);
    const DataSet b = sample_dataset(i_exact, p_exact, 5000, 123);
    CHECK((a.gate.values - b.gate.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.calibration->values - b.calibration->values).cwiseAbs().maxCoeff() == 0.0);

    const DataSet c = sample_dataset(i_exact, p_exact, 5000, 124);
    CHECK((a.gate.values - c.gate.values).cwiseAbs().maxCoeff() > 0.0);

    // Paired outcomes sum to exactly 1.
    for (int pair = 0; pair < 6; pair += 2) {
        for (int j = 0; j < 4; ++j) {
            CHECK(a.gate.values(pair, j) + a.gate.values(pair + 1, j) == 1.0);
        }
    }
    CHECK((*a.gate.shots)(0, 0) == 5000);

    // Law of large numbers: 1e9 shots pins frequencies to within 1e-3.
    const DataSet big = sample_dataset(i_exact, p_exact, 1000000000L, 125);
    CHECK((big.gate.values - p_exact.values).cwiseAbs().maxCoeff() < 1e-3);

    CHECK_THROWS_AS(sample_dataset(i_exact, p_exact, 0, 1), InvalidArgument);
}

TEST_CASE("simulate_dataset: exact mode returns the exact tables") {
    auto design = ExperimentDesign::paper_square();
    design.shots.reset();
    const DataSet data = simulate_dataset(design, NoiseModel::none(), 7);
    CHECK(data.gate.exact);
    CHECK(data.calibration->exact);

    auto no_cal = design;
    no_cal.include_calibration = false;
    const DataSet bare = simulate_dataset(no_cal, NoiseModel::none(), 7);
    CHECK_FALSE(bare.calibration.has_value());
}

TEST_CASE("run_replication: exact mode with no noise recovers the gate for all estimators") {
    auto design = ExperimentDesign::paper_square();
    design.shots.reset();
    const std::vector<EstimatorSpec> estimators = {
        EstimatorSpec::standard(), EstimatorSpec::corrected(0.0), EstimatorSpec::corrected(0.5),
        EstimatorSpec::corrected(1.0), EstimatorSpec::ols(), EstimatorSpec::overcomplete(0.5)};
    const auto records = run_replication(design, NoiseModel::none(), estimators, 1);
    REQUIRE(records.size() == estimators.size());
    for (const auto& record : records) {
        CAPTURE(record.estimator);
        REQUIRE(record.ok());
        CHECK(std::abs(record.fidelity_error_ent) < 1e-9);
        CHECK(std::abs(record.fidelity_error_avg) < 1e-9);
        CHECK(record.eigen_delta < 1e-9);
        CHECK(record.spam_checked);
        CHECK(record.spam_pass);
    }
}

TEST_CASE("run_replication: exact depolarizing SPAM reproduces the analytic bias") {
    auto design = ExperimentDesign::paper_square();
    design.shots.reset();
    const auto noise = NoiseModel::depolarizing_spam(0.98, 0.98);
    const std::vector<EstimatorSpec> estimators = {
        EstimatorSpec::standard(), EstimatorSpec::corrected(0.0), EstimatorSpec::corrected(0.5),
        EstimatorSpec::corrected(1.0)};
    const auto records = run_replication(design, noise, estimators, 1);

    const double expected = 3.0 * 0.99 * (0.98 * 0.98 - 1.0) / 4.0;
    CHECK(records[0].fidelity_error_ent == doctest::Approx(expected).epsilon(1e-10));
    for (std::size_t k = 1; k < records.size(); ++k) {
        CHECK(std::abs(records[k].fidelity_error_ent) < 1e-10);
        CHECK(records[k].eigen_delta < 1e-10);
    }
    // Calibration data exposes the SPAM error decisively at exact statistics.
    CHECK_FALSE(records[0].spam_pass);
}

TEST_CASE("run_replication: exact coherent SPAM, corrected delta vanishes, standard's does not") {
    auto design = ExperimentDesign::paper_square();
    design.shots.reset();
    const auto noise = NoiseModel::coherent_prep(0.1);
    const std::vector<EstimatorSpec> estimators = {
        EstimatorSpec::standard(), EstimatorSpec::corrected(0.0), EstimatorSpec::corrected(0.5),
        EstimatorSpec::corrected(1.0)};
    const auto records = run_replication(design, noise, estimators, 1);

    CHECK(records[0].eigen_delta > 1e-5);
    for (std::size_t k = 1; k < records.size(); ++k) {
        CHECK(records[k].eigen_delta < 1e-9);
    }
}

TEST_CASE("run_replication: estimator failures are recorded, not fatal") {
    auto design = ExperimentDesign::paper_square();
    design.shots.reset();
    // Full depolarization of the preps makes E singular: correction must
    // fail, standard QPT still runs.
    const auto noise = NoiseModel::depolarizing_spam(0.0, 1.0);
    const std::vector<EstimatorSpec> estimators = {EstimatorSpec::standard(),
                                                   EstimatorSpec::corrected(0.5)};
    const auto records = run_replication(design, noise, estimators, 1);
    REQUIRE(records.size() == 2);
    CHECK(records[0].ok());
    CHECK_FALSE(records[1].ok());
    CHECK(std::isnan(records[1].eigen_delta));
}

TEST_CASE("run_replication: shot noise can push the corrected estimate outside CP") {
    auto design = ExperimentDesign::paper_square();
    design.shots = 50;
    const std::vector<EstimatorSpec> estimators = {EstimatorSpec::corrected(0.5)};
    bool saw_cp_violation = false;
    for (int seed = 0; seed < 30 && !saw_cp_violation; ++seed) {
        const auto records =
            run_replication(design, NoiseModel::none(), estimators, 3000 + seed);
        if (records[0].ok() && records[0].cp_slack < -1e-6) saw_cp_violation = true;
    }
    CHECK(saw_cp_violation);
}

TEST_CASE("sweep: paired-seed reproducibility, bit for bit") {
    SweepConfig config;
    config.design = ExperimentDesign::paper_square();
    config.design.shots = 500;
    config.noise_kind = NoiseModel::Kind::depolarizing_spam;
    config.grid = {0.0, 0.02};
    config.n_runs = 5;
    config.estimators = {EstimatorSpec::standard(), EstimatorSpec::corrected(0.5)};
    config.base_seed = 77;

    const SweepResult a = sweep(config);
    const SweepResult b = sweep(config);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].fidelity_error_ent == b.records[i].fidelity_error_ent);
        CHECK(a.records[i].eigen_delta == b.records[i].eigen_delta);
        CHECK(a.records[i].seed == b.records[i].seed);
        CHECK(a.records[i].estimator == b.records[i].estimator);
    }
    // Runs share seeds across grid points for variance pairing.
    CHECK(a.records[0].seed == a.records[2 * 5].seed);
}

TEST_CASE("sweep: corrected QPT is unbiased at zero noise") {
    SweepConfig config;
    config.design = ExperimentDesign::paper_square();
    config.design.shots = 5000;
    config.noise_kind = NoiseModel::Kind::depolarizing_spam;
    config.grid = {0.0};
    config.n_runs = 50;
    config.estimators = {EstimatorSpec::corrected(0.5)};
    config.base_seed = 88;

    const SweepResult result = sweep(config);
    REQUIRE(result.aggregates.size() == 1);
    const auto& row = result.aggregates[0];
    CHECK(row.n == 50);
    CHECK(std::abs(row.fid_err_ent_mean) <
          3.0 * row.fid_err_ent_sigma / std::sqrt(double(row.n)));
}

TEST_CASE("sweep: standard QPT bias grows along the depolarizing grid") {
    SweepConfig config;
    config.design = ExperimentDesign::paper_square();
    config.design.shots = 5000;
    config.noise_kind = NoiseModel::Kind::depolarizing_spam;
    config.grid = {0.0, 0.02, 0.04};
    config.n_runs = 20;
    config.estimators = {EstimatorSpec::standard()};
    config.base_seed = 99;

    const SweepResult result = sweep(config);
    std::vector<double> magnitude;
    for (const auto& row : result.aggregates) magnitude.push_back(row.abs_fid_err_ent_mean);
    REQUIRE(magnitude.size() == 3);
    CHECK(magnitude[0] < magnitude[1]);
    CHECK(magnitude[1] < magnitude[2]);
}

TEST_CASE("shot scaling: corrected delta shrinks as shots grow") {
    std::vector<double> deltas;
    for (long shots : {500L, 50000L}) {
        SweepConfig config;
        config.design = ExperimentDesign::paper_square();
        config.design.shots = shots;
        config.noise_kind = NoiseModel::Kind::depolarizing_spam;
        config.grid = {0.0};
        config.n_runs = 15;
        config.estimators = {EstimatorSpec::corrected(0.5)};
        config.base_seed = 111;
        deltas.push_back(sweep(config).aggregates[0].delta_mean);
    }
    CHECK(deltas[1] < deltas[0]);
}
