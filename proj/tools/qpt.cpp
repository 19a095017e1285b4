// Command-line front end: run simulation sweeps, estimate a process from
// recorded counts, check SPAM consistency, and emit design files.
//
// Exit codes: 0 ok, 1 usage/parse error, 2 failed check or inconsistent
// input shapes, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qpt/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitNumerical = 3;

std::optional<long> parse_shots(const std::string& text) {
    if (text == "exact") return std::nullopt;
    try {
        const long shots = std::stol(text);
        if (shots < 1) throw qpt::InvalidArgument("shot count must be >= 1");
        return shots;
    } catch (const qpt::InvalidArgument&) {
        throw;
    } catch (const std::exception&) {
        throw qpt::InvalidArgument("--shots expects a positive integer or 'exact', got '" +
                                   text + "'");
    }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw qpt::InvalidArgument(flag + " expects comma-separated numbers, got '" +
                                       text + "'");
        }
    }
    if (values.empty()) {
        throw qpt::InvalidArgument(flag + " expects at least one value");
    }
    return values;
}

qpt::CMatrix parse_target(const std::string& spec) {
    if (spec == "x90") return qpt::sim::x90_unitary();
    if (spec == "identity") return qpt::CMatrix::Identity(2, 2);
    std::ifstream in(spec);
    if (!in) {
        throw qpt::InvalidArgument("target '" + spec +
                                   "' is neither a builtin name (x90, identity) nor a file");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw qpt::InvalidArgument("target file '" + spec + "' is not valid JSON: " +
                                   err.what());
    }
    const auto& rows = j.contains("unitary") ? j["unitary"] : j;
    const int n = static_cast<int>(rows.size());
    qpt::CMatrix u(n, n);
    try {
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                u(i, k) = qpt::Complex(rows[i][k][0].get<double>(), rows[i][k][1].get<double>());
            }
        }
    } catch (const json::exception& err) {
        throw qpt::InvalidArgument("target file '" + spec +
                                   "' must hold an NxN array of [re, im] pairs: " + err.what());
    }
    return u;
}

// ----------------------------------------------------------------------------
// sweep
// ----------------------------------------------------------------------------

struct SweepFlags {
    std::string config;  // builtin name or path
    std::string out_dir;
    std::string shots;
    std::string grid;
    std::string gauge_p;
    std::string noise;
    std::string estimators;
    std::string formats;
    std::string design;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    bool no_truncate_p = false;
    bool dump_data = false;
};

qpt::io::RunConfig resolve_run_config(const SweepFlags& flags) {
    qpt::io::RunConfig config;
    if (!flags.config.empty()) {
        const auto builtins = qpt::io::builtin_config_names();
        if (std::find(builtins.begin(), builtins.end(), flags.config) != builtins.end()) {
            config = qpt::io::builtin_config(flags.config);
        } else {
            std::ifstream in(flags.config);
            if (!in) {
                throw qpt::InvalidArgument("config '" + flags.config +
                                           "' is neither a builtin name nor an existing file");
            }
            json j;
            try {
                in >> j;
            } catch (const json::exception& err) {
                throw qpt::InvalidArgument("config file '" + flags.config +
                                           "' is not valid JSON: " + err.what());
            }
            config = qpt::io::config_from_json(j);
        }
    } else {
        // Flag-only invocation: default to the square design with the
        // standard + corrected estimator set.
        config.estimators = {qpt::sim::EstimatorSpec::standard(),
                             qpt::sim::EstimatorSpec::corrected(0.5)};
    }

    if (!flags.design.empty()) config.design = flags.design;
    if (!flags.noise.empty()) config.noise_kind = flags.noise;
    if (!flags.grid.empty()) config.grid = parse_double_list(flags.grid, "--grid");
    if (flags.runs) config.n_runs = *flags.runs;
    if (!flags.shots.empty()) config.shots = parse_shots(flags.shots);
    if (flags.seed) config.base_seed = *flags.seed;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.dump_data) config.dump_data = true;
    if (!flags.formats.empty()) {
        config.formats.clear();
        std::stringstream ss(flags.formats);
        std::string item;
        while (std::getline(ss, item, ',')) config.formats.push_back(item);
    }
    if (!flags.estimators.empty()) {
        config.estimators.clear();
        std::stringstream ss(flags.estimators);
        std::string item;
        const std::vector<double> gauge_ps =
            flags.gauge_p.empty() ? std::vector<double>{0.5}
                                  : parse_double_list(flags.gauge_p, "--gauge-p");
        while (std::getline(ss, item, ',')) {
            if (item == "standard") {
                config.estimators.push_back(qpt::sim::EstimatorSpec::standard());
            } else if (item == "ols") {
                config.estimators.push_back(qpt::sim::EstimatorSpec::ols());
            } else if (item == "corrected") {
                for (double p : gauge_ps) {
                    config.estimators.push_back(qpt::sim::EstimatorSpec::corrected(p));
                }
            } else if (item == "overcomplete") {
                for (double p : gauge_ps) {
                    config.estimators.push_back(
                        qpt::sim::EstimatorSpec::overcomplete(p, !flags.no_truncate_p));
                }
            } else {
                throw qpt::InvalidArgument(
                    "unknown estimator '" + item +
                    "' (expected standard, corrected, ols or overcomplete)");
            }
        }
    } else if (!flags.gauge_p.empty()) {
        // Re-expand corrected/overcomplete estimators over the requested list.
        std::vector<qpt::sim::EstimatorSpec> expanded;
        const auto gauge_ps = parse_double_list(flags.gauge_p, "--gauge-p");
        for (const auto& spec : config.estimators) {
            if (spec.kind == qpt::sim::EstimatorSpec::Kind::corrected) {
                for (double p : gauge_ps) {
                    expanded.push_back(qpt::sim::EstimatorSpec::corrected(p));
                }
            } else if (spec.kind == qpt::sim::EstimatorSpec::Kind::overcomplete) {
                for (double p : gauge_ps) {
                    expanded.push_back(
                        qpt::sim::EstimatorSpec::overcomplete(p, spec.truncate_p));
                }
            } else {
                expanded.push_back(spec);
            }
        }
        // Deduplicate corrected(p) entries produced by the expansion.
        std::vector<qpt::sim::EstimatorSpec> unique;
        for (const auto& spec : expanded) {
            const auto same = [&](const qpt::sim::EstimatorSpec& other) {
                return other.label() == spec.label();
            };
            if (std::find_if(unique.begin(), unique.end(), same) == unique.end()) {
                unique.push_back(spec);
            }
        }
        config.estimators = std::move(unique);
    }
    if (flags.no_truncate_p) {
        for (auto& spec : config.estimators) spec.truncate_p = false;
    }
    if (config.grid.empty()) config.grid = {0.0};
    return config;
}

int cmd_sweep(const SweepFlags& flags) {
    const qpt::io::RunConfig config = resolve_run_config(flags);
    const qpt::sim::SweepConfig sweep_config = qpt::io::to_sweep_config(config);

    qpt::io::OutputMeta meta;
    meta.config_hash = qpt::io::config_hash(config);
    meta.base_seed = config.base_seed;

    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);

    // Provenance: the fully resolved config next to every output.
    {
        json j = qpt::io::config_to_json(config);
        j["_meta"] = json{{"tool_version", qpt::io::kToolVersion},
                          {"config_hash", meta.config_hash},
                          {"base_seed", config.base_seed}};
        std::ofstream out(out_dir / "config.resolved.json");
        out << j.dump(2) << "\n";
    }

    if (config.dump_data) {
        if (!config.shots) {
            throw qpt::InvalidArgument("--dump-data requires finite shots (counts files "
                                       "cannot represent exact probabilities)");
        }
        for (std::size_t g = 0; g < config.grid.size(); ++g) {
            const auto noise = qpt::sim::noise_at(sweep_config.noise_kind, config.grid[g],
                                                  config.gate_gamma);
            for (int run = 0; run < config.n_runs; ++run) {
                const auto data = qpt::sim::simulate_dataset(
                    sweep_config.design, noise, config.base_seed + std::uint64_t(run));
                const std::string stem =
                    "grid" + std::to_string(g) + "_run" + std::to_string(run);
                if (data.calibration) {
                    qpt::io::write_counts_csv(out_dir / "data" / (stem + "_cal.csv"),
                                              *data.calibration, meta.header());
                }
                qpt::io::write_counts_csv(out_dir / "data" / (stem + "_gate.csv"), data.gate,
                                          meta.header());
            }
        }
    }

    const qpt::sim::SweepResult result = qpt::sim::sweep(sweep_config);

    std::vector<std::string> estimator_order;
    for (const auto& spec : config.estimators) estimator_order.push_back(spec.label());

    const bool want_csv = std::find(config.formats.begin(), config.formats.end(), "csv") !=
                          config.formats.end();
    const bool want_json = std::find(config.formats.begin(), config.formats.end(), "json") !=
                           config.formats.end();
    if (want_csv) {
        qpt::io::write_records_csv(out_dir / "records.csv", result.records, meta);
        qpt::io::write_aggregates_csv(out_dir / "aggregates.csv", result.aggregates, meta);
    }
    if (want_json) {
        qpt::io::write_aggregates_json(out_dir / "aggregates.json", result.aggregates, meta);
    }
    qpt::io::write_plot_dat(out_dir / "plot_fig1.dat", result.aggregates, estimator_order,
                            qpt::io::PlotMetric::fidelity_error, meta);
    qpt::io::write_plot_dat(out_dir / "plot_fig2.dat", result.aggregates, estimator_order,
                            qpt::io::PlotMetric::eigen_delta, meta);

    std::vector<std::string> warnings;
    for (const auto& record : result.records) {
        if (!record.ok()) {
            warnings.push_back("noise=" + qpt::io::format_double(record.noise_param) +
                               " run=" + std::to_string(record.run_index) + " estimator=" +
                               record.estimator + ": " + record.error);
        }
    }
    if (!warnings.empty()) {
        std::ofstream out(out_dir / "warnings.txt");
        out << meta.header();
        for (const auto& w : warnings) out << w << "\n";
        std::cerr << "warning: " << warnings.size()
                  << " estimator failure(s); see warnings.txt\n";
    }

    std::cout << "sweep complete: " << result.records.size() << " records over "
              << config.grid.size() << " grid points -> " << out_dir.string() << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------------------
// estimate
// ----------------------------------------------------------------------------

int cmd_estimate(const std::string& frame_path, const std::string& counts_path,
                 const std::string& calibration_path, const std::string& gauge_p_text,
                 bool no_truncate_p, const std::string& target, const std::string& out_path) {
    const auto gauge_ps = gauge_p_text.empty() ? std::vector<double>{0.5}
                                               : parse_double_list(gauge_p_text, "--gauge-p");
    if (gauge_ps.size() != 1) {
        throw qpt::InvalidArgument("estimate expects a single --gauge-p value");
    }
    const double gauge_p = gauge_ps[0];

    const qpt::io::DesignFile design = qpt::io::resolve_design(frame_path);
    const qpt::ProbMatrix p_hat = qpt::io::read_counts_csv(counts_path, design.frame);

    qpt::Estimate estimate;
    std::vector<std::string> warnings;
    if (!calibration_path.empty()) {
        const qpt::ProbMatrix i_hat = qpt::io::read_counts_csv(calibration_path, design.frame);
        if (design.frame.square()) {
            estimate = qpt::spam_corrected_qpt(design.frame, i_hat, p_hat, gauge_p);
        } else {
            estimate = qpt::overcomplete_spam_corrected_qpt(design.frame, i_hat, p_hat,
                                                            {!no_truncate_p, gauge_p});
        }
    } else {
        warnings.push_back("no calibration counts provided: SPAM correction skipped, "
                           "reporting the uncorrected linear-inversion estimate");
        estimate = design.frame.square() ? qpt::standard_qpt(design.frame, p_hat)
                                         : qpt::ols_qpt(design.frame, p_hat);
    }

    json j = qpt::io::estimate_to_json(estimate);
    if (!target.empty()) {
        const qpt::CMatrix u = parse_target(target);
        const qpt::GateFidelity fid = qpt::gate_fidelity(estimate.g_hat, u);
        j["diagnostics"]["fidelity"] = json{{"target", target},
                                            {"entanglement", fid.entanglement},
                                            {"average", fid.average}};
    }
    const std::string options_hash = qpt::io::hex64(qpt::io::fnv1a(
        frame_path + "|" + counts_path + "|" + calibration_path + "|" +
        qpt::io::format_double(gauge_p) + "|" + (no_truncate_p ? "1" : "0")));
    j["_meta"] = json{{"tool_version", qpt::io::kToolVersion}, {"config_hash", options_hash}};
    if (!warnings.empty()) j["_meta"]["warnings"] = warnings;

    if (fs::path(out_path).has_parent_path()) {
        fs::create_directories(fs::path(out_path).parent_path());
    }
    std::ofstream out(out_path);
    if (!out) throw qpt::InvalidArgument("cannot open '" + out_path + "' for writing");
    out << j.dump(2) << "\n";

    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "estimate written to " << out_path << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------------------
// check-spam
// ----------------------------------------------------------------------------

int cmd_check_spam(const std::string& frame_path, const std::string& calibration_path,
                   const std::string& out_path) {
    const qpt::io::DesignFile design = qpt::io::resolve_design(frame_path);
    const qpt::ProbMatrix i_hat = qpt::io::read_counts_csv(calibration_path, design.frame);
    const qpt::SpamConsistencyReport report =
        qpt::spam_consistency_check(design.frame, i_hat);

    std::cout << "spam consistency: max |z| = " << qpt::io::format_double(report.max_abs_z)
              << ", outliers (|z|>3): " << report.outliers << "/" << report.entries << " -> "
              << (report.pass ? "PASS" : "FAIL") << "\n";
    if (!out_path.empty()) {
        json j = qpt::io::spam_report_to_json(report);
        j["_meta"] = json{{"tool_version", qpt::io::kToolVersion}};
        std::ofstream out(out_path);
        if (!out) throw qpt::InvalidArgument("cannot open '" + out_path + "' for writing");
        out << j.dump(2) << "\n";
    }
    return report.pass ? kExitOk : kExitCheckFailed;
}

// ----------------------------------------------------------------------------
// make-design
// ----------------------------------------------------------------------------

int cmd_make_design(const std::string& name, const std::string& shots_text,
                    const std::string& out_path) {
    qpt::io::DesignFile file = qpt::io::builtin_design(name);
    if (!shots_text.empty()) file.design.shots = parse_shots(shots_text);
    qpt::io::write_design_json(out_path, file);
    std::cout << "design '" << name << "' written to " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum process tomography with SPAM-error correction"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("qpt v") + qpt::io::kToolVersion);

    SweepFlags sweep_flags;
    auto* sweep = app.add_subcommand(
        "sweep", "Run a seeded Monte-Carlo sweep over SPAM noise strengths");
    sweep->add_option("--config", sweep_flags.config,
                      "Builtin config name (paper-fig1-depol, paper-fig1-coherent, "
                      "paper-fig2-depol, paper-fig2-coherent) or path to a config JSON");
    sweep->add_option("--out", sweep_flags.out_dir, "Output directory");
    sweep->add_option("--seed", sweep_flags.seed, "Base seed (run r uses base_seed + r)");
    sweep->add_option("--shots", sweep_flags.shots, "Shots per circuit, or 'exact'");
    sweep->add_option("--grid", sweep_flags.grid,
                      "Comma-separated noise grid (per-side 1-gamma, or phi in radians)");
    sweep->add_option("--noise", sweep_flags.noise, "Noise kind: depolarizing or coherent");
    sweep->add_option("--runs", sweep_flags.runs, "Replications per grid point");
    sweep->add_option("--estimators", sweep_flags.estimators,
                      "Comma-separated: standard, corrected, ols, overcomplete");
    sweep->add_option("--gauge-p", sweep_flags.gauge_p,
                      "Comma-separated gauge splits for corrected estimators");
    sweep->add_option("--design", sweep_flags.design,
                      "Builtin design (paper-square, overcomplete6) or design JSON path");
    sweep->add_option("--format", sweep_flags.formats, "Output formats: csv,json");
    sweep->add_flag("--no-truncate-p", sweep_flags.no_truncate_p,
                    "Do not truncate P-hat to rank d^2 in the overcomplete pipeline");
    sweep->add_flag("--dump-data", sweep_flags.dump_data,
                    "Also write per-run counts CSV files under <out>/data/");

    std::string est_frame, est_counts, est_cal, est_gauge_p, est_target,
        est_out = "estimate.json";
    bool est_no_trunc = false;
    auto* estimate = app.add_subcommand("estimate", "Estimate a process from counts files");
    estimate->add_option("--frame", est_frame, "Design/frame JSON (builtin name or path)")
        ->required();
    estimate->add_option("--counts", est_counts, "Gate counts CSV")->required();
    estimate->add_option("--calibration", est_cal,
                         "Calibration counts CSV (prepare-and-measure circuits, no gate)");
    estimate->add_option("--gauge-p", est_gauge_p, "Gauge split in [0,1] (default 0.5)");
    estimate->add_option("--target", est_target,
                         "Target unitary for fidelity: x90, identity, or a JSON file");
    estimate->add_option("--out", est_out, "Output estimate JSON path");
    estimate->add_flag("--no-truncate-p", est_no_trunc,
                       "Do not truncate P-hat in the overcomplete pipeline");

    std::string check_frame, check_cal, check_out;
    auto* check = app.add_subcommand("check-spam",
                                     "Validate the a-priori SPAM model against calibration "
                                     "counts (exit 2 on failure)");
    check->add_option("--frame", check_frame, "Design/frame JSON (builtin name or path)")
        ->required();
    check->add_option("--calibration", check_cal, "Calibration counts CSV")->required();
    check->add_option("--out", check_out, "Optional report JSON path");

    std::string design_name, design_shots, design_out = "design.json";
    auto* make_design = app.add_subcommand("make-design", "Write a builtin design JSON");
    make_design
        ->add_option("--name", design_name, "Builtin design: paper-square or overcomplete6")
        ->required();
    make_design->add_option("--shots", design_shots, "Shots per circuit, or 'exact'");
    make_design->add_option("--out", design_out, "Output design JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sweep->parsed()) return cmd_sweep(sweep_flags);
        if (estimate->parsed()) {
            return cmd_estimate(est_frame, est_counts, est_cal, est_gauge_p, est_no_trunc,
                                est_target, est_out);
        }
        if (check->parsed()) return cmd_check_spam(check_frame, check_cal, check_out);
        if (make_design->parsed()) return cmd_make_design(design_name, design_shots, design_out);
    } catch (const qpt::ShapeError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitCheckFailed;
    } catch (const qpt::NumericalError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNumerical;
    } catch (const qpt::InvalidArgument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
