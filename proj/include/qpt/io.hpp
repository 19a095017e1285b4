#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpt/sim.hpp"

namespace qpt::io {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit over the canonical (key-sorted) JSON dump: stable across
// platforms, unlike std::hash.
std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t value);

// ----------------------------------------------------------------------------
// Run configuration
// ----------------------------------------------------------------------------

struct RunConfig {
    std::string name;                         // builtin name, if any
    std::string design = "paper-square";      // builtin design name or file path
    std::string noise_kind = "depolarizing";  // "depolarizing" | "coherent"
    double gate_gamma = 0.99;
    std::vector<double> grid;
    int n_runs = 50;
    std::optional<long> shots = 5000;  // nullopt = exact probabilities
    std::vector<sim::EstimatorSpec> estimators;
    std::uint64_t base_seed = 20250810;
    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "json"};
    bool dump_data = false;
};

// Builtin configs pinning the simulation-study runs:
// paper-fig1-depol, paper-fig1-coherent, paper-fig2-depol, paper-fig2-coherent.
RunConfig builtin_config(const std::string& name);
std::vector<std::string> builtin_config_names();

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);
std::string config_hash(const RunConfig& config);

sim::SweepConfig to_sweep_config(const RunConfig& config);

// ----------------------------------------------------------------------------
// Design and frame files (JSON)
// ----------------------------------------------------------------------------

struct DesignFile {
    sim::ExperimentDesign design;
    Frame frame;
};

DesignFile builtin_design(const std::string& name);  // paper-square | overcomplete6
DesignFile resolve_design(const std::string& name_or_path);

void write_design_json(const std::filesystem::path& path, const DesignFile& file);
DesignFile read_design_json(const std::filesystem::path& path);

// ----------------------------------------------------------------------------
// Counts files (CSV): prep_label,basis_label,outcome_label,counts,shots
// ----------------------------------------------------------------------------

void write_counts_csv(const std::filesystem::path& path, const ProbMatrix& table,
                      const std::string& header_comment = "");

// Assemble the frame's effect x state frequency table from a counts file.
// Within a (prep, basis) pair the "-" frequency is derived as 1 minus the
// "+" frequency so that paired frequencies sum to 1 exactly; counts that do
// not sum to the circuit's shots are an error.
ProbMatrix read_counts_csv(const std::filesystem::path& path, const Frame& frame);

// ----------------------------------------------------------------------------
// Estimate and report files
// ----------------------------------------------------------------------------

nlohmann::json estimate_to_json(const Estimate& estimate);
nlohmann::json spam_report_to_json(const SpamConsistencyReport& report);

// ----------------------------------------------------------------------------
// Sweep outputs
// ----------------------------------------------------------------------------

struct OutputMeta {
    std::string config_hash;
    std::uint64_t base_seed = 0;

    std::string header() const;  // "# ..." comment lines for text outputs
};

inline constexpr const char* kRecordsCsvHeader =
    "noise_param,estimator,run_index,seed,fidelity_error_ent,fidelity_error_avg,"
    "eigen_delta,cp_slack,tp_slack,spam_checked,spam_max_abs_z,spam_pass,error";

inline constexpr const char* kAggregatesCsvHeader =
    "noise_param,estimator,n,n_failed,fid_err_ent_mean,fid_err_ent_sigma,"
    "fid_err_avg_mean,fid_err_avg_sigma,abs_fid_err_ent_mean,abs_fid_err_ent_sigma,"
    "abs_fid_err_avg_mean,abs_fid_err_avg_sigma,delta_mean,delta_sigma";

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<sim::SweepRecord>& records, const OutputMeta& meta);
void write_aggregates_csv(const std::filesystem::path& path,
                          const std::vector<sim::AggregateRow>& aggregates,
                          const OutputMeta& meta);
void write_aggregates_json(const std::filesystem::path& path,
                           const std::vector<sim::AggregateRow>& aggregates,
                           const OutputMeta& meta);

// Plot-ready whitespace columns: noise_param, then (mean, sigma) per
// estimator. fig1 carries the signed average-fidelity error, fig2 the
// eigenvalue delta.
enum class PlotMetric { fidelity_error, eigen_delta };
void write_plot_dat(const std::filesystem::path& path,
                    const std::vector<sim::AggregateRow>& aggregates,
                    const std::vector<std::string>& estimator_order, PlotMetric metric,
                    const OutputMeta& meta);

std::string format_double(double value);  // shortest round-trip decimal

}  // namespace qpt::io
