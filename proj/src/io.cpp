#include "qpt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace qpt::io {

namespace {

using nlohmann::json;

std::string sanitize_csv_field(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw InvalidArgument("expected " + name + " to be a nested array");
    }
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols) {
            throw InvalidArgument(name + " rows have inconsistent lengths");
        }
        for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw InvalidArgument("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

json meta_json(const OutputMeta& meta) {
    return json{{"tool_version", kToolVersion},
                {"config_hash", meta.config_hash},
                {"base_seed", meta.base_seed}};
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

// ----------------------------------------------------------------------------
// Run configuration
// ----------------------------------------------------------------------------

RunConfig builtin_config(const std::string& name) {
    RunConfig config;
    config.name = name;
    config.design = "paper-square";
    config.n_runs = 50;
    config.shots = 5000;
    config.estimators = {sim::EstimatorSpec::standard(), sim::EstimatorSpec::corrected(0.0),
                         sim::EstimatorSpec::corrected(0.5), sim::EstimatorSpec::corrected(1.0)};
    if (name == "paper-fig1-depol" || name == "paper-fig2-depol") {
        config.noise_kind = "depolarizing";
        for (int i = 0; i <= 8; ++i) config.grid.push_back(0.005 * i);
    } else if (name == "paper-fig1-coherent" || name == "paper-fig2-coherent") {
        config.noise_kind = "coherent";
        for (int i = 0; i <= 8; ++i) config.grid.push_back(0.0125 * i);
    } else {
        throw InvalidArgument("unknown builtin config '" + name + "'");
    }
    return config;
}

std::vector<std::string> builtin_config_names() {
    return {"paper-fig1-depol", "paper-fig1-coherent", "paper-fig2-depol",
            "paper-fig2-coherent"};
}

json config_to_json(const RunConfig& config) {
    json estimators = json::array();
    for (const auto& spec : config.estimators) {
        json e;
        switch (spec.kind) {
            case sim::EstimatorSpec::Kind::standard: e["kind"] = "standard"; break;
            case sim::EstimatorSpec::Kind::corrected:
                e["kind"] = "corrected";
                e["gauge_p"] = spec.gauge_p;
                break;
            case sim::EstimatorSpec::Kind::ols: e["kind"] = "ols"; break;
            case sim::EstimatorSpec::Kind::overcomplete:
                e["kind"] = "overcomplete";
                e["gauge_p"] = spec.gauge_p;
                e["truncate_p"] = spec.truncate_p;
                break;
        }
        estimators.push_back(std::move(e));
    }
    json j{{"design", config.design},
           {"noise", json{{"kind", config.noise_kind}, {"gate_gamma", config.gate_gamma}}},
           {"grid", config.grid},
           {"n_runs", config.n_runs},
           {"estimators", estimators},
           {"base_seed", config.base_seed},
           {"out_dir", config.out_dir},
           {"formats", config.formats},
           {"dump_data", config.dump_data}};
    if (!config.name.empty()) j["name"] = config.name;
    if (config.shots) {
        j["shots"] = *config.shots;
    } else {
        j["shots"] = "exact";
    }
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig config;
    try {
        if (j.contains("name")) config.name = j["name"].get<std::string>();
        if (j.contains("design")) config.design = j["design"].get<std::string>();
        if (j.contains("noise")) {
            const auto& noise = j["noise"];
            if (noise.contains("kind")) config.noise_kind = noise["kind"].get<std::string>();
            if (noise.contains("gate_gamma")) config.gate_gamma = noise["gate_gamma"].get<double>();
        }
        if (j.contains("grid")) config.grid = j["grid"].get<std::vector<double>>();
        if (j.contains("n_runs")) config.n_runs = j["n_runs"].get<int>();
        if (j.contains("shots")) {
            if (j["shots"].is_string()) {
                if (j["shots"].get<std::string>() != "exact") {
                    throw InvalidArgument("shots must be an integer or \"exact\"");
                }
                config.shots.reset();
            } else {
                config.shots = j["shots"].get<long>();
            }
        }
        if (j.contains("estimators")) {
            config.estimators.clear();
            for (const auto& e : j["estimators"]) {
                const std::string kind = e.at("kind").get<std::string>();
                if (kind == "standard") {
                    config.estimators.push_back(sim::EstimatorSpec::standard());
                } else if (kind == "ols") {
                    config.estimators.push_back(sim::EstimatorSpec::ols());
                } else if (kind == "corrected") {
                    config.estimators.push_back(
                        sim::EstimatorSpec::corrected(e.value("gauge_p", 0.5)));
                } else if (kind == "overcomplete") {
                    config.estimators.push_back(sim::EstimatorSpec::overcomplete(
                        e.value("gauge_p", 0.5), e.value("truncate_p", true)));
                } else {
                    throw InvalidArgument("unknown estimator kind '" + kind + "'");
                }
            }
        }
        if (j.contains("base_seed")) config.base_seed = j["base_seed"].get<std::uint64_t>();
        if (j.contains("out_dir")) config.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("formats")) config.formats = j["formats"].get<std::vector<std::string>>();
        if (j.contains("dump_data")) config.dump_data = j["dump_data"].get<bool>();
    } catch (const json::exception& err) {
        throw InvalidArgument(std::string("malformed config: ") + err.what());
    }
    return config;
}

std::string config_hash(const RunConfig& config) {
    // Hash only the fields that determine the numbers, not where they land.
    json j = config_to_json(config);
    j.erase("name");
    j.erase("out_dir");
    j.erase("formats");
    j.erase("dump_data");
    return hex64(fnv1a(j.dump()));
}

sim::SweepConfig to_sweep_config(const RunConfig& config) {
    if (config.noise_kind != "depolarizing" && config.noise_kind != "coherent") {
        throw InvalidArgument("noise kind must be 'depolarizing' or 'coherent', got '" +
                              config.noise_kind + "'");
    }
    if (config.grid.empty()) {
        throw InvalidArgument("config has an empty noise grid");
    }
    if (config.estimators.empty()) {
        throw InvalidArgument("config has no estimators");
    }
    sim::SweepConfig sweep;
    sweep.design = resolve_design(config.design).design;
    sweep.design.shots = config.shots;
    sweep.noise_kind = config.noise_kind == "depolarizing"
                           ? sim::NoiseModel::Kind::depolarizing_spam
                           : sim::NoiseModel::Kind::coherent_prep;
    sweep.gate_gamma = config.gate_gamma;
    sweep.grid = config.grid;
    sweep.n_runs = config.n_runs;
    sweep.estimators = config.estimators;
    sweep.base_seed = config.base_seed;
    return sweep;
}

// ----------------------------------------------------------------------------
// Design files
// ----------------------------------------------------------------------------

DesignFile builtin_design(const std::string& name) {
    sim::ExperimentDesign design;
    if (name == "paper-square") {
        design = sim::ExperimentDesign::paper_square();
    } else if (name == "overcomplete6") {
        design = sim::ExperimentDesign::overcomplete6();
    } else {
        throw InvalidArgument("unknown builtin design '" + name +
                              "' (expected paper-square or overcomplete6)");
    }
    return {design, sim::design_frame(design)};
}

DesignFile resolve_design(const std::string& name_or_path) {
    if (name_or_path == "paper-square" || name_or_path == "overcomplete6") {
        return builtin_design(name_or_path);
    }
    if (!std::filesystem::exists(name_or_path)) {
        throw InvalidArgument("design '" + name_or_path +
                              "' is neither a builtin name nor an existing file");
    }
    return read_design_json(name_or_path);
}

void write_design_json(const std::filesystem::path& path, const DesignFile& file) {
    json j{{"format", "qpt-design/1"},
           {"dim", file.frame.dim},
           {"basis", "hermitian-identity-first"},
           {"preps", file.design.preps},
           {"bases", file.design.bases},
           {"tracked_effects", file.design.tracked_effects},
           {"include_calibration", file.design.include_calibration},
           {"effect_matrix", matrix_to_json(file.frame.m0)},
           {"state_matrix", matrix_to_json(file.frame.s0)}};
    if (file.design.shots) {
        j["shots"] = *file.design.shots;
    } else {
        j["shots"] = "exact";
    }
    open_output(path) << j.dump(2) << "\n";
}

DesignFile read_design_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open design file '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw InvalidArgument("design file '" + path.string() + "' is not valid JSON: " +
                              err.what());
    }
    try {
        DesignFile file;
        file.design.preps = j.at("preps").get<std::vector<std::string>>();
        file.design.bases = j.at("bases").get<std::vector<std::string>>();
        file.design.tracked_effects = j.at("tracked_effects").get<std::vector<std::string>>();
        if (j.contains("include_calibration")) {
            file.design.include_calibration = j["include_calibration"].get<bool>();
        }
        if (j.contains("shots")) {
            if (j["shots"].is_string()) {
                file.design.shots.reset();
            } else {
                file.design.shots = j["shots"].get<long>();
            }
        }
        const int dim = j.at("dim").get<int>();
        file.frame = Frame(matrix_from_json(j.at("effect_matrix"), "effect_matrix"),
                           matrix_from_json(j.at("state_matrix"), "state_matrix"), dim,
                           file.design.tracked_effects, file.design.preps);
        return file;
    } catch (const json::exception& err) {
        throw InvalidArgument("design file '" + path.string() + "' is malformed: " +
                              err.what());
    }
}

// ----------------------------------------------------------------------------
// Counts files
// ----------------------------------------------------------------------------

void write_counts_csv(const std::filesystem::path& path, const ProbMatrix& table,
                      const std::string& header_comment) {
    if (!table.shots) {
        throw InvalidArgument("cannot write a counts file for an exact probability table");
    }
    auto out = open_output(path);
    if (!header_comment.empty()) out << header_comment;
    out << "prep_label,basis_label,outcome_label,counts,shots\n";
    for (int i = 0; i < table.rows(); ++i) {
        const std::string& outcome = table.row_labels[i];
        const std::string basis = outcome.size() > 1 ? outcome.substr(1) : outcome;
        for (int j = 0; j < table.cols(); ++j) {
            const long long shots = (*table.shots)(i, j);
            const long long counts = std::llround(table.values(i, j) * double(shots));
            out << table.col_labels[j] << ',' << basis << ',' << outcome << ',' << counts
                << ',' << shots << "\n";
        }
    }
}

ProbMatrix read_counts_csv(const std::filesystem::path& path, const Frame& frame) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open counts file '" + path.string() + "'");
    }

    struct Row {
        std::string prep, basis, outcome;
        long long counts = 0, shots = 0;
    };
    std::vector<Row> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("prep_label", 0) == 0) continue;  // header
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) {
            throw InvalidArgument("counts file '" + path.string() + "' line " +
                                  std::to_string(line_no) + ": expected 5 fields, got " +
                                  std::to_string(fields.size()));
        }
        Row row;
        row.prep = fields[0];
        row.basis = fields[1];
        row.outcome = fields[2];
        try {
            row.counts = std::stoll(fields[3]);
            row.shots = std::stoll(fields[4]);
        } catch (const std::exception&) {
            throw InvalidArgument("counts file '" + path.string() + "' line " +
                                  std::to_string(line_no) + ": counts/shots are not integers");
        }
        if (row.shots < 1 || row.counts < 0 || row.counts > row.shots) {
            throw InvalidArgument("counts file '" + path.string() + "' line " +
                                  std::to_string(line_no) + ": invalid counts/shots");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw InvalidArgument("counts file '" + path.string() + "' has no data rows");
    }

    // Group by (prep, basis) circuit; derive "-" frequencies from "+" draws
    // so two-outcome pairs sum to 1 exactly.
    std::map<std::pair<std::string, std::string>, std::vector<const Row*>> circuits;
    for (const auto& row : rows) circuits[{row.prep, row.basis}].push_back(&row);

    struct Cell {
        double freq = 0.0;
        long long shots = 0;
    };
    std::map<std::pair<std::string, std::string>, Cell> cells;  // (outcome, prep)
    auto insert_cell = [&](const std::string& outcome, const std::string& prep, Cell cell) {
        if (!cells.emplace(std::make_pair(outcome, prep), cell).second) {
            throw InvalidArgument("counts file '" + path.string() +
                                  "' has duplicate rows for outcome '" + outcome +
                                  "' and prep '" + prep + "'");
        }
    };
    for (const auto& [key, circuit_rows] : circuits) {
        const Row* plus = nullptr;
        const Row* minus = nullptr;
        if (circuit_rows.size() == 2) {
            for (const Row* r : circuit_rows) {
                if (!r->outcome.empty() && r->outcome[0] == '+') plus = r;
                if (!r->outcome.empty() && r->outcome[0] == '-') minus = r;
            }
        }
        if (plus && minus) {
            if (plus->shots != minus->shots || plus->counts + minus->counts != plus->shots) {
                throw InvalidArgument("counts for circuit (" + key.first + ", " + key.second +
                                      ") do not sum to the circuit's shots");
            }
            const double freq = double(plus->counts) / double(plus->shots);
            insert_cell(plus->outcome, key.first, {freq, plus->shots});
            insert_cell(minus->outcome, key.first, {1.0 - freq, minus->shots});
        } else {
            for (const Row* r : circuit_rows) {
                insert_cell(r->outcome, key.first,
                            {double(r->counts) / double(r->shots), r->shots});
            }
        }
    }

    ProbMatrix table;
    table.row_labels = frame.effect_labels;
    table.col_labels = frame.state_labels;
    table.values.resize(frame.num_effects(), frame.num_states());
    table.shots.emplace(frame.num_effects(), frame.num_states());
    for (int i = 0; i < frame.num_effects(); ++i) {
        for (int j = 0; j < frame.num_states(); ++j) {
            const auto it = cells.find({frame.effect_labels[i], frame.state_labels[j]});
            if (it == cells.end()) {
                throw ShapeError("counts file '" + path.string() + "' has no entry for effect '" +
                                 frame.effect_labels[i] + "' and prep '" +
                                 frame.state_labels[j] + "' required by the frame");
            }
            table.values(i, j) = it->second.freq;
            (*table.shots)(i, j) = it->second.shots;
        }
    }
    return table;
}

// ----------------------------------------------------------------------------
// Estimate and report files
// ----------------------------------------------------------------------------

json estimate_to_json(const Estimate& estimate) {
    json spectrum = json::array();
    for (const auto& v : estimate.diagnostics.spectrum.values) {
        spectrum.push_back(json::array({v.real(), v.imag()}));
    }
    json diag{{"cp_slack", estimate.diagnostics.cp_slack},
              {"tp_slack", estimate.diagnostics.tp_slack},
              {"spectrum", spectrum}};
    if (estimate.diagnostics.g0) diag["g0"] = matrix_to_json(estimate.diagnostics.g0->mat);
    diag["m_discrepancy"] = estimate.diagnostics.m_discrepancy;
    diag["s_discrepancy"] = estimate.diagnostics.s_discrepancy;
    diag["factorization_residual"] = estimate.diagnostics.factorization_residual;

    json j{{"format", "qpt-estimate/1"},
           {"dim", estimate.g_hat.dim},
           {"basis", "hermitian-identity-first"},
           {"g_hat", matrix_to_json(estimate.g_hat.mat)},
           {"diagnostics", diag}};
    if (estimate.e_hat) j["e_hat"] = matrix_to_json(estimate.e_hat->mat);
    if (estimate.m_hat) j["m_hat"] = matrix_to_json(*estimate.m_hat);
    if (estimate.s_hat) j["s_hat"] = matrix_to_json(*estimate.s_hat);
    if (estimate.gauge_p) j["gauge_p"] = *estimate.gauge_p;
    return j;
}

json spam_report_to_json(const SpamConsistencyReport& report) {
    return json{{"max_abs_z", report.max_abs_z},
                {"outliers", report.outliers},
                {"entries", report.entries},
                {"pass", report.pass}};
}

// ----------------------------------------------------------------------------
// Sweep outputs
// ----------------------------------------------------------------------------

std::string OutputMeta::header() const {
    std::ostringstream os;
    os << "# qpt v" << kToolVersion << "\n";
    os << "# config_hash: " << config_hash << "\n";
    os << "# base_seed: " << base_seed << "\n";
    return os.str();
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<sim::SweepRecord>& records, const OutputMeta& meta) {
    auto out = open_output(path);
    out << meta.header() << kRecordsCsvHeader << "\n";
    for (const auto& r : records) {
        out << format_double(r.noise_param) << ',' << r.estimator << ',' << r.run_index << ','
            << r.seed << ',' << format_double(r.fidelity_error_ent) << ','
            << format_double(r.fidelity_error_avg) << ',' << format_double(r.eigen_delta) << ','
            << format_double(r.cp_slack) << ',' << format_double(r.tp_slack) << ','
            << (r.spam_checked ? 1 : 0) << ',' << format_double(r.spam_max_abs_z) << ','
            << (r.spam_pass ? 1 : 0) << ',' << sanitize_csv_field(r.error) << "\n";
    }
}

void write_aggregates_csv(const std::filesystem::path& path,
                          const std::vector<sim::AggregateRow>& aggregates,
                          const OutputMeta& meta) {
    auto out = open_output(path);
    out << meta.header() << kAggregatesCsvHeader << "\n";
    for (const auto& a : aggregates) {
        out << format_double(a.noise_param) << ',' << a.estimator << ',' << a.n << ','
            << a.n_failed << ',' << format_double(a.fid_err_ent_mean) << ','
            << format_double(a.fid_err_ent_sigma) << ',' << format_double(a.fid_err_avg_mean)
            << ',' << format_double(a.fid_err_avg_sigma) << ','
            << format_double(a.abs_fid_err_ent_mean) << ','
            << format_double(a.abs_fid_err_ent_sigma) << ','
            << format_double(a.abs_fid_err_avg_mean) << ','
            << format_double(a.abs_fid_err_avg_sigma) << ',' << format_double(a.delta_mean)
            << ',' << format_double(a.delta_sigma) << "\n";
    }
}

void write_aggregates_json(const std::filesystem::path& path,
                           const std::vector<sim::AggregateRow>& aggregates,
                           const OutputMeta& meta) {
    json rows = json::array();
    for (const auto& a : aggregates) {
        rows.push_back(json{{"noise_param", a.noise_param},
                            {"estimator", a.estimator},
                            {"n", a.n},
                            {"n_failed", a.n_failed},
                            {"fid_err_ent_mean", a.fid_err_ent_mean},
                            {"fid_err_ent_sigma", a.fid_err_ent_sigma},
                            {"fid_err_avg_mean", a.fid_err_avg_mean},
                            {"fid_err_avg_sigma", a.fid_err_avg_sigma},
                            {"abs_fid_err_ent_mean", a.abs_fid_err_ent_mean},
                            {"abs_fid_err_ent_sigma", a.abs_fid_err_ent_sigma},
                            {"abs_fid_err_avg_mean", a.abs_fid_err_avg_mean},
                            {"abs_fid_err_avg_sigma", a.abs_fid_err_avg_sigma},
                            {"delta_mean", a.delta_mean},
                            {"delta_sigma", a.delta_sigma}});
    }
    json j{{"_meta", meta_json(meta)}, {"aggregates", rows}};
    open_output(path) << j.dump(2) << "\n";
}

void write_plot_dat(const std::filesystem::path& path,
                    const std::vector<sim::AggregateRow>& aggregates,
                    const std::vector<std::string>& estimator_order, PlotMetric metric,
                    const OutputMeta& meta) {
    std::vector<double> params;
    for (const auto& a : aggregates) {
        if (std::find(params.begin(), params.end(), a.noise_param) == params.end()) {
            params.push_back(a.noise_param);
        }
    }

    auto out = open_output(path);
    out << meta.header();
    out << "# columns: noise_param";
    for (const auto& est : estimator_order) out << ' ' << est << ":mean " << est << ":sigma";
    out << "\n";

    for (double param : params) {
        out << format_double(param);
        for (const auto& est : estimator_order) {
            const auto it = std::find_if(aggregates.begin(), aggregates.end(),
                                         [&](const sim::AggregateRow& a) {
                                             return a.noise_param == param &&
                                                    a.estimator == est;
                                         });
            if (it == aggregates.end()) {
                out << " nan nan";
                continue;
            }
            const double mean = metric == PlotMetric::fidelity_error ? it->fid_err_avg_mean
                                                                     : it->delta_mean;
            const double sigma = metric == PlotMetric::fidelity_error ? it->fid_err_avg_sigma
                                                                      : it->delta_sigma;
            out << ' ' << format_double(mean) << ' ' << format_double(sigma);
        }
        out << "\n";
    }
}

}  // namespace qpt::io
