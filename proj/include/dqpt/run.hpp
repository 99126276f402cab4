#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "dqpt/dqpt.hpp"
#include "dqpt/evolution.hpp"
#include "dqpt/models.hpp"

namespace dqpt {

struct CorrSpec {
    Pauli a = Pauli::Z, b = Pauli::Z;
    int distance = 1;
    std::string column_name() const;  // C_<ab>_d<dist>
};

struct MiSpec {
    std::vector<int> region_a, region_b;
    std::string column_name() const;  // MI_<a-sites>__<b-sites>
};

/// Flat key = value run configuration (see configs/ for examples).
struct RunConfig {
    std::string mode = "evolve";  // evolve | ansatz | ed | analyze
    std::string family = "ising";
    double j = 0, jxy = 0, jz = 0, hx = 0, hz = 0;
    std::string initial_state = "down";  // down | right | up | custom
    std::array<double, 4> spinor{0, 0, 1, 0};  // re_up im_up re_down im_down
    double dt = 0.01;
    double t_max = 2.0;
    int chi_max = 256;
    double sv_threshold = 1e-9;
    int trotter_order = 2;
    int spectrum_depth = 4;
    std::vector<CorrSpec> correlators;
    std::vector<MiSpec> mi_pairs;
    double window = 0.5, r_p = 0.02, g_e = 0.2;
    std::string ansatz_kind = "auto";  // precession | entanglement | auto
    int ed_sites = 12;
    std::string csv_in;  // analyze mode input (defaults to <out>/timeseries.csv)
    bool check = false;  // analyze --check

    SpinModel model() const;
    ProductState initial() const;
    ClassifyThresholds thresholds() const;
};

RunConfig parse_config_file(const std::filesystem::path& path);
void apply_override(RunConfig& cfg, const std::string& key_eq_value);
void validate_config(const RunConfig& cfg);

/// One row of the fixed-schema CSV.
struct QuenchRecord {
    double t = 0, f = 0;
    cdouble e1 = 0, e2 = 0;
    std::vector<double> lambdas;  // squared Schmidt values, bond A, depth K
    double s_a = 0, s_b = 0, o11_abs = 0, ood_abs = 0;
    double sx = 0, sy = 0, sz = 0;
    std::vector<double> corr;  // real parts, order of cfg.correlators
    std::vector<double> mi;    // order of cfg.mi_pairs
};

struct EventReport {
    DqptEvent event;
    bool classified = false;
    DqptClassification cls;
};

struct RunOutput {
    int exit_code = 0;
    std::string error;
    std::vector<QuenchRecord> records;
    std::vector<EventReport> events;
    Eigen::Index max_chi = 0;
    double max_canonical_error = 0;
    std::filesystem::path csv_path, report_path, resolved_path;
};

/// Executes one configuration; writes timeseries.csv, report.json and
/// resolved.cfg under out_dir. Exit codes: 0 ok, 2 config error, 3 numerical
/// failure (partial CSV is kept with a truncation marker row).
RunOutput run(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct SweepSpec {
    std::vector<std::string> params;            // e.g. {"hz", "J"}
    std::vector<std::vector<double>> points;    // one tuple per run
};

/// "--param hz,J --values 0.15:1,0.35:0.9" -> pairs swept together.
SweepSpec parse_sweep(const std::string& param_arg, const std::string& values_arg);

struct SweepOutput {
    int exit_code = 0;
    std::vector<RunOutput> runs;
    std::filesystem::path summary_path;
};

/// Runs each point (concurrently, capped by DQPT_WORKERS) and writes a
/// summary CSV of (value, event times, classifications).
SweepOutput sweep(const RunConfig& base, const SweepSpec& spec,
                  const std::filesystem::path& out_dir);

}  // namespace dqpt
