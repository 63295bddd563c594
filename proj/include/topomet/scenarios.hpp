#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topomet/band_geometry.hpp"
#include "topomet/povm_optimizer.hpp"

#include "json.hpp"

namespace topomet {

enum class TrajectoryKind { diagonal, fixed_k2, explicit_list };

// Closed scan curves in the Brillouin zone. Both built-in kinds sample at
// midpoints, t_j = -pi + (j + 1/2) 2pi/samples; with `samples` divisible by
// 4 the sampled points avoid t in {0, -pi, +-pi/2}, i.e. the coordinate
// poles and the curvature zeros of the diagonal loop.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::diagonal;
    int samples = 40;
    double offset = 0.0;  // diagonal: k2 = t + offset
    double k2 = 0.8;      // fixed-k2 loop height
    std::vector<std::pair<double, double>> points;  // explicit-list
};

std::vector<BlochPoint> trajectory_points(const Trajectory& t, double mass);

enum class PovmChoice { trine, sic, optimize_det, optimize_weighted };

std::string povm_choice_name(PovmChoice c);

struct ScenarioConfig {
    double mass = 1.0;
    Trajectory trajectory;
    PovmChoice povm_choice = PovmChoice::trine;
    std::string weight_label = "W1-qfi";  // W1-qfi | W2-jacobian
    int restarts = 8;
    std::int64_t shots = 1000;
    std::int64_t trials = 0;
    std::optional<std::uint64_t> seed;  // mandatory at run time, never wall clock
    int grid_n = 64;
    std::string out_path;
    bool verbose = false;
    // mass sweep grid
    double mass_min = 0.25;
    double mass_max = 3.75;
    double mass_step = 0.25;
    std::vector<double> masses;  // chern-report list
    // optimize-povm target point
    double k1 = 1.0;
    double point_k2 = 0.5;
};

// Plain-text config: `[section]` headers over `key = value` lines, `#`
// comments. Unknown sections or keys are hard errors.
ScenarioConfig parse_config(std::istream& in, const std::string& command);
ScenarioConfig parse_config_file(const std::string& path, const std::string& command);

// Throws ConfigError unless the config carries everything `command` needs
// (a seed and an output path, plus per-command requirements).
void require_runnable(const ScenarioConfig& cfg, const std::string& command);

// 17-significant-digit decimal form used in every CSV cell.
std::string format_number(double v);

struct TrajectoryScanRow {
    int index = 0;
    double k1 = 0.0;
    double k2 = 0.0;
    std::optional<double> omega12;
    std::optional<double> berry_bound;
    std::optional<double> vol_opovm;
    std::optional<double> vol_trine;
    std::optional<double> vol_sic;
    std::optional<double> vol_mc;
    std::string error;
};

struct TrajectoryScanResult {
    std::vector<TrajectoryScanRow> rows;
    std::string povm_label;
    bool has_mc = false;
    std::string csv() const;
};

// Per trajectory point: Berry-curvature bound and the asymptotic
// uncertainty volumes of the optimized, trine and SIC POVMs (plus a Monte
// Carlo volume for the configured POVM when trials > 0). Point-level
// failures land in the error column and the scan continues.
TrajectoryScanResult run_trajectory_scan(const ScenarioConfig& cfg);

struct HolevoScanRow {
    int index = 0;
    double k1 = 0.0;
    double k2 = 0.0;
    std::optional<double> tr_w_sigma_n;  // N * Tr(W Sigma) for the optimized POVM
    std::optional<double> holevo;
    std::optional<double> sld_crb;
    std::optional<double> one_plus_r;
    std::optional<double> ratio_h_s;
    std::string error;
};

struct HolevoScanResult {
    std::vector<HolevoScanRow> rows;
    std::string weight_label;
    std::string csv() const;
};

HolevoScanResult run_holevo_scan(const ScenarioConfig& cfg);

struct MassSweepRow {
    double mass = 0.0;
    std::optional<int> chern;
    std::optional<double> four_vol_g;
    std::optional<double> m_p;
    std::string error;
};

struct MassSweepResult {
    std::vector<MassSweepRow> rows;
    // Monte Carlo spot checks of the det Sigma = det F_C^{-1}/N^2
    // substitution (run when trials > 0): worst relative deviation seen.
    std::optional<double> spot_check_worst_rel;
    std::string csv() const;
};

// Per mass: 4 vol_g, the N-independent metrological potential
// M_p = integral of sqrt(det F_C(trine)), and the Chern number. Verifies
// M_p <= 4 vol_g for every computed row.
MassSweepResult run_mass_sweep(const ScenarioConfig& cfg);

struct ChernReportRow {
    double mass = 0.0;
    std::optional<int> chern;
    std::optional<double> quantum_volume;
    std::optional<double> saturation_ratio;  // vol / (pi |Ch|), empty when Ch = 0
    std::string error;
};

struct ChernReportResult {
    std::vector<ChernReportRow> rows;
    std::string csv() const;
};

ChernReportResult run_chern_report(const ScenarioConfig& cfg);

struct OptimizePovmResult {
    OptimizationResult optimization;
    std::vector<std::pair<int, double>> trace;
    nlohmann::json summary() const;
    std::string trace_csv() const;
};

OptimizePovmResult run_optimize_povm(const ScenarioConfig& cfg);

}  // namespace topomet
