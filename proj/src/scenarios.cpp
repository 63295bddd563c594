#include "topomet/scenarios.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "topomet/estimation.hpp"

namespace topomet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a number");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as an integer");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a u64");
    }
}

std::vector<std::pair<double, double>> parse_point_list(const std::string& v) {
    std::vector<std::pair<double, double>> pts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto comma = item.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("trajectory points: expected 'k1,k2' pairs, got '" + item + "'");
        }
        pts.emplace_back(parse_double("points", trim(item.substr(0, comma))),
                         parse_double("points", trim(item.substr(comma + 1))));
    }
    return pts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

SectionMap read_sections(std::istream& in) {
    SectionMap sections;
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            }
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty()) {
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            }
            sections.try_emplace(current);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        if (current.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        if (!sections[current].emplace(key, value).second) {
            throw ConfigError("duplicate key '" + key + "' in section [" + current + "]");
        }
    }
    return sections;
}

// every key a command may consume, per section
const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"model", {"mass"}},
        {"point", {"k1", "k2"}},
        {"trajectory", {"kind", "samples", "offset", "k2", "points"}},
        {"estimation", {"shots", "trials", "seed"}},
        {"povm", {"choice", "weight", "restarts"}},
        {"grid", {"n"}},
        {"sweep", {"mass_min", "mass_max", "mass_step", "masses"}},
        {"output", {"path"}},
    };
    return k;
}

const std::map<std::string, std::set<std::string>>& command_sections() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"scan-trajectory", {"model", "trajectory", "estimation", "povm", "grid", "output"}},
        {"scan-holevo", {"model", "trajectory", "estimation", "povm", "grid", "output"}},
        {"sweep-mass", {"sweep", "trajectory", "estimation", "grid", "output"}},
        {"chern-report", {"sweep", "grid", "estimation", "output"}},
        {"optimize-povm", {"model", "point", "estimation", "povm", "output"}},
    };
    return s;
}

}  // namespace

std::string povm_choice_name(PovmChoice c) {
    switch (c) {
        case PovmChoice::trine: return "trine";
        case PovmChoice::sic: return "sic";
        case PovmChoice::optimize_det: return "optimize-det";
        case PovmChoice::optimize_weighted: return "optimize-weighted";
    }
    return "?";
}

std::vector<BlochPoint> trajectory_points(const Trajectory& t, double mass) {
    std::vector<BlochPoint> pts;
    switch (t.kind) {
        case TrajectoryKind::diagonal:
        case TrajectoryKind::fixed_k2: {
            if (t.samples < 2) {
                throw ConfigError("trajectory: samples must be >= 2");
            }
            const double h = 2.0 * std::numbers::pi / t.samples;
            for (int j = 0; j < t.samples; ++j) {
                const double u = -std::numbers::pi + (j + 0.5) * h;
                if (t.kind == TrajectoryKind::diagonal) {
                    pts.push_back(make_bloch_point(u, u + t.offset, mass));
                } else {
                    pts.push_back(make_bloch_point(u, t.k2, mass));
                }
            }
            break;
        }
        case TrajectoryKind::explicit_list: {
            if (t.points.size() < 2) {
                throw ConfigError("trajectory: explicit-list needs at least 2 points");
            }
            for (const auto& [a, b] : t.points) pts.push_back(make_bloch_point(a, b, mass));
            break;
        }
    }
    return pts;
}

ScenarioConfig parse_config(std::istream& in, const std::string& command) {
    const SectionMap sections = read_sections(in);

    const auto cmd_it = command_sections().find(command);
    if (cmd_it == command_sections().end()) {
        throw ConfigError("unknown command '" + command + "'");
    }
    for (const auto& [section, keys] : sections) {
        if (!cmd_it->second.contains(section)) {
            throw ConfigError("section [" + section + "] is not used by " + command);
        }
        const auto& allowed = known_keys().at(section);
        for (const auto& [key, value] : keys) {
            (void)value;
            if (!allowed.contains(key)) {
                throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }

    ScenarioConfig cfg;
    const auto get = [&](const std::string& sec, const std::string& key) -> const std::string* {
        const auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };

    if (const auto* v = get("model", "mass")) cfg.mass = parse_double("mass", *v);
    if (const auto* v = get("point", "k1")) cfg.k1 = parse_double("k1", *v);
    if (const auto* v = get("point", "k2")) cfg.point_k2 = parse_double("k2", *v);

    if (const auto* v = get("trajectory", "kind")) {
        if (*v == "diagonal") cfg.trajectory.kind = TrajectoryKind::diagonal;
        else if (*v == "fixed-k2") cfg.trajectory.kind = TrajectoryKind::fixed_k2;
        else if (*v == "explicit-list") cfg.trajectory.kind = TrajectoryKind::explicit_list;
        else throw ConfigError("trajectory kind must be diagonal | fixed-k2 | explicit-list");
    }
    if (const auto* v = get("trajectory", "samples")) {
        cfg.trajectory.samples = static_cast<int>(parse_int("samples", *v));
        if (cfg.trajectory.samples < 2) throw ConfigError("trajectory: samples must be >= 2");
    }
    if (const auto* v = get("trajectory", "offset"))
        cfg.trajectory.offset = parse_double("offset", *v);
    if (const auto* v = get("trajectory", "k2")) cfg.trajectory.k2 = parse_double("k2", *v);
    if (const auto* v = get("trajectory", "points")) cfg.trajectory.points = parse_point_list(*v);

    if (const auto* v = get("estimation", "shots")) {
        cfg.shots = parse_int("shots", *v);
        if (cfg.shots < 1) throw ConfigError("estimation: shots must be >= 1");
    }
    if (const auto* v = get("estimation", "trials")) {
        cfg.trials = parse_int("trials", *v);
        if (cfg.trials < 0) throw ConfigError("estimation: trials must be >= 0");
    }
    if (const auto* v = get("estimation", "seed")) cfg.seed = parse_u64("seed", *v);

    if (const auto* v = get("povm", "choice")) {
        if (*v == "trine") cfg.povm_choice = PovmChoice::trine;
        else if (*v == "sic") cfg.povm_choice = PovmChoice::sic;
        else if (*v == "optimize-det") cfg.povm_choice = PovmChoice::optimize_det;
        else if (*v == "optimize-weighted") cfg.povm_choice = PovmChoice::optimize_weighted;
        else throw ConfigError("povm choice must be trine | sic | optimize-det | optimize-weighted");
    }
    if (const auto* v = get("povm", "weight")) {
        if (*v != "W1-qfi" && *v != "W2-jacobian") {
            throw ConfigError("povm weight must be W1-qfi | W2-jacobian");
        }
        cfg.weight_label = *v;
    }
    if (const auto* v = get("povm", "restarts")) {
        cfg.restarts = static_cast<int>(parse_int("restarts", *v));
        if (cfg.restarts < 1) throw ConfigError("povm: restarts must be >= 1");
    }

    if (const auto* v = get("grid", "n")) {
        cfg.grid_n = static_cast<int>(parse_int("n", *v));
        if (cfg.grid_n < 8) throw ConfigError("grid: n must be >= 8");
    }

    if (const auto* v = get("sweep", "mass_min")) cfg.mass_min = parse_double("mass_min", *v);
    if (const auto* v = get("sweep", "mass_max")) cfg.mass_max = parse_double("mass_max", *v);
    if (const auto* v = get("sweep", "mass_step")) {
        cfg.mass_step = parse_double("mass_step", *v);
        if (cfg.mass_step <= 0.0) throw ConfigError("sweep: mass_step must be positive");
    }
    if (const auto* v = get("sweep", "masses")) cfg.masses = parse_double_list("masses", *v);

    if (const auto* v = get("output", "path")) cfg.out_path = *v;

    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    return parse_config(in, command);
}

void require_runnable(const ScenarioConfig& cfg, const std::string& command) {
    if (!cfg.seed.has_value()) {
        throw ConfigError("a seed is required (config [estimation] seed or --seed); "
                          "wall-clock seeding is not supported");
    }
    if (cfg.out_path.empty()) {
        throw ConfigError("an output path is required (config [output] path or --out)");
    }
    if (command == "scan-holevo" && cfg.weight_label != "W1-qfi" &&
        cfg.weight_label != "W2-jacobian") {
        throw ConfigError("scan-holevo requires weight = W1-qfi | W2-jacobian");
    }
    if (command == "chern-report" && cfg.masses.empty()) {
        throw ConfigError("chern-report requires [sweep] masses = m1, m2, ...");
    }
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string cell(const std::optional<double>& v) {
    return v.has_value() ? format_number(*v) : std::string();
}

std::string cell(const std::optional<int>& v) {
    return v.has_value() ? std::to_string(*v) : std::string();
}

// quote the error text if it contains CSV-active characters
std::string error_cell(const std::string& e) {
    if (e.find_first_of(",\"\n") == std::string::npos) return e;
    std::string quoted = "\"";
    for (char c : e) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

WeightMatrix weight_for(const std::string& label, const BlochPoint& pt) {
    if (label == "W1-qfi") return qfi_weight(pt);
    if (label == "W2-jacobian") return jacobian_weight(pt);
    throw ConfigError("unknown weight label: " + label);
}

}  // namespace

std::string TrajectoryScanResult::csv() const {
    std::string out =
        "index,k1,k2,omega12,berry_bound,vol_opovm,vol_trine,vol_sic,vol_mc,povm,error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.index) + ',' + format_number(r.k1) + ',' + format_number(r.k2) +
               ',' + cell(r.omega12) + ',' + cell(r.berry_bound) + ',' + cell(r.vol_opovm) +
               ',' + cell(r.vol_trine) + ',' + cell(r.vol_sic) + ',' + cell(r.vol_mc) + ',' +
               povm_label + ',' + error_cell(r.error) + '\n';
    }
    return out;
}

TrajectoryScanResult run_trajectory_scan(const ScenarioConfig& cfg) {
    const std::uint64_t seed = cfg.seed.value_or(0);
    const std::vector<BlochPoint> pts = trajectory_points(cfg.trajectory, cfg.mass);

    TrajectoryScanResult result;
    result.povm_label = povm_choice_name(cfg.povm_choice);
    result.has_mc = cfg.trials > 0;

    const Povm trine = trine_povm();
    const Povm sic = sic_povm();

    for (std::size_t i = 0; i < pts.size(); ++i) {
        const BlochPoint& pt = pts[i];
        TrajectoryScanRow row;
        row.index = static_cast<int>(i);
        row.k1 = pt.k1;
        row.k2 = pt.k2;
        const std::uint64_t point_seed = derive_stream(seed, i);
        try {
            const GeometricTensor q = qgt_analytic(pt);
            row.omega12 = q.omega12;
            row.berry_bound = berry_bound(pt, cfg.shots);

            const OptimizationResult opt = optimize_det_fim(pt, cfg.restarts, point_seed);
            row.vol_opovm = uncertainty_volume(asymptotic_covariance(opt.povm, pt, cfg.shots));
            row.vol_trine = uncertainty_volume(asymptotic_covariance(trine, pt, cfg.shots));
            row.vol_sic = uncertainty_volume(asymptotic_covariance(sic, pt, cfg.shots));

            if (cfg.trials > 0) {
                const Povm* chosen = &trine;
                Povm optimized;
                switch (cfg.povm_choice) {
                    case PovmChoice::trine: chosen = &trine; break;
                    case PovmChoice::sic: chosen = &sic; break;
                    case PovmChoice::optimize_det: chosen = &opt.povm; break;
                    case PovmChoice::optimize_weighted: {
                        const OptimizationResult w = optimize_weighted(
                            weight_for(cfg.weight_label, pt), pt, cfg.restarts, point_seed);
                        optimized = w.povm;
                        chosen = &optimized;
                        break;
                    }
                }
                const CovarianceEstimate mc = monte_carlo_covariance(
                    *chosen, pt, cfg.shots, cfg.trials, derive_stream(point_seed, 1));
                row.vol_mc = uncertainty_volume(mc);
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string HolevoScanResult::csv() const {
    std::string out = "index,k1,k2,weight,tr_w_sigma_n,holevo,sld_crb,one_plus_r,ratio_h_s,error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.index) + ',' + format_number(r.k1) + ',' + format_number(r.k2) +
               ',' + weight_label + ',' + cell(r.tr_w_sigma_n) + ',' + cell(r.holevo) + ',' +
               cell(r.sld_crb) + ',' + cell(r.one_plus_r) + ',' + cell(r.ratio_h_s) + ',' +
               error_cell(r.error) + '\n';
    }
    return out;
}

HolevoScanResult run_holevo_scan(const ScenarioConfig& cfg) {
    const std::uint64_t seed = cfg.seed.value_or(0);
    const std::vector<BlochPoint> pts = trajectory_points(cfg.trajectory, cfg.mass);

    HolevoScanResult result;
    result.weight_label = cfg.weight_label;

    for (std::size_t i = 0; i < pts.size(); ++i) {
        const BlochPoint& pt = pts[i];
        HolevoScanRow row;
        row.index = static_cast<int>(i);
        row.k1 = pt.k1;
        row.k2 = pt.k2;
        try {
            const WeightMatrix w = weight_for(cfg.weight_label, pt);
            const OptimizationResult opt =
                optimize_weighted(w, pt, cfg.restarts, derive_stream(seed, i));
            const CovarianceEstimate cov = asymptotic_covariance(opt.povm, pt, cfg.shots);
            row.tr_w_sigma_n = weighted_variance(w, cov) * static_cast<double>(cfg.shots);
            row.holevo = holevo_bound(w, pt);
            row.sld_crb = sld_crb(w, pt);
            row.one_plus_r = 1.0 + r_parameter(pt);
            row.ratio_h_s = *row.holevo / *row.sld_crb;
        } catch (const Error& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string MassSweepResult::csv() const {
    std::string out = "mass,chern,four_vol_g,m_p,error\n";
    for (const auto& r : rows) {
        out += format_number(r.mass) + ',' + cell(r.chern) + ',' + cell(r.four_vol_g) + ',' +
               cell(r.m_p) + ',' + error_cell(r.error) + '\n';
    }
    return out;
}

namespace {

// N-independent metrological potential: integral of sqrt(det F_C(trine))
// over the Brillouin zone (midpoint rule).
double metrological_potential(double mass, int grid_n) {
    const Povm trine = trine_povm();
    const double h = 2.0 * std::numbers::pi / grid_n;
    double sum = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const BlochPoint pt{-std::numbers::pi + (i + 0.5) * h,
                                -std::numbers::pi + (j + 0.5) * h, mass};
            const FisherMatrix f = classical_fim(trine, pt);
            sum += std::sqrt(std::max(f.m.determinant(), 0.0));
        }
    }
    return sum * h * h;
}

}  // namespace

MassSweepResult run_mass_sweep(const ScenarioConfig& cfg) {
    MassSweepResult result;
    if (cfg.mass_max < cfg.mass_min) {
        throw ConfigError("sweep: mass_max must be >= mass_min");
    }

    std::vector<double> grid;
    for (double m = cfg.mass_min; m <= cfg.mass_max + 1e-12; m += cfg.mass_step) {
        grid.push_back(m);
    }

    for (const double mass : grid) {
        MassSweepRow row;
        row.mass = mass;
        const double crit_dist = std::min({std::abs(mass), std::abs(mass - 2.0),
                                           std::abs(mass + 2.0)});
        if (crit_dist < 0.05) {
            row.error = "skipped: mass within 0.05 of a gap closing";
            result.rows.push_back(std::move(row));
            continue;
        }
        try {
            row.chern = chern_number(mass, cfg.grid_n);
            row.four_vol_g = 4.0 * quantum_volume(mass, cfg.grid_n);
            row.m_p = metrological_potential(mass, cfg.grid_n);
            if (*row.m_p > *row.four_vol_g + 1e-9) {
                throw Error("metrological potential exceeds 4 vol_g at mass " +
                            std::to_string(mass) + "; this violates the bound");
            }
        } catch (const CriticalMassError& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }

    // Monte Carlo spot check of the asymptotic substitution
    // [det Sigma]^{-1/2}/N = sqrt(det F_C): five points on the fixed-k2
    // loop at the middle mass, done only when trials were requested.
    if (cfg.trials > 0) {
        std::vector<double> valid;
        for (const auto& r : result.rows) {
            if (r.error.empty()) valid.push_back(r.mass);
        }
        if (!valid.empty()) {
            const double mass = valid[valid.size() / 2];
            Trajectory spot;
            spot.kind = TrajectoryKind::fixed_k2;
            spot.k2 = cfg.trajectory.k2;
            spot.samples = 5;
            const Povm trine = trine_povm();
            double worst = 0.0;
            const std::vector<BlochPoint> pts = trajectory_points(spot, mass);
            for (std::size_t i = 0; i < pts.size(); ++i) {
                try {
                    const CovarianceEstimate asym =
                        asymptotic_covariance(trine, pts[i], cfg.shots);
                    const CovarianceEstimate mc =
                        monte_carlo_covariance(trine, pts[i], cfg.shots, cfg.trials,
                                               derive_stream(cfg.seed.value_or(0), 1000 + i));
                    const double va = uncertainty_volume(asym);
                    const double vm = uncertainty_volume(mc);
                    if (va > 0.0) worst = std::max(worst, std::abs(vm / va - 1.0));
                } catch (const Error&) {
                    // an uninformative spot point; the sweep itself already
                    // recorded its rows
                }
            }
            result.spot_check_worst_rel = worst;
        }
    }
    return result;
}

std::string ChernReportResult::csv() const {
    std::string out = "mass,chern,quantum_volume,saturation_ratio,error\n";
    for (const auto& r : rows) {
        out += format_number(r.mass) + ',' + cell(r.chern) + ',' + cell(r.quantum_volume) +
               ',' + cell(r.saturation_ratio) + ',' + error_cell(r.error) + '\n';
    }
    return out;
}

ChernReportResult run_chern_report(const ScenarioConfig& cfg) {
    ChernReportResult result;
    for (const double mass : cfg.masses) {
        ChernReportRow row;
        row.mass = mass;
        try {
            row.chern = chern_number(mass, cfg.grid_n);
            row.quantum_volume = quantum_volume(mass, cfg.grid_n);
            if (*row.chern != 0) {
                row.saturation_ratio =
                    *row.quantum_volume / (std::numbers::pi * std::abs(*row.chern));
            }
        } catch (const CriticalMassError& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

nlohmann::json OptimizePovmResult::summary() const {
    nlohmann::json j;
    j["objective_kind"] =
        optimization.kind == ObjectiveKind::det_fim ? "det-fim" : "weighted-crb";
    j["objective"] = optimization.objective;
    j["iterations"] = optimization.iterations;
    j["converged"] = optimization.converged;
    j["povm"] = optimization.povm;
    return j;
}

std::string OptimizePovmResult::trace_csv() const {
    std::string out = "iteration,objective\n";
    for (const auto& [it, obj] : trace) {
        out += std::to_string(it) + ',' + format_number(obj) + '\n';
    }
    return out;
}

OptimizePovmResult run_optimize_povm(const ScenarioConfig& cfg) {
    const BlochPoint pt = make_bloch_point(cfg.k1, cfg.point_k2, cfg.mass);
    OptimizePovmResult result;
    std::vector<std::pair<int, double>>* trace = cfg.verbose ? &result.trace : nullptr;
    if (cfg.povm_choice == PovmChoice::optimize_weighted) {
        result.optimization = optimize_weighted(weight_for(cfg.weight_label, pt), pt,
                                                cfg.restarts, cfg.seed.value_or(0), trace);
    } else {
        result.optimization = optimize_det_fim(pt, cfg.restarts, cfg.seed.value_or(0), trace);
    }
    return result;
}

}  // namespace topomet
