#include "dqpt/run.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dqpt/ansatz.hpp"
#include "dqpt/observables.hpp"
#include "dqpt/oracle.hpp"

namespace dqpt {

namespace {

std::string fmt17(double x) {
    if (x == 0) return "0";  // avoid "-0"
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + s + "' is not a number");
    }
}

int parse_int(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + s + "' is not an integer");
    }
}

Pauli pauli_of(char c, const std::string& where) {
    switch (std::tolower(c)) {
        case 'x': return Pauli::X;
        case 'y': return Pauli::Y;
        case 'z': return Pauli::Z;
        default: throw ConfigError(where + ": unknown Pauli axis '" + std::string(1, c) + "'");
    }
}

char pauli_letter(Pauli p) {
    switch (p) {
        case Pauli::X: return 'x';
        case Pauli::Y: return 'y';
        default: return 'z';
    }
}

std::vector<CorrSpec> parse_correlators(const std::string& value, const std::string& where) {
    std::vector<CorrSpec> out;
    std::istringstream is(value);
    std::string tok;
    while (is >> tok) {
        auto parts = split(tok, ':');
        if (parts.size() != 2 || parts[0].size() != 2) {
            throw ConfigError(where + ": correlator '" + tok + "' (expected e.g. zz:1)");
        }
        CorrSpec c;
        c.a = pauli_of(parts[0][0], where);
        c.b = pauli_of(parts[0][1], where);
        c.distance = parse_int(parts[1], where);
        out.push_back(c);
    }
    return out;
}

std::vector<int> parse_sites(const std::string& s, const std::string& where) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
        int v = parse_int(trim(tok), where);
        if (v < 1) throw ConfigError(where + ": site labels are 1-based");
        out.push_back(v);
    }
    return out;
}

std::vector<MiSpec> parse_mi(const std::string& value, const std::string& where) {
    std::vector<MiSpec> out;
    std::istringstream is(value);
    std::string tok;
    while (is >> tok) {
        auto parts = split(tok, ':');
        if (parts.size() != 2) {
            throw ConfigError(where + ": MI pair '" + tok + "' (expected e.g. 1,2:3)");
        }
        MiSpec m;
        m.region_a = parse_sites(parts[0], where);
        m.region_b = parse_sites(parts[1], where);
        out.push_back(m);
    }
    return out;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value,
             const std::string& where) {
    if (key == "mode") cfg.mode = value;
    else if (key == "family") cfg.family = value;
    else if (key == "J") cfg.j = parse_double(value, where);
    else if (key == "Jxy") cfg.jxy = parse_double(value, where);
    else if (key == "Jz") cfg.jz = parse_double(value, where);
    else if (key == "hx") cfg.hx = parse_double(value, where);
    else if (key == "hz") cfg.hz = parse_double(value, where);
    else if (key == "initial_state") cfg.initial_state = value;
    else if (key == "spinor") {
        std::istringstream is(value);
        for (double& x : cfg.spinor) {
            std::string tok;
            if (!(is >> tok)) throw ConfigError(where + ": spinor needs 4 reals");
            x = parse_double(tok, where);
        }
    } else if (key == "dt") cfg.dt = parse_double(value, where);
    else if (key == "t_max") cfg.t_max = parse_double(value, where);
    else if (key == "chi_max") cfg.chi_max = parse_int(value, where);
    else if (key == "sv_threshold") cfg.sv_threshold = parse_double(value, where);
    else if (key == "trotter_order") cfg.trotter_order = parse_int(value, where);
    else if (key == "spectrum_depth") cfg.spectrum_depth = parse_int(value, where);
    else if (key == "correlators") cfg.correlators = parse_correlators(value, where);
    else if (key == "mi") cfg.mi_pairs = parse_mi(value, where);
    else if (key == "window") cfg.window = parse_double(value, where);
    else if (key == "r_p") cfg.r_p = parse_double(value, where);
    else if (key == "g_e") cfg.g_e = parse_double(value, where);
    else if (key == "ansatz_kind") cfg.ansatz_kind = value;
    else if (key == "ed_sites") cfg.ed_sites = parse_int(value, where);
    else if (key == "csv_in") cfg.csv_in = value;
    else if (key == "check") cfg.check = value == "true" || value == "1";
    else throw ConfigError(where + ": unknown key '" + key + "'");
}

std::string join_sites(const std::vector<int>& sites) {
    std::string s;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (i > 0) s += '-';
        s += std::to_string(sites[i]);
    }
    return s;
}

// config MI/correlator labels are 1-based; internal sites 0-based
std::vector<int> to_relative(const std::vector<int>& labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) out.push_back(l - 1);
    return out;
}

}  // namespace

std::string CorrSpec::column_name() const {
    return std::string("C_") + pauli_letter(a) + pauli_letter(b) + "_d" + std::to_string(distance);
}

std::string MiSpec::column_name() const {
    return "MI_" + join_sites(region_a) + "__" + join_sites(region_b);
}

SpinModel RunConfig::model() const {
    if (family == "ising") return SpinModel::ising(j, hx, hz);
    if (family == "xxz") return SpinModel::xxz(jxy, jz, hx, hz);
    throw ConfigError("family: unknown model family '" + family + "'");
}

ProductState RunConfig::initial() const {
    if (initial_state == "custom") {
        return ProductState::make(cdouble(spinor[0], spinor[1]), cdouble(spinor[2], spinor[3]));
    }
    return named_initial_state(initial_state);
}

ClassifyThresholds RunConfig::thresholds() const {
    ClassifyThresholds th;
    th.r_p = r_p;
    th.g_e = g_e;
    th.window = window;
    return th;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = path.filename().string() + ":" + std::to_string(lineno);
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
    return cfg;
}

void apply_override(RunConfig& cfg, const std::string& key_eq_value) {
    std::size_t eq = key_eq_value.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set '" + key_eq_value + "': expected key=value");
    }
    set_key(cfg, trim(key_eq_value.substr(0, eq)), trim(key_eq_value.substr(eq + 1)),
            "--set " + key_eq_value.substr(0, eq));
}

void validate_config(const RunConfig& cfg) {
    if (cfg.mode != "evolve" && cfg.mode != "ansatz" && cfg.mode != "ed" &&
        cfg.mode != "analyze") {
        throw ConfigError("mode: unknown mode '" + cfg.mode + "'");
    }
    if (!(cfg.dt > 0)) throw ConfigError("dt: must be positive");
    if (cfg.t_max < 0) throw ConfigError("t_max: must be >= 0");
    if (!(cfg.sv_threshold > 0) || !(cfg.sv_threshold < 1)) {
        throw ConfigError("sv_threshold: must lie in (0, 1)");
    }
    if (cfg.chi_max < 1) throw ConfigError("chi_max: must be >= 1");
    if (cfg.trotter_order != 1 && cfg.trotter_order != 2) {
        throw ConfigError("trotter_order: must be 1 or 2");
    }
    if (cfg.spectrum_depth < 1) throw ConfigError("spectrum_depth: must be >= 1");
    if (!(cfg.window > 0)) throw ConfigError("window: must be positive");
    cfg.model();    // resolves the family
    cfg.initial();  // resolves the state name / spinor normalization
    if (cfg.mode == "ansatz") {
        if (cfg.family != "ising") throw ConfigError("ansatz mode supports the ising family only");
        if (cfg.ansatz_kind != "auto" && cfg.ansatz_kind != "precession" &&
            cfg.ansatz_kind != "entanglement") {
            throw ConfigError("ansatz_kind: expected precession|entanglement|auto");
        }
        if (cfg.ansatz_kind == "auto" && cfg.initial_state != "down" &&
            cfg.initial_state != "right") {
            throw ConfigError("ansatz_kind: cannot infer from initial_state '" +
                              cfg.initial_state + "'");
        }
    }
    if (cfg.mode == "ed" && (cfg.ed_sites < 2 || cfg.ed_sites > 12)) {
        throw ConfigError("ed_sites: must lie in [2, 12]");
    }
    for (const auto& c : cfg.correlators) {
        if (c.distance < 1 || c.distance > 7) {
            throw ConfigError(c.column_name() + ": distance must lie in [1, 7]");
        }
    }
    for (const auto& m : cfg.mi_pairs) {
        std::vector<int> all = m.region_a;
        all.insert(all.end(), m.region_b.begin(), m.region_b.end());
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
            throw ConfigError(m.column_name() + ": regions overlap");
        }
        if (all.back() - all.front() + 1 > 8) {
            throw ConfigError(m.column_name() + ": combined span above 8 sites");
        }
    }
}

namespace {

std::vector<std::string> csv_header(const RunConfig& cfg) {
    std::vector<std::string> h = {"t", "f", "e1_re", "e1_im", "e2_re", "e2_im"};
    for (int k = 1; k <= cfg.spectrum_depth; ++k) h.push_back("lambda_" + std::to_string(k));
    h.insert(h.end(), {"S_A", "S_B", "o11_abs", "ood_abs", "sx", "sy", "sz"});
    for (const auto& c : cfg.correlators) h.push_back(c.column_name());
    for (const auto& m : cfg.mi_pairs) h.push_back(m.column_name());
    return h;
}

void write_csv_row(std::ofstream& out, const QuenchRecord& r) {
    out << fmt17(r.t) << ',' << fmt17(r.f) << ',' << fmt17(r.e1.real()) << ','
        << fmt17(r.e1.imag()) << ',' << fmt17(r.e2.real()) << ',' << fmt17(r.e2.imag());
    for (double l : r.lambdas) out << ',' << fmt17(l);
    out << ',' << fmt17(r.s_a) << ',' << fmt17(r.s_b) << ',' << fmt17(r.o11_abs) << ','
        << fmt17(r.ood_abs) << ',' << fmt17(r.sx) << ',' << fmt17(r.sy) << ',' << fmt17(r.sz);
    for (double c : r.corr) out << ',' << fmt17(c);
    for (double m : r.mi) out << ',' << fmt17(m);
    out << '\n';
}

QuenchRecord record_from_state(const RunConfig& cfg, const IMpsState& state,
                               const ProductState& v0, const FidelitySpectrum& sp) {
    QuenchRecord r;
    r.t = state.time_stamp;
    r.f = sp.f;
    r.e1 = sp.eigenvalues.size() > 0 ? sp.eigenvalues[0] : cdouble(0);
    r.e2 = sp.eigenvalues.size() > 1 ? sp.eigenvalues[1] : cdouble(0);
    r.lambdas.assign(cfg.spectrum_depth, 0.0);
    for (int k = 0; k < cfg.spectrum_depth && k < state.lambda_a.size(); ++k) {
        r.lambdas[k] = state.lambda_a[k] * state.lambda_a[k];
    }
    r.s_a = entanglement_entropy(state, Bond::A);
    r.s_b = entanglement_entropy(state, Bond::B);
    OverlapMatrix ov = overlap_decomposition(state, v0);
    r.o11_abs = ov.o11_abs;
    r.ood_abs = ov.ood_abs;
    r.sx = local_expectation(state, Pauli::X);
    r.sy = local_expectation(state, Pauli::Y);
    r.sz = local_expectation(state, Pauli::Z);
    for (const auto& c : cfg.correlators) {
        r.corr.push_back(connected_correlator(state, c.a, c.b, c.distance).real());
    }
    for (const auto& m : cfg.mi_pairs) {
        r.mi.push_back(mutual_information(state, to_relative(m.region_a),
                                          to_relative(m.region_b)));
    }
    return r;
}

std::vector<EventReport> analyze_events(const RunConfig& cfg,
                                        const std::vector<QuenchRecord>& records,
                                        const std::vector<FidelitySpectrum>& spectra) {
    std::vector<EventReport> out;
    if (spectra.size() < 3) return out;
    std::vector<DqptEvent> events = detect_dqpts(spectra);
    if (events.empty()) return out;

    std::vector<LambdaSample> lambdas;
    std::vector<OverlapSample> overlaps;
    lambdas.reserve(records.size());
    for (const auto& r : records) {
        lambdas.push_back({r.t, r.lambdas.size() > 0 ? r.lambdas[0] : 0.0,
                           r.lambdas.size() > 1 ? r.lambdas[1] : 0.0});
        overlaps.push_back({r.t, r.o11_abs});
    }
    double t0 = records.front().t, t1 = records.back().t;
    for (const auto& ev : events) {
        EventReport rep;
        rep.event = ev;
        ClassifyThresholds th = cfg.thresholds();
        // clamp the window to the available history
        th.window = std::min({th.window, ev.time - t0, t1 - ev.time});
        if (th.window > 0) {
            try {
                rep.cls = classify_dqpt(ev, lambdas, overlaps, th);
                rep.classified = true;
            } catch (const ValidationError&) {
                rep.classified = false;
            }
        }
        out.push_back(rep);
    }
    return out;
}

void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << "mode = " << cfg.mode << "\n";
    out << "family = " << cfg.family << "\n";
    if (cfg.family == "ising") {
        out << "J = " << fmt17(cfg.j) << "\n";
    } else {
        out << "Jxy = " << fmt17(cfg.jxy) << "\n";
        out << "Jz = " << fmt17(cfg.jz) << "\n";
    }
    out << "hx = " << fmt17(cfg.hx) << "\n";
    out << "hz = " << fmt17(cfg.hz) << "\n";
    out << "initial_state = " << cfg.initial_state << "\n";
    if (cfg.initial_state == "custom") {
        out << "spinor = " << fmt17(cfg.spinor[0]) << ' ' << fmt17(cfg.spinor[1]) << ' '
            << fmt17(cfg.spinor[2]) << ' ' << fmt17(cfg.spinor[3]) << "\n";
    }
    out << "dt = " << fmt17(cfg.dt) << "\n";
    out << "t_max = " << fmt17(cfg.t_max) << "\n";
    out << "chi_max = " << cfg.chi_max << "\n";
    out << "sv_threshold = " << fmt17(cfg.sv_threshold) << "\n";
    out << "trotter_order = " << cfg.trotter_order << "\n";
    out << "spectrum_depth = " << cfg.spectrum_depth << "\n";
    std::string corr;
    for (const auto& c : cfg.correlators) {
        if (!corr.empty()) corr += ' ';
        corr += std::string(1, pauli_letter(c.a)) + pauli_letter(c.b) + ":" +
                std::to_string(c.distance);
    }
    out << "correlators = " << corr << "\n";
    std::string mi;
    for (const auto& m : cfg.mi_pairs) {
        if (!mi.empty()) mi += ' ';
        std::string a, b;
        for (std::size_t i = 0; i < m.region_a.size(); ++i)
            a += (i ? "," : "") + std::to_string(m.region_a[i]);
        for (std::size_t i = 0; i < m.region_b.size(); ++i)
            b += (i ? "," : "") + std::to_string(m.region_b[i]);
        mi += a + ":" + b;
    }
    out << "mi = " << mi << "\n";
    out << "window = " << fmt17(cfg.window) << "\n";
    out << "r_p = " << fmt17(cfg.r_p) << "\n";
    out << "g_e = " << fmt17(cfg.g_e) << "\n";
    if (cfg.mode == "ansatz") out << "ansatz_kind = " << cfg.ansatz_kind << "\n";
    if (cfg.mode == "ed") out << "ed_sites = " << cfg.ed_sites << "\n";
    if (cfg.mode == "analyze") {
        out << "csv_in = " << cfg.csv_in << "\n";
        out << "check = " << (cfg.check ? "true" : "false") << "\n";
    }
}

void write_report(const RunConfig& cfg, const std::vector<QuenchRecord>& records,
                  const std::vector<EventReport>& events, Eigen::Index max_chi,
                  double max_cerr, double discarded, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["mode"] = cfg.mode;
    auto now = std::chrono::system_clock::now();
    j["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                         now.time_since_epoch()).count();
    j["model"]["family"] = cfg.family;
    if (cfg.family == "ising") {
        j["model"]["J"] = cfg.j;
    } else {
        j["model"]["Jxy"] = cfg.jxy;
        j["model"]["Jz"] = cfg.jz;
    }
    j["model"]["hx"] = cfg.hx;
    j["model"]["hz"] = cfg.hz;
    j["model"]["initial_state"] = cfg.initial_state;
    j["summary"]["rows"] = records.size();
    j["summary"]["max_chi"] = max_chi;
    j["summary"]["max_canonical_error"] = max_cerr;
    j["summary"]["total_discarded_weight"] = discarded;
    j["events"] = nlohmann::ordered_json::array();
    for (const auto& e : events) {
        nlohmann::ordered_json je;
        je["time"] = e.event.time;
        je["branch_rising"] = e.event.branch_rising;
        je["branch_falling"] = e.event.branch_falling;
        je["gap_slope"] = e.event.gap_slope;
        je["ambiguous"] = e.event.ambiguous;
        if (e.classified) {
            je["classification"]["type"] = to_string(e.cls.type);
            je["classification"]["window_used"] = e.cls.window_used;
            je["classification"]["ratio_min"] = e.cls.ratio_min;
            je["classification"]["ratio_at_event"] = e.cls.ratio_at_event;
            je["classification"]["gap_min"] = e.cls.gap_min;
            je["classification"]["gap_local_min_below"] = e.cls.gap_local_min_below;
            je["classification"]["o11_has_local_min"] = e.cls.o11_has_local_min;
            je["classification"]["o11_min"] = e.cls.o11_min;
            je["classification"]["o11_min_time"] = e.cls.o11_min_time;
        } else {
            je["classification"] = nullptr;
        }
        j["events"].push_back(je);
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    int col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    }
};

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV '" + path.string() + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV '" + path.string() + "'");
    for (auto& h : split(trim(line), ',')) t.header.push_back(trim(h));
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line, ',');
        if (cells.size() != t.header.size()) {
            throw ConfigError(path.filename().string() + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(t.header.size()) + " cells");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto& c : cells) {
            row.push_back(parse_double(trim(c), path.filename().string() + ":" +
                                                    std::to_string(lineno)));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---- mode pipelines -------------------------------------------------------

struct PipelineData {
    std::vector<QuenchRecord> records;
    std::vector<FidelitySpectrum> spectra;
    Eigen::Index max_chi = 0;
    double max_cerr = 0;
    double discarded = 0;
};

PipelineData run_evolve(const RunConfig& cfg, std::ofstream& csv) {
    PipelineData d;
    ProductState v0 = cfg.initial();
    IMpsState state0 = from_product(v0);

    EvolveOptions opt;
    opt.dt = cfg.dt;
    opt.t_max = cfg.t_max;
    opt.chi_max = cfg.chi_max;
    opt.sv_threshold = cfg.sv_threshold;
    opt.trotter_order = cfg.trotter_order;

    StepObserver observer = [&](const IMpsState& s, const StepStats& st) {
        const FidelitySpectrum* prev = d.spectra.empty() ? nullptr : &d.spectra.back();
        d.spectra.push_back(fidelity_density(s, v0, prev));
        QuenchRecord r = record_from_state(cfg, s, v0, d.spectra.back());
        d.records.push_back(r);
        write_csv_row(csv, r);
        d.max_chi = std::max({d.max_chi, st.chi_a, st.chi_b});
        d.max_cerr = std::max(d.max_cerr, st.canonical_error);
        d.discarded = s.discarded_weight;
    };
    evolve(state0, cfg.model(), opt, observer);
    return d;
}

PipelineData run_ansatz(const RunConfig& cfg, std::ofstream& csv) {
    PipelineData d;
    ProductState v0 = cfg.initial();
    std::string kind = cfg.ansatz_kind;
    if (kind == "auto") kind = cfg.initial_state == "down" ? "precession" : "entanglement";

    const int n_steps = static_cast<int>(std::ceil(cfg.t_max / cfg.dt - 1e-12));
    for (int k = 0; k <= n_steps; ++k) {
        double t = k * cfg.dt;
        IMpsState raw = kind == "precession"
                            ? precession_mpo_state(PrecessionAnsatz(cfg.j, cfg.hx, cfg.hz), t)
                            : entanglement_state(EntanglementAnsatz(cfg.j, cfg.hx, cfg.hz), t);
        IMpsState state = canonicalize(raw);
        state.time_stamp = t;
        const FidelitySpectrum* prev = d.spectra.empty() ? nullptr : &d.spectra.back();
        d.spectra.push_back(fidelity_density(state, v0, prev));
        QuenchRecord r = record_from_state(cfg, state, v0, d.spectra.back());
        d.records.push_back(r);
        write_csv_row(csv, r);
        d.max_chi = std::max({d.max_chi, state.chi_a(), state.chi_b()});
        d.max_cerr = std::max(d.max_cerr, measure_canonical_error(state).max());
    }
    return d;
}

PipelineData run_ed(const RunConfig& cfg, std::ofstream& csv) {
    PipelineData d;
    EdSystem sys = ed_make(cfg.model(), cfg.ed_sites, cfg.initial());
    const int n_steps = static_cast<int>(std::ceil(cfg.t_max / cfg.dt - 1e-12));
    for (int k = 0; k <= n_steps; ++k) {
        double t = k * cfg.dt;
        EdSystem at = ed_evolve(sys, t);
        QuenchRecord r;
        r.t = t;
        r.f = ed_rate_function(sys, t);
        r.lambdas.assign(cfg.spectrum_depth, 0.0);
        r.sx = ed_local_expectation(at, Pauli::X, 0);
        r.sy = ed_local_expectation(at, Pauli::Y, 0);
        r.sz = ed_local_expectation(at, Pauli::Z, 0);
        r.corr.assign(cfg.correlators.size(), 0.0);
        r.mi.assign(cfg.mi_pairs.size(), 0.0);
        d.records.push_back(r);
        write_csv_row(csv, r);
    }
    return d;
}

void run_check(const CsvTable& t) {
    int c_f = t.col("f");
    if (c_f < 0) throw ConfigError("analyze --check: CSV has no 'f' column");
    std::vector<int> lam_cols;
    for (int k = 1;; ++k) {
        int c = t.col("lambda_" + std::to_string(k));
        if (c < 0) break;
        lam_cols.push_back(c);
    }
    std::vector<int> mi_cols;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i].rfind("MI_", 0) == 0) mi_cols.push_back(static_cast<int>(i));
    }
    for (std::size_t rix = 0; rix < t.rows.size(); ++rix) {
        const auto& row = t.rows[rix];
        std::string where = "row " + std::to_string(rix + 1);
        if (row[c_f] < -1e-12) throw BreakdownError("--check: f < 0 at " + where);
        double sum = 0, prev = 1e300;
        for (int c : lam_cols) {
            double l = row[c];
            if (l < -1e-12) throw BreakdownError("--check: negative lambda at " + where);
            if (l > prev + 1e-12) throw BreakdownError("--check: lambdas not descending at " + where);
            prev = l;
            sum += l;
        }
        if (!lam_cols.empty()) {
            bool fully_recorded = row[lam_cols.back()] == 0.0;
            bool all_zero = sum == 0.0;  // modes without a spectrum (ed)
            if (sum > 1 + 1e-8) throw BreakdownError("--check: sum(lambda) > 1 at " + where);
            if (fully_recorded && !all_zero && std::abs(sum - 1) > 1e-8) {
                throw BreakdownError("--check: sum(lambda) != 1 at " + where);
            }
        }
        for (int c : mi_cols) {
            if (row[c] < -1e-9) throw BreakdownError("--check: negative MI at " + where);
        }
    }
}

PipelineData run_analyze(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::path in =
        cfg.csv_in.empty() ? out_dir / "timeseries.csv" : std::filesystem::path(cfg.csv_in);
    CsvTable t = read_csv(in);
    if (cfg.check) run_check(t);

    int c_t = t.col("t"), c_f = t.col("f");
    int c_e1r = t.col("e1_re"), c_e1i = t.col("e1_im");
    int c_e2r = t.col("e2_re"), c_e2i = t.col("e2_im");
    int c_l1 = t.col("lambda_1"), c_l2 = t.col("lambda_2");
    int c_o11 = t.col("o11_abs");
    for (int c : {c_t, c_f, c_e1r, c_e1i, c_e2r, c_e2i, c_l1, c_o11}) {
        if (c < 0) throw ConfigError("analyze: CSV is missing one of the required columns");
    }

    PipelineData d;
    for (const auto& row : t.rows) {
        QuenchRecord r;
        r.t = row[c_t];
        r.f = row[c_f];
        r.e1 = cdouble(row[c_e1r], row[c_e1i]);
        r.e2 = cdouble(row[c_e2r], row[c_e2i]);
        r.lambdas = {row[c_l1], c_l2 >= 0 ? row[c_l2] : 0.0};
        r.o11_abs = row[c_o11];
        d.records.push_back(r);

        std::vector<cdouble> evs;
        if (std::abs(r.e1) > 0) evs.push_back(r.e1);
        if (std::abs(r.e2) > 0) evs.push_back(r.e2);
        CVector v(static_cast<Eigen::Index>(evs.size()));
        for (std::size_t k = 0; k < evs.size(); ++k) v[static_cast<Eigen::Index>(k)] = evs[k];
        const FidelitySpectrum* prev = d.spectra.empty() ? nullptr : &d.spectra.back();
        d.spectra.push_back(match_spectrum(r.t, v, prev));
    }
    return d;
}

}  // namespace

RunOutput run(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    RunOutput out;
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        out.exit_code = 2;
        out.error = e.what();
        return out;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    out.csv_path = out_dir / "timeseries.csv";
    out.report_path = out_dir / "report.json";
    out.resolved_path = out_dir / "resolved.cfg";

    try {
        write_resolved_config(cfg, out.resolved_path);
        PipelineData d;
        if (cfg.mode == "analyze") {
            d = run_analyze(cfg, out_dir);
            out.csv_path.clear();  // analyze reads, it does not produce a CSV
        } else {
            std::ofstream csv(out.csv_path);
            if (!csv) throw ConfigError("cannot write '" + out.csv_path.string() + "'");
            auto header = csv_header(cfg);
            for (std::size_t i = 0; i < header.size(); ++i) {
                csv << (i ? "," : "") << header[i];
            }
            csv << '\n';
            try {
                if (cfg.mode == "evolve") d = run_evolve(cfg, csv);
                else if (cfg.mode == "ansatz") d = run_ansatz(cfg, csv);
                else d = run_ed(cfg, csv);
            } catch (const Error&) {
                csv << "# truncated: simulation failure\n";
                throw;
            }
        }
        out.events = analyze_events(cfg, d.records, d.spectra);
        out.records = std::move(d.records);
        out.max_chi = d.max_chi;
        out.max_canonical_error = d.max_cerr;
        write_report(cfg, out.records, out.events, d.max_chi, d.max_cerr, d.discarded,
                     out.report_path);
    } catch (const ConfigError& e) {
        out.exit_code = 2;
        out.error = e.what();
    } catch (const Error& e) {
        out.exit_code = 3;
        out.error = e.what();
    }
    return out;
}

SweepSpec parse_sweep(const std::string& param_arg, const std::string& values_arg) {
    SweepSpec spec;
    for (auto& p : split(param_arg, ',')) {
        std::string t = trim(p);
        if (t.empty()) throw ConfigError("sweep: empty parameter name");
        spec.params.push_back(t);
    }
    if (trim(values_arg).empty()) return spec;
    for (auto& tuple : split(values_arg, ',')) {
        auto parts = split(tuple, ':');
        if (parts.size() != spec.params.size()) {
            throw ConfigError("sweep: value tuple '" + tuple + "' does not match " +
                              std::to_string(spec.params.size()) + " parameter(s)");
        }
        std::vector<double> vals;
        for (auto& v : parts) vals.push_back(parse_double(trim(v), "sweep values"));
        spec.points.push_back(vals);
    }
    return spec;
}

SweepOutput sweep(const RunConfig& base, const SweepSpec& spec,
                  const std::filesystem::path& out_dir) {
    SweepOutput out;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    out.summary_path = out_dir / "summary.csv";
    out.runs.resize(spec.points.size());

    std::vector<RunConfig> cfgs;
    std::vector<std::string> labels;
    for (const auto& point : spec.points) {
        RunConfig cfg = base;
        std::string label;
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            apply_override(cfg, spec.params[i] + "=" + fmt17(point[i]));
            if (!label.empty()) label += '_';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%g", point[i]);
            label += spec.params[i] + "=" + buf;
        }
        cfgs.push_back(cfg);
        labels.push_back(label);
    }

    unsigned workers = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("DQPT_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) workers = static_cast<unsigned>(w);
    }
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfgs.size())));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cfgs.size()) return;
            out.runs[i] = run(cfgs[i], out_dir / labels[i]);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::ofstream sum(out.summary_path);
    for (std::size_t i = 0; i < spec.params.size(); ++i) sum << spec.params[i] << ',';
    sum << "status,n_events,event_times,classifications\n";
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        for (double v : spec.points[i]) sum << fmt17(v) << ',';
        const RunOutput& r = out.runs[i];
        if (r.exit_code != 0) {
            sum << "failed(" << r.exit_code << "),0,,\n";
            out.exit_code = std::max(out.exit_code, r.exit_code);
            continue;
        }
        std::string times, kinds;
        for (const auto& e : r.events) {
            if (!times.empty()) times += ';';
            if (!kinds.empty()) kinds += ';';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6g", e.event.time);
            times += buf;
            kinds += e.classified ? to_string(e.cls.type) : "unclassified";
        }
        sum << "ok," << r.events.size() << ',' << times << ',' << kinds << "\n";
    }
    return out;
}

}  // namespace dqpt
