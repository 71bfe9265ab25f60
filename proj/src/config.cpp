#include "dicke/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace dicke {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::optional<std::string> parse_double(const std::string& v, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(v, &pos);
        if (pos != v.size()) return "not a number: '" + v + "'";
    } catch (...) {
        return "not a number: '" + v + "'";
    }
    return std::nullopt;
}

std::optional<std::string> parse_int(const std::string& v, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(v, &pos);
        if (pos != v.size()) return "not an integer: '" + v + "'";
    } catch (...) {
        return "not an integer: '" + v + "'";
    }
    return std::nullopt;
}

std::optional<std::string> parse_u64(const std::string& v, std::uint64_t& out) {
    try {
        std::size_t pos = 0;
        out = std::stoull(v, &pos);
        if (pos != v.size()) return "not an unsigned integer: '" + v + "'";
    } catch (...) {
        return "not an unsigned integer: '" + v + "'";
    }
    return std::nullopt;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

using Setter = std::function<std::optional<std::string>(RunConfig&, const std::string&)>;

Setter set_double(double RunConfig::* field) {
    return [field](RunConfig& c, const std::string& v) -> std::optional<std::string> {
        double x = 0;
        if (auto err = parse_double(v, x)) return err;
        c.*field = x;
        return std::nullopt;
    };
}

Setter set_int(int RunConfig::* field) {
    return [field](RunConfig& c, const std::string& v) -> std::optional<std::string> {
        long long x = 0;
        if (auto err = parse_int(v, x)) return err;
        c.*field = static_cast<int>(x);
        return std::nullopt;
    };
}

const std::map<std::string, Setter>& setter_table() {
    static const std::map<std::string, Setter> table = {
        {"model.N",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             long long x = 0;
             if (auto err = parse_int(v, x)) return err;
             c.model.N = static_cast<int>(x);
             return std::nullopt;
         }},
        {"model.omega_a",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             double x = 0;
             if (auto err = parse_double(v, x)) return err;
             c.model.omega_a = x;
             return std::nullopt;
         }},
        {"model.omega_c",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             double x = 0;
             if (auto err = parse_double(v, x)) return err;
             c.model.omega_c = x;
             return std::nullopt;
         }},
        {"model.kappa",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             double x = 0;
             if (auto err = parse_double(v, x)) return err;
             c.model.kappa = x;
             return std::nullopt;
         }},
        {"model.g_plus",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             double x = 0;
             if (auto err = parse_double(v, x)) return err;
             c.model.g_plus = x;
             return std::nullopt;
         }},
        {"model.g_minus",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             double x = 0;
             if (auto err = parse_double(v, x)) return err;
             c.model.g_minus = x;
             return std::nullopt;
         }},
        {"solver",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             if (v == "exact") c.solver = SolverKind::Exact;
             else if (v == "meanfield") c.solver = SolverKind::MeanField;
             else if (v == "cumulant") c.solver = SolverKind::Cumulant;
             else if (v == "hops") c.solver = SolverKind::Hops;
             else return "unknown solver '" + v + "' (exact|meanfield|cumulant|hops)";
             return std::nullopt;
         }},
        {"initial.kind",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             if (v == "coherent") c.initial_kind = InitialKind::Coherent;
             else if (v == "dicke") c.initial_kind = InitialKind::Dicke;
             else if (v == "normal") c.initial_kind = InitialKind::Normal;
             else if (v == "superradiant") c.initial_kind = InitialKind::Superradiant;
             else return "unknown initial state '" + v + "'";
             return std::nullopt;
         }},
        {"initial.theta", set_double(&RunConfig::initial_theta)},
        {"initial.phi", set_double(&RunConfig::initial_phi)},
        {"initial.m", set_double(&RunConfig::initial_m)},
        {"time.t_end", set_double(&RunConfig::t_end)},
        {"time.dt", set_double(&RunConfig::dt)},
        {"time.sample_stride", set_int(&RunConfig::sample_stride)},
        {"exact.n_fock", set_int(&RunConfig::exact_n_fock)},
        {"exact.top_tol", set_double(&RunConfig::exact_top_tol)},
        {"hops.fock_levels", set_int(&RunConfig::hops_fock_levels)},
        {"hops.fock_cap", set_int(&RunConfig::hops_fock_cap)},
        {"hops.fock_tol", set_double(&RunConfig::hops_fock_tol)},
        {"hops.window_tol", set_double(&RunConfig::hops_window_tol)},
        {"hops.window_pad", set_int(&RunConfig::hops_window_pad)},
        {"hops.noise_oversample", set_int(&RunConfig::hops_noise_oversample)},
        {"hops.n_traj", set_int(&RunConfig::hops_n_traj)},
        {"hops.dim_cap",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             long long x = 0;
             if (auto err = parse_int(v, x)) return err;
             c.hops_dim_cap = x;
             return std::nullopt;
         }},
        {"observables",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             c.observables = split_list(v);
             return std::nullopt;
         }},
        {"output.dir",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             c.output_dir = v;
             return std::nullopt;
         }},
        {"seed",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             return parse_u64(v, c.seed);
         }},
        {"workers", set_int(&RunConfig::workers)},
        {"store_trajectories",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             if (v == "true" || v == "1") c.store_trajectories = true;
             else if (v == "false" || v == "0") c.store_trajectories = false;
             else return "not a boolean: '" + v + "'";
             return std::nullopt;
         }},
        {"phase.g_minus_min", set_double(&RunConfig::phase_g_minus_min)},
        {"phase.g_minus_max", set_double(&RunConfig::phase_g_minus_max)},
        {"phase.g_minus_steps", set_int(&RunConfig::phase_g_minus_steps)},
        {"phase.g_plus_min", set_double(&RunConfig::phase_g_plus_min)},
        {"phase.g_plus_max", set_double(&RunConfig::phase_g_plus_max)},
        {"phase.g_plus_steps", set_int(&RunConfig::phase_g_plus_steps)},
        {"rates.n_list",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             std::vector<int> ns;
             for (const auto& item : split_list(v)) {
                 long long x = 0;
                 if (auto err = parse_int(item, x)) return err;
                 ns.push_back(static_cast<int>(x));
             }
             if (ns.empty()) return std::string("rates.n_list must not be empty");
             c.rates_n_list = std::move(ns);
             return std::nullopt;
         }},
        {"rates.s_list",
         [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
             std::vector<double> ss;
             for (const auto& item : split_list(v)) {
                 double x = 0;
                 if (auto err = parse_double(item, x)) return err;
                 ss.push_back(x);
             }
             if (ss.empty()) return std::string("rates.s_list must not be empty");
             c.rates_s_list = std::move(ss);
             return std::nullopt;
         }},
        {"rates.n_traj", set_int(&RunConfig::rates_n_traj)},
        {"rates.t_end", set_double(&RunConfig::rates_t_end)},
        {"rates.window_time", set_double(&RunConfig::rates_window_time)},
        {"rates.scan_min", set_double(&RunConfig::rates_scan_min)},
        {"rates.scan_max", set_double(&RunConfig::rates_scan_max)},
        {"qfunc.time", set_double(&RunConfig::qfunc_time)},
        {"qfunc.n_theta", set_int(&RunConfig::qfunc_n_theta)},
        {"qfunc.n_phi", set_int(&RunConfig::qfunc_n_phi)},
    };
    return table;
}

void validate_into(const RunConfig& c, std::vector<ConfigIssue>& errors) {
    auto fail = [&errors](const std::string& msg) { errors.push_back({0, msg}); };
    if (c.model.N < 1) fail("model.N must be >= 1");
    if (c.model.kappa < 0) fail("model.kappa must be >= 0");
    if (c.model.g_plus < 0) fail("model.g_plus must be >= 0");
    if (c.model.g_minus < 0) fail("model.g_minus must be >= 0");
    if (c.t_end <= 0) fail("time.t_end must be > 0");
    if (c.dt <= 0) fail("time.dt must be > 0");
    if (c.sample_stride < 1) fail("time.sample_stride must be >= 1");
    if (c.exact_n_fock < 2) fail("exact.n_fock must be >= 2");
    if (c.hops_fock_levels < 2) fail("hops.fock_levels must be >= 2");
    if (!(c.hops_fock_tol > 0 && c.hops_fock_tol < 1))
        fail("hops.fock_tol must be in (0, 1)");
    if (!(c.hops_window_tol > 0 && c.hops_window_tol < 1))
        fail("hops.window_tol must be in (0, 1)");
    if (c.hops_n_traj < 1) fail("hops.n_traj must be >= 1");
    if (c.hops_noise_oversample < 1) fail("hops.noise_oversample must be >= 1");
    if (c.workers < 0) fail("workers must be >= 0");
    if (c.initial_kind == InitialKind::Dicke) {
        const double tm = 2.0 * c.initial_m;
        if (std::abs(tm - std::round(tm)) > 1e-9) fail("initial.m must be a half-integer");
        if (std::abs(c.initial_m) > 0.5 * c.model.N + 1e-9)
            fail("initial.m out of range for model.N");
    }
    if (c.qfunc_n_theta < 2 || c.qfunc_n_phi < 2) fail("qfunc grid must be at least 2x2");
    if (c.phase_g_minus_steps < 1 || c.phase_g_plus_steps < 1)
        fail("phase grid steps must be >= 1");
    if (c.rates_n_traj < 2) fail("rates.n_traj must be >= 2");
}

}  // namespace

std::string to_string(SolverKind s) {
    switch (s) {
        case SolverKind::Exact: return "exact";
        case SolverKind::MeanField: return "meanfield";
        case SolverKind::Cumulant: return "cumulant";
        case SolverKind::Hops: return "hops";
    }
    return "unknown";
}

std::string to_string(InitialKind k) {
    switch (k) {
        case InitialKind::Coherent: return "coherent";
        case InitialKind::Dicke: return "dicke";
        case InitialKind::Normal: return "normal";
        case InitialKind::Superradiant: return "superradiant";
    }
    return "unknown";
}

std::string RunConfig::serialize_physics() const {
    std::istringstream in(serialize());
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("output.dir", 0) == 0 || line.rfind("workers", 0) == 0) continue;
        out << line << "\n";
    }
    return out.str();
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "model.N = " << model.N << "\n";
    out << "model.omega_a = " << g17(model.omega_a) << "\n";
    out << "model.omega_c = " << g17(model.omega_c) << "\n";
    out << "model.kappa = " << g17(model.kappa) << "\n";
    out << "model.g_plus = " << g17(model.g_plus) << "\n";
    out << "model.g_minus = " << g17(model.g_minus) << "\n";
    out << "solver = " << to_string(solver) << "\n";
    out << "initial.kind = " << to_string(initial_kind) << "\n";
    out << "initial.theta = " << g17(initial_theta) << "\n";
    out << "initial.phi = " << g17(initial_phi) << "\n";
    out << "initial.m = " << g17(initial_m) << "\n";
    out << "time.t_end = " << g17(t_end) << "\n";
    out << "time.dt = " << g17(dt) << "\n";
    out << "time.sample_stride = " << sample_stride << "\n";
    out << "exact.n_fock = " << exact_n_fock << "\n";
    out << "exact.top_tol = " << g17(exact_top_tol) << "\n";
    out << "hops.fock_levels = " << hops_fock_levels << "\n";
    out << "hops.fock_cap = " << hops_fock_cap << "\n";
    out << "hops.fock_tol = " << g17(hops_fock_tol) << "\n";
    out << "hops.window_tol = " << g17(hops_window_tol) << "\n";
    out << "hops.window_pad = " << hops_window_pad << "\n";
    out << "hops.noise_oversample = " << hops_noise_oversample << "\n";
    out << "hops.n_traj = " << hops_n_traj << "\n";
    out << "hops.dim_cap = " << hops_dim_cap << "\n";
    if (!observables.empty()) {
        out << "observables = ";
        for (std::size_t i = 0; i < observables.size(); ++i) {
            if (i) out << ",";
            out << observables[i];
        }
        out << "\n";
    }
    out << "output.dir = " << output_dir << "\n";
    out << "seed = " << seed << "\n";
    out << "workers = " << workers << "\n";
    out << "store_trajectories = " << (store_trajectories ? "true" : "false") << "\n";
    out << "phase.g_minus_min = " << g17(phase_g_minus_min) << "\n";
    out << "phase.g_minus_max = " << g17(phase_g_minus_max) << "\n";
    out << "phase.g_minus_steps = " << phase_g_minus_steps << "\n";
    out << "phase.g_plus_min = " << g17(phase_g_plus_min) << "\n";
    out << "phase.g_plus_max = " << g17(phase_g_plus_max) << "\n";
    out << "phase.g_plus_steps = " << phase_g_plus_steps << "\n";
    out << "rates.n_list = ";
    for (std::size_t i = 0; i < rates_n_list.size(); ++i) {
        if (i) out << ",";
        out << rates_n_list[i];
    }
    out << "\n";
    out << "rates.s_list = ";
    for (std::size_t i = 0; i < rates_s_list.size(); ++i) {
        if (i) out << ",";
        out << g17(rates_s_list[i]);
    }
    out << "\n";
    out << "rates.n_traj = " << rates_n_traj << "\n";
    out << "rates.t_end = " << g17(rates_t_end) << "\n";
    out << "rates.window_time = " << g17(rates_window_time) << "\n";
    out << "rates.scan_min = " << g17(rates_scan_min) << "\n";
    out << "rates.scan_max = " << g17(rates_scan_max) << "\n";
    out << "qfunc.time = " << g17(qfunc_time) << "\n";
    out << "qfunc.n_theta = " << qfunc_n_theta << "\n";
    out << "qfunc.n_phi = " << qfunc_n_phi << "\n";
    return out.str();
}

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    RunConfig cfg;
    std::vector<ConfigIssue>& errors = result.errors;
    std::map<std::string, int> seen;  // key -> first line
    bool saw_n = false, saw_solver = false;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({line_no, "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            errors.push_back({line_no, "empty key"});
            continue;
        }
        auto it = setter_table().find(key);
        if (it == setter_table().end()) {
            errors.push_back({line_no, "unknown key '" + key + "'"});
            continue;
        }
        auto prev = seen.find(key);
        if (prev != seen.end()) {
            errors.push_back({line_no, "duplicate key '" + key + "' (first on line " +
                                           std::to_string(prev->second) + ")"});
            continue;
        }
        seen[key] = line_no;
        if (auto err = it->second(cfg, value)) {
            errors.push_back({line_no, key + ": " + *err});
            continue;
        }
        if (key == "model.N") saw_n = true;
        if (key == "solver") saw_solver = true;
    }
    if (!saw_n) errors.push_back({0, "missing required key 'model.N'"});
    if (!saw_solver) errors.push_back({0, "missing required key 'solver'"});
    validate_into(cfg, errors);
    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

std::optional<std::string> apply_override(RunConfig& cfg, const std::string& key,
                                          const std::string& value) {
    auto it = setter_table().find(trim(key));
    if (it == setter_table().end()) return "unknown key '" + key + "'";
    if (auto err = it->second(cfg, trim(value))) return key + ": " + *err;
    std::vector<ConfigIssue> errors;
    validate_into(cfg, errors);
    if (!errors.empty()) return errors.front().message;
    return std::nullopt;
}

}  // namespace dicke
