#pragma once

// INI experiment configuration. Every key is optional; unknown sections or
// keys are rejected so typos do not silently fall back to defaults.
//
//   [grid]        n | h
//   [time]        dt (number or "h^2"), horizon, stride
//   [plant]       epsilon, q (number or "inf"), actuation (dirichlet|neumann), c
//   [coefficient] model (paper-example|constant|slow-sine|tabulated), value,
//                 amplitude, omega, spatial_amplitude, path, check
//   [trigger]     mode (static|dynamic), R, eta, theta
//   [kernel]      solver (closed-form|numeric), tol, max_iter, refine,
//                 extrapolate, sample_time
//   [initial]     profile (example|family|zero|sine), member
//   [batch]       runs, workers
//   [sweep]       variants, parameters

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdgain/closedloop.hpp"
#include "rdgain/coefficients.hpp"
#include "rdgain/csv.hpp"
#include "rdgain/errors.hpp"

namespace rdgain {

enum class InitialProfile { Example, Family, Zero, Sine };

/// One row of a table sweep: a scheduler variant.
struct SweepVariant {
    TriggerMode mode = TriggerMode::Static;
    double theta = 1.0;  // dynamic only

    [[nodiscard]] std::string label() const {
        return mode == TriggerMode::Static ? std::string("static") : "dynamic theta=" + csv::format_double(theta);
    }
};

/// One column of a table sweep: (R, eta). A missing eta means 2 mu (1 - R).
struct SweepParameters {
    double R = 0.15;
    std::optional<double> eta;

    [[nodiscard]] std::string label() const {
        std::string s = "R=" + csv::format_double(R);
        if (eta) s += " eta=" + csv::format_double(*eta);
        return s;
    }
};

struct ExperimentConfig {
    SimConfig sim;
    InitialProfile initial = InitialProfile::Example;
    std::size_t member = 1;
    std::size_t runs = 100;
    std::size_t workers = 1;
    double kernel_sample_time = 0.0;
    bool eta_given = false;
    bool check_coefficient = true;
    std::vector<SweepVariant> variants;
    std::vector<SweepParameters> parameters;

    [[nodiscard]] Profile initial_profile() const {
        switch (initial) {
            case InitialProfile::Example: return example_initial_condition(sim.grid);
            case InitialProfile::Family: return initial_condition_family(member, sim.grid);
            case InitialProfile::Zero: return Profile(sim.grid);
            case InitialProfile::Sine:
                return Profile::from_function(sim.grid, [](double x) { return std::sin(std::numbers::pi * x); });
        }
        throw ValidationError("unknown initial profile");
    }
};

namespace detail {

inline std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_number(const std::string& key, const std::string& raw) {
    const std::string v = lower(trim(raw));
    if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
        const double d = csv::parse_double(v);
        if (std::isnan(d)) throw ValidationError("");
        return d;
    } catch (const ValidationError&) {
        throw ValidationError("config: " + key + " = '" + raw + "' is not a number");
    }
}

inline std::size_t to_count(const std::string& key, const std::string& raw) {
    const double d = to_number(key, raw);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e12) {
        throw ValidationError("config: " + key + " = '" + raw + "' is not a non-negative integer");
    }
    return static_cast<std::size_t>(d);
}

inline bool to_bool(const std::string& key, const std::string& raw) {
    const std::string v = lower(trim(raw));
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ValidationError("config: " + key + " = '" + raw + "' is not a boolean");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

}  // namespace detail

/// Parses INI text. `base_dir` resolves relative paths (tabulated coefficient).
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    using detail::lower;
    using detail::to_bool;
    using detail::to_count;
    using detail::to_number;
    using detail::trim;

    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }

    const std::map<std::string, std::set<std::string>> known = {
        {"grid", {"n", "h"}},
        {"time", {"dt", "horizon", "stride"}},
        {"plant", {"epsilon", "q", "actuation", "c"}},
        {"coefficient", {"model", "value", "amplitude", "omega", "spatial_amplitude", "path", "check"}},
        {"trigger", {"mode", "r", "eta", "theta"}},
        {"kernel", {"solver", "tol", "max_iter", "refine", "extrapolate", "sample_time"}},
        {"initial", {"profile", "member"}},
        {"batch", {"runs", "workers"}},
        {"sweep", {"variants", "parameters"}},
    };
    std::map<std::string, std::map<std::string, std::string>> values;
    for (const auto& [section, body] : tree) {
        const std::string sec = lower(section);
        const auto it = known.find(sec);
        if (it == known.end()) throw ValidationError("config: unknown section [" + section + "]");
        if (body.empty() && !body.data().empty()) {
            throw ValidationError("config: key '" + section + "' outside any section");
        }
        for (const auto& [key, node] : body) {
            const std::string k = lower(key);
            if (!it->second.count(k)) throw ValidationError("config: unknown key '" + key + "' in [" + section + "]");
            values[sec][k] = trim(node.data());
        }
    }
    auto get = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
        const auto s = values.find(sec);
        if (s == values.end()) return std::nullopt;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    };
    auto number = [&](const std::string& sec, const std::string& key, double fallback) {
        const auto v = get(sec, key);
        return v ? to_number(sec + "." + key, *v) : fallback;
    };
    auto count = [&](const std::string& sec, const std::string& key, std::size_t fallback) {
        const auto v = get(sec, key);
        return v ? to_count(sec + "." + key, *v) : fallback;
    };

    ExperimentConfig cfg;
    SimConfig& sim = cfg.sim;

    if (get("grid", "n") && get("grid", "h")) throw ValidationError("config: give grid.n or grid.h, not both");
    if (const auto h = get("grid", "h")) {
        sim.grid = Grid::with_step(to_number("grid.h", *h));
    } else {
        sim.grid = Grid(count("grid", "n", 51));
    }

    const double h = sim.grid.step();
    if (const auto dt = get("time", "dt")) {
        const std::string v = lower(*dt);
        sim.dt = (v == "h^2" || v == "h2") ? h * h : to_number("time.dt", *dt);
    } else {
        sim.dt = h * h;
    }
    sim.horizon = number("time", "horizon", 2.0);
    sim.record_stride = count("time", "stride", 5);

    sim.plant.epsilon = number("plant", "epsilon", 1.0);
    sim.plant.q = number("plant", "q", std::numeric_limits<double>::infinity());
    sim.plant.c = number("plant", "c", 0.0);
    if (const auto a = get("plant", "actuation")) {
        const std::string v = lower(*a);
        if (v == "dirichlet") {
            sim.plant.actuation = Actuation::Dirichlet;
        } else if (v == "neumann") {
            sim.plant.actuation = Actuation::Neumann;
        } else {
            throw ValidationError("config: plant.actuation must be dirichlet or neumann");
        }
    }

    const std::string model = lower(get("coefficient", "model").value_or("paper-example"));
    if (model == "paper-example") {
        sim.coefficient = coefficients::example_coefficient();
    } else if (model == "constant") {
        sim.coefficient = coefficients::constant(number("coefficient", "value", 0.0));
    } else if (model == "slow-sine") {
        sim.coefficient = coefficients::slow_sine(number("coefficient", "amplitude", 0.25),
                                                  number("coefficient", "omega", 4.0),
                                                  number("coefficient", "spatial_amplitude", 0.25));
    } else if (model == "tabulated") {
        const auto p = get("coefficient", "path");
        if (!p) throw ValidationError("config: tabulated coefficient needs coefficient.path");
        std::filesystem::path path(*p);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        sim.coefficient = coefficients::tabulated_from_csv(path.string());
    } else {
        throw ValidationError("config: unknown coefficient model '" + model + "'");
    }
    if (const auto c = get("coefficient", "check")) cfg.check_coefficient = to_bool("coefficient.check", *c);

    const std::string mode = lower(get("trigger", "mode").value_or("static"));
    if (mode == "static") {
        sim.trigger.mode = TriggerMode::Static;
    } else if (mode == "dynamic") {
        sim.trigger.mode = TriggerMode::Dynamic;
    } else {
        throw ValidationError("config: trigger.mode must be static or dynamic");
    }
    sim.trigger.R = number("trigger", "r", 0.15);
    sim.trigger.theta = number("trigger", "theta", 1.0);

    if (const auto s = get("kernel", "solver")) {
        const std::string v = lower(*s);
        if (v == "closed-form") {
            sim.kernel_solver = KernelSolver::ClosedForm;
        } else if (v == "numeric") {
            sim.kernel_solver = KernelSolver::Numeric;
        } else {
            throw ValidationError("config: kernel.solver must be closed-form or numeric");
        }
    } else {
        const bool closed_form_ok = model == "paper-example" && sim.plant.c == 0.0 && sim.plant.epsilon == 1.0 &&
                                    sim.plant.dirichlet_at_zero() && sim.plant.actuation == Actuation::Dirichlet;
        sim.kernel_solver = closed_form_ok ? KernelSolver::ClosedForm : KernelSolver::Numeric;
    }
    sim.kernel_options.tol = number("kernel", "tol", 1e-10);
    sim.kernel_options.max_iter = static_cast<int>(count("kernel", "max_iter", 200));
    sim.kernel_options.refine = static_cast<int>(count("kernel", "refine", 4));
    if (const auto e = get("kernel", "extrapolate")) sim.kernel_options.extrapolate = to_bool("kernel.extrapolate", *e);
    cfg.kernel_sample_time = number("kernel", "sample_time", 0.0);

    const std::string profile = lower(get("initial", "profile").value_or("example"));
    if (profile == "example") {
        cfg.initial = InitialProfile::Example;
    } else if (profile == "family") {
        cfg.initial = InitialProfile::Family;
    } else if (profile == "zero") {
        cfg.initial = InitialProfile::Zero;
    } else if (profile == "sine") {
        cfg.initial = InitialProfile::Sine;
    } else {
        throw ValidationError("config: initial.profile must be example, family, zero or sine");
    }
    cfg.member = count("initial", "member", 1);
    if (cfg.member < 1) throw ValidationError("config: initial.member starts at 1");

    cfg.runs = count("batch", "runs", 100);
    cfg.workers = count("batch", "workers", 1);
    if (cfg.runs < 1) throw ValidationError("config: batch.runs must be at least 1");
    if (cfg.workers < 1) throw ValidationError("config: batch.workers must be at least 1");

    // mu depends on the boundary data, so eta defaults are resolved here.
    sim.plant.validate();
    sim.trigger.mu = decay_parameter(sim.plant);
    if (const auto e = get("trigger", "eta")) {
        sim.trigger.eta = to_number("trigger.eta", *e);
        cfg.eta_given = true;
    } else {
        sim.trigger.eta = sim.trigger.default_eta();
    }

    // variants = static, dynamic:100, dynamic:0.015
    if (const auto v = get("sweep", "variants")) {
        for (const auto& item : detail::split(*v, ',')) {
            const auto parts = detail::split(item, ':');
            const std::string m = lower(parts.at(0));
            SweepVariant sv;
            if (m == "static" && parts.size() == 1) {
                sv.mode = TriggerMode::Static;
            } else if (m == "dynamic" && parts.size() == 2) {
                sv.mode = TriggerMode::Dynamic;
                sv.theta = to_number("sweep.variants", parts[1]);
            } else {
                throw ValidationError("config: bad sweep variant '" + item + "' (static or dynamic:THETA)");
            }
            cfg.variants.push_back(sv);
        }
    }
    // parameters = 0.15:16.7, 0.5:9.86   (R:eta, or just R)
    if (const auto p = get("sweep", "parameters")) {
        for (const auto& item : detail::split(*p, ',')) {
            const auto parts = detail::split(item, ':');
            if (parts.empty() || parts.size() > 2) throw ValidationError("config: bad sweep parameters '" + item + "'");
            SweepParameters sp;
            sp.R = to_number("sweep.parameters", parts[0]);
            if (parts.size() == 2) sp.eta = to_number("sweep.parameters", parts[1]);
            cfg.parameters.push_back(sp);
        }
    }
    if (cfg.variants.empty()) cfg.variants.push_back({sim.trigger.mode, sim.trigger.theta});
    if (cfg.parameters.empty()) {
        cfg.parameters.push_back({sim.trigger.R, cfg.eta_given ? std::optional<double>(sim.trigger.eta) : std::nullopt});
    }

    sim.validate();
    if (cfg.check_coefficient) coefficients::validate_coefficient(sim.coefficient, sim.horizon);
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace rdgain
