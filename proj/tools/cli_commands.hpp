#pragma once

// Subcommand implementations for the rdgain tool. Each command validates its
// whole input, computes every output in memory, and only then writes files,
// so a failed run leaves the output directory untouched.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rdgain/rdgain.hpp"

namespace rdgain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path out = ".";
    std::optional<std::size_t> workers;
    std::optional<std::size_t> stride;
    // analyze overrides
    std::optional<double> lambda_bar;
    std::optional<double> phi;
    std::optional<double> R;
    std::optional<double> c;
    std::optional<double> epsilon;
    std::optional<double> q;
};

using FileSet = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline void prepare_output_dir(const std::filesystem::path& out) {
    std::error_code ec;
    if (std::filesystem::exists(out, ec) && !std::filesystem::is_directory(out, ec)) {
        throw ValidationError("output path exists and is not a directory: " + out.string());
    }
    std::filesystem::create_directories(out, ec);
    if (ec) throw ValidationError("cannot create output directory " + out.string() + ": " + ec.message());
}

inline void write_all(const std::filesystem::path& out, const FileSet& files) {
    prepare_output_dir(out);
    for (const auto& [name, text] : files) csv::write_file(out / name, text);
}

inline ExperimentConfig load(const CommandOptions& opt) {
    if (opt.config.empty()) throw ValidationError("--config is required");
    ExperimentConfig cfg = load_config(opt.config);
    if (opt.stride) {
        if (*opt.stride < 1) throw ValidationError("--stride must be at least 1");
        cfg.sim.record_stride = *opt.stride;
    }
    if (opt.workers) {
        if (*opt.workers < 1) throw ValidationError("--workers must be at least 1");
        cfg.workers = *opt.workers;
    }
    return cfg;
}

inline std::string cell_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

inline std::string file_tag(double v) {
    std::string s = csv::format_double(v);
    std::replace(s.begin(), s.end(), '.', 'p');
    std::replace(s.begin(), s.end(), '-', 'm');
    std::replace(s.begin(), s.end(), '+', '_');
    return s;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        body();
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace detail

/// Closed-loop run: norms.csv, control.csv, events.csv, m.csv (dynamic) and summary.txt.
inline FileSet run_files(const ExperimentConfig& cfg) {
    const SimConfig& sim = cfg.sim;
    const Profile u0 = cfg.initial_profile();
    SimConfig local = sim;
    local.record_target = true;
    const SimResult res = run_closed_loop(local, u0);

    const StabilityReport rep = stability_report(sim.coefficient.lambda_bar, sim.coefficient.phi, sim.plant,
                                                 sim.trigger.R);
    const bool envelope = rep.condition_holds;

    std::vector<std::string> header{"t", "l2_norm"};
    if (envelope) header.push_back("envelope");
    header.push_back("target_norm");
    header.push_back("W");
    csv::Writer norms(header);
    const double n0 = res.l2_norms.front();
    for (std::size_t a = 0; a < res.times.size(); ++a) {
        std::vector<double> row{res.times[a], res.l2_norms[a]};
        if (envelope) row.push_back(rep.G * std::exp(-rep.sigma * res.times[a]) * n0);
        row.push_back(res.target_norms[a]);
        row.push_back(res.lyapunov[a]);
        norms.row(row);
    }
    csv::Writer control({"t", "U"});
    for (std::size_t a = 0; a < res.times.size(); ++a) control.row(std::vector<double>{res.times[a], res.control[a]});

    FileSet files{{"norms.csv", norms.str()}, {"control.csv", control.str()}, {"events.csv", events_to_csv(res.events)}};
    if (sim.trigger.mode == TriggerMode::Dynamic) {
        csv::Writer m({"t", "m"});
        for (std::size_t a = 0; a < res.times.size(); ++a) m.row(std::vector<double>{res.times[a], res.m_trace[a]});
        files.emplace_back("m.csv", m.str());
    }

    const auto ev = res.event_times();
    const EventStats st = event_statistics(ev);
    std::ostringstream s;
    s << "mode: " << to_string(sim.trigger.mode) << ", R = " << csv::format_double(sim.trigger.R);
    if (sim.trigger.mode == TriggerMode::Dynamic) {
        s << ", eta = " << csv::format_double(sim.trigger.eta) << ", theta = " << csv::format_double(sim.trigger.theta);
    }
    s << "\nkernel solver: " << to_string(sim.kernel_solver) << "\n";
    s << "steps: " << res.steps << ", kernel solves: " << res.kernel_solves << "\n";
    s << "events (t0 counted): " << ev.size() << ", without t0: " << (ev.empty() ? 0 : ev.size() - 1) << "\n";
    if (st.defined) {
        s << "mean inter-execution time: " << csv::format_double(st.mean_inter_execution)
          << ", CV (population): " << csv::format_double(st.coefficient_of_variation)
          << ", CV (sample): " << csv::format_double(st.sample_coefficient_of_variation) << "\n";
    }
    s << "final norm ratio |u(T)|/|u(0)|: " << csv::format_double(n0 > 0.0 ? res.l2_norms.back() / n0 : 0.0) << "\n";
    files.emplace_back("summary.txt", s.str());
    return files;
}

inline int cmd_run(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        const ExperimentConfig cfg = detail::load(opt);
        const FileSet files = run_files(cfg);
        detail::write_all(opt.out, files);
        out << "wrote " << files.size() << " files to " << opt.out.string() << "\n";
    });
}

struct CellResult {
    SweepVariant variant;
    SweepParameters parameters;
    double eta = 0.0;
    std::optional<BatchStats> stats;
    std::string error;

    [[nodiscard]] std::string file_name() const {
        std::string s = "batch_" + std::string(to_string(variant.mode)) + "_R" + detail::file_tag(parameters.R) +
                        "_eta" + detail::file_tag(eta);
        if (variant.mode == TriggerMode::Dynamic) s += "_theta" + detail::file_tag(variant.theta);
        return s + ".csv";
    }
};

/// Log-spaced histogram of positive samples: bin_lower, bin_upper, count, density.
inline std::string histogram_csv(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                                 std::size_t bins = 30) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [name, v] : groups) {
        for (double d : v) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    csv::Writer w({"cell", "bin_lower", "bin_upper", "count", "density"});
    if (!(hi > 0.0) || !std::isfinite(lo)) return w.str();
    if (hi <= lo) hi = lo * 1.01;
    const double a = std::log(lo), b = std::log(hi);
    for (const auto& [name, v] : groups) {
        std::vector<std::size_t> counts(bins, 0);
        for (double d : v) {
            auto k = static_cast<std::size_t>((std::log(d) - a) / (b - a) * static_cast<double>(bins));
            counts[std::min(k, bins - 1)]++;
        }
        for (std::size_t k = 0; k < bins; ++k) {
            const double l = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(bins));
            const double u = std::exp(a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(bins));
            const double density =
                v.empty() ? 0.0 : static_cast<double>(counts[k]) / (static_cast<double>(v.size()) * (u - l));
            w.row(std::vector<std::string>{name, csv::format_double(l), csv::format_double(u),
                                           std::to_string(counts[k]), csv::format_double(density)});
        }
    }
    return w.str();
}

inline std::vector<CellResult> run_sweep(const ExperimentConfig& cfg) {
    std::vector<CellResult> cells;
    for (const auto& v : cfg.variants) {
        for (const auto& p : cfg.parameters) {
            CellResult cell;
            cell.variant = v;
            cell.parameters = p;
            SimConfig sim = cfg.sim;
            sim.trigger.mode = v.mode;
            sim.trigger.theta = v.theta;
            sim.trigger.R = p.R;
            sim.trigger.eta = p.eta ? *p.eta : sim.trigger.default_eta();
            cell.eta = sim.trigger.eta;
            try {
                cell.stats = batch_run(sim, cfg.runs, cfg.workers);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

/// Tables of mean event count, mean inter-execution time and CV; rows are
/// scheduler variants, columns parameter sets.
inline FileSet tables_files(const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
    std::vector<std::string> header{"scheduler"};
    for (const auto& p : cfg.parameters) header.push_back(p.label());

    auto table = [&](auto value) {
        csv::Writer w(header);
        std::size_t idx = 0;
        for (const auto& v : cfg.variants) {
            std::vector<std::string> row{v.label()};
            for (std::size_t c = 0; c < cfg.parameters.size(); ++c, ++idx) {
                const auto& cell = cells[idx];
                row.push_back(cell.stats ? csv::format_double(value(*cell.stats)) : std::string("ERROR"));
            }
            w.row(row);
        }
        return w.str();
    };

    FileSet files;
    files.emplace_back("table1_event_count.csv", table([](const BatchStats& s) { return s.mean_events; }));
    files.emplace_back("table1_event_count_without_t0.csv",
                       table([](const BatchStats& s) { return s.mean_events_without_t0; }));
    files.emplace_back("table2_mean_inter_execution.csv",
                       table([](const BatchStats& s) { return s.pooled.mean_inter_execution; }));
    files.emplace_back("table3_cv.csv", table([](const BatchStats& s) { return s.pooled.coefficient_of_variation; }));

    csv::Writer summary({"scheduler", "R", "eta", "theta", "runs", "mean_events", "mean_events_without_t0",
                         "pooled_mean_inter_execution", "pooled_cv", "pooled_sample_cv", "mean_of_run_means",
                         "mean_of_run_cvs", "error"});
    std::vector<std::pair<std::string, std::vector<double>>> hist;
    for (const auto& cell : cells) {
        const auto f = [](double v) { return csv::format_double(v); };
        std::vector<std::string> row{to_string(cell.variant.mode), f(cell.parameters.R), f(cell.eta),
                                     cell.variant.mode == TriggerMode::Dynamic ? f(cell.variant.theta) : ""};
        if (cell.stats) {
            const auto& s = *cell.stats;
            row.insert(row.end(), {std::to_string(s.runs.size()), f(s.mean_events), f(s.mean_events_without_t0),
                                   f(s.pooled.mean_inter_execution), f(s.pooled.coefficient_of_variation),
                                   f(s.pooled.sample_coefficient_of_variation), f(s.mean_of_run_means),
                                   f(s.mean_of_run_cvs), ""});
            csv::Writer runs({"member", "events", "events_without_t0", "mean_inter_execution", "cv",
                              "final_norm_ratio"});
            for (const auto& r : s.runs) {
                const auto st = event_statistics(r.event_times);
                runs.row(std::vector<std::string>{std::to_string(r.member), std::to_string(r.event_times.size()),
                                                  std::to_string(r.event_times.size() - 1),
                                                  f(st.mean_inter_execution), f(st.coefficient_of_variation),
                                                  f(r.final_norm_ratio)});
            }
            files.emplace_back(cell.file_name(), runs.str());
            hist.emplace_back(cell.variant.label() + " " + cell.parameters.label(), s.intervals);
        } else {
            row.insert(row.end(), {"", "", "", "", "", "", "", "", detail::cell_safe(cell.error)});
        }
        summary.row(row);
    }
    files.emplace_back("cells.csv", summary.str());
    files.emplace_back("histogram.csv", histogram_csv(hist));
    return files;
}

inline int cmd_tables(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        const ExperimentConfig cfg = detail::load(opt);
        const auto cells = run_sweep(cfg);
        const FileSet files = tables_files(cfg, cells);
        detail::write_all(opt.out, files);
        std::size_t failed = 0;
        for (const auto& c : cells) {
            if (!c.stats) {
                ++failed;
                err << "cell " << c.variant.label() << " " << c.parameters.label() << " failed: " << c.error << "\n";
            }
        }
        out << "wrote " << files.size() << " files to " << opt.out.string() << " (" << cells.size() << " cells, "
            << failed << " failed)\n";
    });
}

/// Direct and inverse kernels at the configured sample time plus a report.
inline FileSet kernel_files(const ExperimentConfig& cfg) {
    const SimConfig& sim = cfg.sim;
    const double t = cfg.kernel_sample_time;
    if (!(t >= 0.0)) throw ValidationError("kernel.sample_time must be >= 0");
    const auto b = sample_coefficient(sim.coefficient, t, sim.grid);
    const auto t0 = std::chrono::steady_clock::now();
    const Kernel K = solve_kernel_numeric(b, sim.plant.c, sim.plant.epsilon, sim.plant.q, sim.grid, sim.kernel_options);
    const auto t1 = std::chrono::steady_clock::now();
    const Kernel L = solve_inverse_kernel(b, sim.plant.c, sim.plant.epsilon, sim.plant.q, sim.grid, sim.kernel_options);

    const auto target = kernel_trace_target(b, sim.plant.c, sim.plant.epsilon);
    double trace_residual = 0.0;
    for (std::size_t i = 0; i < sim.grid.size(); ++i) trace_residual = std::max(trace_residual, std::abs(K(i, i) - target[i]));

    std::ostringstream r;
    r << "coefficient: " << sim.coefficient.name << ", sample time " << csv::format_double(t) << "\n";
    r << "grid nodes: " << sim.grid.size() << ", tol = " << csv::format_double(sim.kernel_options.tol)
      << ", max_iter = " << sim.kernel_options.max_iter << "\n";
    r << "direct kernel: iterations " << K.diagnostics().iterations << ", final increment "
      << csv::format_double(K.diagnostics().final_increment) << ", solve time "
      << csv::format_double(std::chrono::duration<double>(t1 - t0).count()) << " s\n";
    r << "inverse kernel: iterations " << L.diagnostics().iterations << ", final increment "
      << csv::format_double(L.diagnostics().final_increment) << "\n";
    r << "trace condition residual: " << csv::format_double(trace_residual) << "\n";
    r << "PDE residual (divided differences): " << csv::format_double(kernel_pde_residual(K)) << "\n";
    r << "max |K|: " << csv::format_double(K.max_abs()) << ", transform bound: "
      << csv::format_double(transform_bound(K)) << "\n";
    const bool closed_form_applies = sim.coefficient.name == "paper-example" && sim.plant.c == 0.0 &&
                                     sim.plant.epsilon == 1.0 && sim.plant.dirichlet_at_zero();
    if (closed_form_applies) {
        const Kernel C = solve_kernel_closed_form(coefficients::example_lambda_tilde(t), sim.grid, t);
        const double d = K.distance(C);
        r << "closed-form lambda~ = " << csv::format_double(coefficients::example_lambda_tilde(t))
          << ": sup-norm difference " << csv::format_double(d) << ", relative "
          << csv::format_double(d / std::max(C.max_abs(), 1e-300)) << "\n";
    }
    r << "increments:";
    for (double v : K.diagnostics().increments) r << " " << csv::format_double(v);
    r << "\n";

    csv::Writer trace({"y", "Kx_1_y"});
    for (std::size_t k = 0; k < sim.grid.size(); ++k) {
        trace.row(std::vector<double>{sim.grid.x(k), K.x_derivative_trace()[k]});
    }
    return {{"kernel.csv", K.to_csv()},
            {"inverse_kernel.csv", L.to_csv()},
            {"kernel_x_derivative.csv", trace.str()},
            {"kernel_report.txt", r.str()}};
}

inline int cmd_kernel(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        const ExperimentConfig cfg = detail::load(opt);
        const FileSet files = kernel_files(cfg);
        detail::write_all(opt.out, files);
        out << files.back().second;
    });
}

/// Stability report from a config, command-line overrides, or both.
inline StabilityReport analyze_report(const CommandOptions& opt) {
    double lambda_bar = 0.0, phi = 0.0, R = 0.5;
    PlantConfig plant;
    if (!opt.config.empty()) {
        const ExperimentConfig cfg = detail::load(opt);
        lambda_bar = cfg.sim.coefficient.lambda_bar;
        phi = cfg.sim.coefficient.phi;
        R = cfg.sim.trigger.R;
        plant = cfg.sim.plant;
    } else if (!opt.lambda_bar || !opt.phi || !opt.R) {
        throw ValidationError("analyze needs --config or all of --lambda-bar, --phi and --R");
    }
    if (opt.lambda_bar) lambda_bar = *opt.lambda_bar;
    if (opt.phi) phi = *opt.phi;
    if (opt.R) R = *opt.R;
    if (opt.c) plant.c = *opt.c;
    if (opt.epsilon) plant.epsilon = *opt.epsilon;
    if (opt.q) plant.q = *opt.q;
    if (!(phi >= 0.0)) throw ValidationError("phi must be >= 0");
    if (!(R > 0.0 && R < 1.0)) throw ValidationError("R must lie in (0, 1)");
    return stability_report(lambda_bar, phi, plant, R);
}

inline int cmd_analyze(const CommandOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        const StabilityReport rep = analyze_report(opt);
        detail::write_all(opt.out, {{"stability.csv", rep.to_csv()}, {"stability.txt", rep.to_text()}});
        out << rep.to_text();
    });
}

}  // namespace rdgain::cli
