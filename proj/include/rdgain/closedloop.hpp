#pragma once

// Closed-loop simulation by the step method: implicit Euler plant steps,
// trigger supervision after every step, kernel rescheduling at events.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rdgain/backstepping.hpp"
#include "rdgain/coefficients.hpp"
#include "rdgain/errors.hpp"
#include "rdgain/numerics.hpp"
#include "rdgain/plant.hpp"
#include "rdgain/stats.hpp"
#include "rdgain/trigger.hpp"

namespace rdgain {

enum class KernelSolver { ClosedForm, Numeric };

inline const char* to_string(KernelSolver s) noexcept {
    return s == KernelSolver::ClosedForm ? "closed-form" : "numeric";
}

struct SimConfig {
    Grid grid{51};
    double dt = 4e-4;
    double horizon = 2.0;
    PlantConfig plant;
    ReactionCoefficient coefficient = coefficients::example_coefficient();
    TriggerParams trigger;
    KernelSolver kernel_solver = KernelSolver::ClosedForm;
    KernelSolverOptions kernel_options;
    std::size_t record_stride = 5;
    // Also record |w_j| = |K_j u| and W = |w_j|^2 / 2 + m at recorded times.
    bool record_target = false;
    double blowup_factor = 1e8;

    [[nodiscard]] std::size_t steps() const {
        return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    }

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("SimConfig: dt must be positive");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("SimConfig: horizon must be positive");
        if (record_stride < 1) throw ValidationError("SimConfig: record_stride must be at least 1");
        if (!coefficient.evaluate) throw ValidationError("SimConfig: no reaction coefficient");
        if (!(blowup_factor > 1.0)) throw ValidationError("SimConfig: blowup_factor must exceed 1");
        plant.validate();
        trigger.validate();
        if (kernel_solver == KernelSolver::ClosedForm) {
            if (coefficient.name != "paper-example" || plant.c != 0.0 || plant.epsilon != 1.0 ||
                !plant.dirichlet_at_zero() || plant.actuation != Actuation::Dirichlet) {
                throw ValidationError(
                    "SimConfig: the closed-form kernel applies only to the paper-example coefficient with c = 0, "
                    "epsilon = 1, q = inf and Dirichlet actuation");
            }
        }
    }
};

struct SimResult {
    std::vector<double> times;
    std::vector<double> l2_norms;
    std::vector<double> control;
    std::vector<double> m_trace;       // dynamic mode only
    std::vector<double> target_norms;  // record_target only
    std::vector<double> lyapunov;      // record_target only
    std::vector<Event> events;
    std::optional<Profile> final_state;
    std::size_t kernel_solves = 0;
    std::size_t steps = 0;

    [[nodiscard]] std::vector<double> event_times() const {
        std::vector<double> out;
        out.reserve(events.size());
        for (const auto& e : events) out.push_back(e.t);
        return out;
    }
};

/// A run that stopped early; carries everything recorded up to the failure.
class SimulationError : public NumericalError {
public:
    SimulationError(const std::string& what, SimResult partial)
        : NumericalError(what), partial_(std::make_shared<SimResult>(std::move(partial))) {}

    [[nodiscard]] const SimResult& partial() const noexcept { return *partial_; }

private:
    std::shared_ptr<SimResult> partial_;
};

/// Per-step values handed to an optional observer after the trigger check.
struct StepInfo {
    std::size_t step = 0;
    double t = 0.0;
    const Profile* u = nullptr;
    double control = 0.0;  // input applied over the step that ended at t
    double lhs = 0.0;
    double norm_sq = 0.0;
    double m_before_reset = 0.0;
    double m = 0.0;
    bool fired = false;
};

using StepObserver = std::function<void(const StepInfo&)>;

inline Kernel make_kernel(const SimConfig& cfg, double t_j) {
    if (cfg.kernel_solver == KernelSolver::ClosedForm) {
        return solve_kernel_closed_form(coefficients::example_lambda_tilde(t_j), cfg.grid, t_j);
    }
    const auto b = sample_coefficient(cfg.coefficient, t_j, cfg.grid);
    return solve_kernel_numeric(b, cfg.plant.c, cfg.plant.epsilon, cfg.plant.q, cfg.grid, cfg.kernel_options);
}

inline SimResult run_closed_loop(const SimConfig& cfg, const Profile& u0, const StepObserver& observer = {}) {
    cfg.validate();
    require_same_grid(u0.grid(), cfg.grid, "run_closed_loop");

    const bool dynamic = cfg.trigger.mode == TriggerMode::Dynamic;
    const std::size_t n_steps = cfg.steps();
    const double u0_norm = l2_norm(u0);

    SimResult res;
    Profile u = u0;
    double t = 0.0;
    double m = 0.0;

    auto fail = [&](const std::string& why) -> SimulationError {
        res.final_state = u;
        return SimulationError(why, std::move(res));
    };

    std::optional<Kernel> K;
    std::optional<SampledCoefficient> b;
    auto reschedule = [&](double t_j) {
        try {
            K.emplace(make_kernel(cfg, t_j));
            b.emplace(sample_coefficient(cfg.coefficient, t_j, cfg.grid));
        } catch (const Error& e) {
            throw fail(std::string("kernel solve failed at t = ") + csv::format_double(t_j) + ": " + e.what());
        }
        ++res.kernel_solves;
        res.events.push_back({res.events.size(), t_j});
    };

    auto record = [&](double time, double U) {
        res.times.push_back(time);
        res.l2_norms.push_back(l2_norm(u));
        res.control.push_back(U);
        if (dynamic) res.m_trace.push_back(m);
        if (cfg.record_target) {
            const Profile w = direct_transform(*K, u);
            const double ns = inner_product(w, w);
            res.target_norms.push_back(std::sqrt(ns));
            res.lyapunov.push_back(0.5 * ns + m);
        }
    };

    reschedule(0.0);

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double U = control_value(*K, u, cfg.plant.actuation);
        if (k % cfg.record_stride == 0) record(t, U);

        try {
            u = step_plant(u, t, cfg.dt, U, cfg.coefficient, cfg.plant);
        } catch (const Error& e) {
            throw fail(std::string("plant step failed at t = ") + csv::format_double(t) + ": " + e.what());
        }
        t = static_cast<double>(k + 1) * cfg.dt;
        ++res.steps;

        const double norm = l2_norm(u);
        if (!std::isfinite(norm) || norm > cfg.blowup_factor * u0_norm) {
            throw fail("blow-up detected at t = " + csv::format_double(t) + " (|u| = " + csv::format_double(norm) +
                       ")");
        }

        const Profile e = sampling_error(cfg.coefficient, *b, t, cfg.grid);
        const TriggerQuantity tq = trigger_quantity(*K, u, pointwise_product(e, u));
        if (dynamic) m = step_dynamic_variable(m, cfg.dt, cfg.trigger, tq.lhs, tq.norm_sq);
        const bool fired = fires(cfg.trigger, tq.lhs, tq.norm_sq, m);
        if (dynamic && !fired && m < 0.0) {
            throw fail("dynamic variable became negative between events at t = " + csv::format_double(t));
        }
        const double m_before = m;
        if (fired) {
            m = 0.0;
            reschedule(t);
        }
        if (observer) observer({k + 1, t, &u, U, tq.lhs, tq.norm_sq, m_before, m, fired});
    }

    record(t, control_value(*K, u, cfg.plant.actuation));
    res.final_state = u;
    return res;
}

/// u0(x) = 2 (x - x^2).
inline Profile example_initial_condition(const Grid& grid) {
    return Profile::from_function(grid, [](double x) { return 2.0 * (x - x * x); });
}

/// u0_n(x) = sqrt(2/n) sin(sqrt(n) pi x) + sqrt(n) (x - x^2), n >= 1.
inline Profile initial_condition_family(std::size_t n, const Grid& grid) {
    if (n < 1) throw ValidationError("initial_condition_family: n starts at 1");
    const double s = std::sqrt(static_cast<double>(n));
    return Profile::from_function(grid, [s, n](double x) {
        return std::sqrt(2.0 / static_cast<double>(n)) * std::sin(s * std::numbers::pi * x) + s * (x - x * x);
    });
}

struct RunSummary {
    std::size_t member = 0;  // family index n
    std::vector<double> event_times;
    double final_norm_ratio = 0.0;
};

struct BatchStats {
    std::vector<RunSummary> runs;
    double mean_events = 0.0;              // t0 counted
    double mean_events_without_t0 = 0.0;
    EventStats pooled;                     // over every inter-execution time of every run
    double mean_of_run_means = std::numeric_limits<double>::quiet_NaN();
    double mean_of_run_cvs = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> intervals;         // pooled inter-execution times
};

class BatchError : public NumericalError {
public:
    BatchError(std::size_t member, const std::string& what) : NumericalError(what), member_(member) {}
    [[nodiscard]] std::size_t member() const noexcept { return member_; }

private:
    std::size_t member_;
};

inline BatchStats summarize_batch(std::vector<RunSummary> runs) {
    BatchStats s;
    s.runs = std::move(runs);
    double total = 0.0, sum_means = 0.0, sum_cvs = 0.0;
    std::size_t with_stats = 0;
    std::size_t events = 0;
    for (const auto& r : s.runs) {
        total += static_cast<double>(r.event_times.size());
        events += r.event_times.size();
        const auto d = inter_execution_times(r.event_times);
        s.intervals.insert(s.intervals.end(), d.begin(), d.end());
        const auto st = interval_statistics(d, r.event_times.size());
        if (st.defined) {
            sum_means += st.mean_inter_execution;
            sum_cvs += st.coefficient_of_variation;
            ++with_stats;
        }
    }
    const auto n = static_cast<double>(s.runs.size());
    s.mean_events = total / n;
    s.mean_events_without_t0 = s.mean_events - 1.0;
    s.pooled = interval_statistics(s.intervals, events);
    if (with_stats) {
        s.mean_of_run_means = sum_means / static_cast<double>(with_stats);
        s.mean_of_run_cvs = sum_cvs / static_cast<double>(with_stats);
    }
    return s;
}

/// Runs the first n_runs members of the initial-condition family on up to
/// `workers` threads. The result does not depend on the worker count.
inline BatchStats batch_run(const SimConfig& cfg, std::size_t n_runs, std::size_t workers = 1) {
    if (n_runs < 1) throw ValidationError("batch_run: n_runs must be at least 1");
    cfg.validate();
    workers = std::clamp<std::size_t>(workers, 1, n_runs);

    std::vector<RunSummary> runs(n_runs);
    std::vector<std::exception_ptr> errors(n_runs);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t a = next++; a < n_runs; a = next++) {
            try {
                const Profile u0 = initial_condition_family(a + 1, cfg.grid);
                SimConfig local = cfg;
                local.record_stride = std::max<std::size_t>(cfg.steps(), 1);
                const SimResult r = run_closed_loop(local, u0);
                runs[a].member = a + 1;
                runs[a].event_times = r.event_times();
                const double n0 = l2_norm(u0);
                runs[a].final_norm_ratio = n0 > 0.0 ? r.l2_norms.back() / n0 : 0.0;
            } catch (...) {
                errors[a] = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    for (std::size_t a = 0; a < n_runs; ++a) {
        if (!errors[a]) continue;
        try {
            std::rethrow_exception(errors[a]);
        } catch (const std::exception& e) {
            throw BatchError(a + 1, "batch run " + std::to_string(a + 1) + " failed: " + e.what());
        }
    }
    return summarize_batch(std::move(runs));
}

}  // namespace rdgain
