#pragma once

// Static and dynamic event-triggered gain schedulers.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdgain/backstepping.hpp"
#include "rdgain/csv.hpp"
#include "rdgain/errors.hpp"
#include "rdgain/numerics.hpp"
#include "rdgain/plant.hpp"

namespace rdgain {

enum class TriggerMode { Static, Dynamic };

inline const char* to_string(TriggerMode m) noexcept { return m == TriggerMode::Static ? "static" : "dynamic"; }

struct TriggerParams {
    TriggerMode mode = TriggerMode::Static;
    double R = 0.15;
    double mu = std::numbers::pi * std::numbers::pi;
    double eta = 0.0;
    double theta = 1.0;

    /// The smallest admissible filter rate, 2 mu (1 - R).
    [[nodiscard]] double default_eta() const noexcept { return 2.0 * mu * (1.0 - R); }

    void validate() const {
        if (!(R > 0.0 && R < 1.0)) throw ValidationError("TriggerParams: R must lie in (0, 1)");
        if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("TriggerParams: mu must be positive");
        if (mode == TriggerMode::Dynamic) {
            if (!(theta > 0.0)) throw ValidationError("TriggerParams: theta must be positive");
            if (!(eta >= default_eta() * (1.0 - 1e-12))) {
                throw ValidationError("TriggerParams: eta = " + csv::format_double(eta) +
                                      " is below 2 mu (1 - R) = " + csv::format_double(default_eta()));
            }
        }
    }
};

/// Smallest eigenvalue of -h'' on (0, 1) with h'(0) = q h(0) (h(0) = 0 for
/// q = +inf) and h(1) = 0 (Dirichlet actuation) or h'(1) = 0 (Neumann).
inline double principal_eigenvalue(double q, Actuation actuation) {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    if (std::isnan(q) || (std::isinf(q) && q < 0.0)) throw ValidationError("principal_eigenvalue: invalid q");
    if (std::isinf(q)) return actuation == Actuation::Dirichlet ? pi2 : pi2 / 4.0;

    // h = C + q S with C = cos(sqrt mu), S = sin(sqrt mu)/sqrt(mu) (hyperbolic
    // continuation for mu < 0). Characteristic function:
    //   Dirichlet: h(1) = C + q S;   Neumann: h'(1) = -mu S + q C.
    auto f = [&](double mu) {
        double C, S;
        if (mu > 0.0) {
            const double k = std::sqrt(mu);
            C = std::cos(k);
            S = std::sin(k) / k;
        } else if (mu < 0.0) {
            const double k = std::sqrt(-mu);
            C = std::cosh(k);
            S = std::sinh(k) / k;
        } else {
            C = 1.0;
            S = 1.0;
        }
        return actuation == Actuation::Dirichlet ? C + q * S : -mu * S + q * C;
    };

    // No eigenvalue lies below -q^2 (the half-line mode e^{qx}), none below 0 for q >= 0.
    double lo = -(q * q) - 1.0;
    if (q >= 0.0) lo = 0.0;
    const double step = 0.05;
    double flo = f(lo);
    if (flo == 0.0) return lo;
    for (int s = 0; s < 200000; ++s) {
        const double hi = lo + step;
        const double fhi = f(hi);
        if (fhi == 0.0) return hi;
        if ((flo < 0.0) != (fhi < 0.0)) {
            double a = lo, b = hi, fa = flo;
            while (b - a > 1e-10 * std::max(1.0, std::abs(a))) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        lo = hi;
        flo = fhi;
    }
    throw NumericalError("principal_eigenvalue: failed to bracket the first root");
}

/// mu = c + eps mu_1 for a plant configuration.
inline double decay_parameter(const PlantConfig& cfg) {
    return cfg.c + cfg.epsilon * principal_eigenvalue(cfg.q, cfg.actuation);
}

struct TriggerQuantity {
    double lhs = 0.0;
    double norm_sq = 0.0;
};

/// (<K u, K f>, |K u|^2) with K the direct transform.
inline TriggerQuantity trigger_quantity(const Kernel& K, const Profile& u, const Profile& f) {
    require_same_grid(u.grid(), f.grid(), "trigger_quantity");
    const Profile ku = direct_transform(K, u);
    const Profile kf = direct_transform(K, f);
    return {inner_product(ku, kf), inner_product(ku, ku)};
}

inline bool static_fires(const TriggerParams& p, double lhs, double norm_sq) noexcept {
    return lhs > p.mu * p.R * norm_sq;
}

inline bool dynamic_fires(const TriggerParams& p, double lhs, double norm_sq, double m) noexcept {
    return lhs - p.mu * p.R * norm_sq > m / p.theta;
}

inline bool fires(const TriggerParams& p, double lhs, double norm_sq, double m) noexcept {
    return p.mode == TriggerMode::Static ? static_fires(p, lhs, norm_sq) : dynamic_fires(p, lhs, norm_sq, m);
}

inline constexpr double kDynamicClampTolerance = 1e-14;

/// Implicit Euler step of  m' = -eta m + mu R |Ku|^2 - <Ku, Kf>.
inline double step_dynamic_variable(double m, double dt, const TriggerParams& p, double lhs, double norm_sq) {
    if (!(dt > 0.0)) throw ValidationError("step_dynamic_variable: dt must be positive");
    double next = (m + dt * (p.mu * p.R * norm_sq - lhs)) / (1.0 + dt * p.eta);
    if (next < 0.0 && next > -kDynamicClampTolerance) next = 0.0;
    return next;
}

/// tau = mu R / (phi G^2).
inline double min_dwell_time(double phi, double mu, double R, double G) {
    if (!(phi > 0.0) || !(mu > 0.0) || !(G > 0.0) || !(R > 0.0 && R < 1.0)) {
        throw ValidationError("min_dwell_time: arguments must be positive with R in (0, 1)");
    }
    return mu * R / (phi * G * G);
}

struct Event {
    std::size_t j = 0;
    double t = 0.0;
};

/// Scheduler state owned by one simulation loop.
struct TriggerState {
    std::size_t j = 0;
    double t_j = 0.0;
    Kernel kernel;
    std::optional<Kernel> inverse_kernel;
    double m = 0.0;
    std::vector<Event> event_log;
};

/// Columns j, t_j, inter_execution_time (empty for the first event).
inline std::string events_to_csv(const std::vector<Event>& events) {
    csv::Writer w({"j", "t_j", "inter_execution_time"});
    for (std::size_t a = 0; a < events.size(); ++a) {
        w.row(std::vector<std::string>{std::to_string(events[a].j), csv::format_double(events[a].t),
                                       a == 0 ? std::string() : csv::format_double(events[a].t - events[a - 1].t)});
    }
    return w.str();
}

}  // namespace rdgain
