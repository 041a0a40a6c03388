#pragma once

// Stability constants, the sufficient stability condition, the decay
// envelope and the stability report.

#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "rdgain/closedloop.hpp"
#include "rdgain/csv.hpp"
#include "rdgain/errors.hpp"
#include "rdgain/stats.hpp"
#include "rdgain/trigger.hpp"

namespace rdgain {

struct GBound {
    double value = 1.0;
    bool overflow = false;  // exp(4 (lambda_bar + c) / eps) is not representable
};

/// G = 1 + sqrt(((lambda_bar + c) / (4 eps)) (exp(4 (lambda_bar + c) / eps) - 1)).
inline GBound transform_bound_G_checked(double lambda_bar, double c, double epsilon) {
    if (!(epsilon > 0.0)) throw ValidationError("transform_bound_G: epsilon must be positive");
    if (!(lambda_bar >= 0.0) || !(c >= 0.0)) throw ValidationError("transform_bound_G: lambda_bar and c must be >= 0");
    const double s = lambda_bar + c;
    const double exponent = 4.0 * s / epsilon;
    if (exponent > std::log(DBL_MAX)) return {std::numeric_limits<double>::infinity(), true};
    const double value = 1.0 + std::sqrt(s / (4.0 * epsilon) * std::expm1(exponent));
    if (!std::isfinite(value)) return {std::numeric_limits<double>::infinity(), true};
    return {value, false};
}

inline double transform_bound_G(double lambda_bar, double c, double epsilon) {
    return transform_bound_G_checked(lambda_bar, c, epsilon).value;
}

/// mu^2 R (1 - R) / (G^2 ln G), the largest phi the condition admits.
inline double stability_threshold(double mu, double R, double G) {
    if (!(G > 1.0)) throw ValidationError("stability_condition: G must exceed 1 (ln G > 0)");
    if (!(R > 0.0 && R < 1.0)) throw ValidationError("stability_condition: R must lie in (0, 1)");
    if (std::isinf(G)) return 0.0;
    return mu * mu * R * (1.0 - R) / (G * G * std::log(G));
}

/// phi < mu^2 R (1 - R) / (G^2 ln G).
inline bool stability_condition(double phi, double mu, double R, double G) {
    return phi < stability_threshold(mu, R, G);
}

/// sigma = (mu^2 R (1 - R) - phi G^2 ln G) / (mu R).
inline double decay_rate_sigma(double phi, double mu, double R, double G) {
    if (!stability_condition(phi, mu, R, G)) {
        throw ValidationError("decay_rate_sigma: the stability condition does not hold");
    }
    return (mu * mu * R * (1.0 - R) - phi * G * G * std::log(G)) / (mu * R);
}

/// True iff |u(t)| <= G exp(-sigma t) |u(0)| at every recorded time.
inline bool check_decay_envelope(const SimResult& result, double G, double sigma) {
    if (result.l2_norms.empty()) return true;
    const double u0 = result.l2_norms.front();
    for (std::size_t a = 0; a < result.l2_norms.size(); ++a) {
        if (result.l2_norms[a] > G * std::exp(-sigma * result.times[a]) * u0) return false;
    }
    return true;
}

struct StabilityReport {
    double lambda_bar = 0.0;
    double c = 0.0;
    double epsilon = 1.0;
    double phi = 0.0;
    double R = 0.5;
    double mu = 0.0;
    double G = 1.0;
    bool G_overflow = false;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();  // defined iff condition_holds
    bool condition_holds = false;
    std::string note;

    [[nodiscard]] std::string to_text() const {
        std::ostringstream o;
        o << "inputs: lambda_bar = " << csv::format_double(lambda_bar) << ", c = " << csv::format_double(c)
          << ", epsilon = " << csv::format_double(epsilon) << ", phi = " << csv::format_double(phi)
          << ", R = " << csv::format_double(R) << "\n";
        o << "mu = " << csv::format_double(mu) << "\n";
        o << "G = " << csv::format_double(G) << (G_overflow ? " (exponential overflows double precision)" : "")
          << "\n";
        o << "phi threshold mu^2 R (1 - R) / (G^2 ln G) = " << csv::format_double(threshold) << "\n";
        o << "condition phi < threshold: " << (condition_holds ? "holds" : "does not hold") << "\n";
        o << "sigma = " << (condition_holds ? csv::format_double(sigma) : std::string("undefined")) << "\n";
        o << "minimal dwell time tau = " << csv::format_double(tau) << "\n";
        if (!note.empty()) o << "note: " << note << "\n";
        return o.str();
    }

    [[nodiscard]] std::string to_csv() const {
        csv::Writer w({"lambda_bar", "c", "epsilon", "phi", "R", "mu", "G", "G_overflow", "threshold", "tau", "sigma",
                       "condition_holds"});
        w.row(std::vector<std::string>{csv::format_double(lambda_bar), csv::format_double(c),
                                       csv::format_double(epsilon), csv::format_double(phi), csv::format_double(R),
                                       csv::format_double(mu), csv::format_double(G), G_overflow ? "1" : "0",
                                       csv::format_double(threshold), csv::format_double(tau),
                                       csv::format_double(sigma), condition_holds ? "1" : "0"});
        return w.str();
    }
};

inline StabilityReport stability_report(double lambda_bar, double phi, const PlantConfig& plant, double R) {
    plant.validate();
    StabilityReport r;
    r.lambda_bar = lambda_bar;
    r.c = plant.c;
    r.epsilon = plant.epsilon;
    r.phi = phi;
    r.R = R;
    r.mu = decay_parameter(plant);
    const GBound g = transform_bound_G_checked(lambda_bar, plant.c, plant.epsilon);
    r.G = g.value;
    r.G_overflow = g.overflow;
    if (g.value <= 1.0) {
        r.note = "G = 1: the condition is degenerate (ln G = 0); with phi = 0 the frozen loop decays at mu (1 - R)";
        r.condition_holds = phi == 0.0;
        if (r.condition_holds) r.sigma = r.mu * (1.0 - R);
        r.tau = phi > 0.0 ? min_dwell_time(phi, r.mu, R, g.value) : std::numeric_limits<double>::infinity();
        return r;
    }
    r.threshold = stability_threshold(r.mu, R, r.G);
    r.condition_holds = phi < r.threshold;
    if (r.condition_holds) r.sigma = decay_rate_sigma(phi, r.mu, R, r.G);
    r.tau = phi > 0.0 ? min_dwell_time(phi, r.mu, R, r.G) : std::numeric_limits<double>::infinity();
    if (!r.condition_holds) {
        r.note = "the sufficient condition fails, so no decay rate is certified";
    }
    return r;
}

}  // namespace rdgain
