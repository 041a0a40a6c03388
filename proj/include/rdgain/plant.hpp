#pragma once

// Reaction-diffusion plant  u_t = eps u_xx + lambda(t, x) u  on (0, 1) with
// u_x(t,0) = q u(t,0) (Dirichlet when q = +inf) and boundary actuation at x = 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rdgain/errors.hpp"
#include "rdgain/numerics.hpp"

namespace rdgain {

enum class Actuation { Dirichlet, Neumann };

inline const char* to_string(Actuation a) noexcept {
    return a == Actuation::Dirichlet ? "dirichlet" : "neumann";
}

/// lambda(t, x) together with its declared uniform bound and Lipschitz-in-time constant.
struct ReactionCoefficient {
    std::string name;
    std::function<double(double, double)> evaluate;
    double lambda_bar = 0.0;
    double phi = 0.0;

    double operator()(double t, double x) const { return evaluate(t, x); }
};

/// b_j(x) = lambda(t_j, x). Holds the grid samples and, when available, the
/// coefficient itself so kernel solvers can refine below the grid spacing.
class SampledCoefficient {
public:
    SampledCoefficient(Profile values, double sample_time, std::function<double(double)> shape = {})
        : values_(std::move(values)), sample_time_(sample_time), shape_(std::move(shape)) {
        if (!(sample_time_ >= 0.0) || !std::isfinite(sample_time_)) {
            throw ValidationError("SampledCoefficient: sample time must be finite and >= 0");
        }
    }

    [[nodiscard]] const Profile& values() const noexcept { return values_; }
    [[nodiscard]] double sample_time() const noexcept { return sample_time_; }
    [[nodiscard]] const Grid& grid() const noexcept { return values_.grid(); }
    [[nodiscard]] bool has_shape() const noexcept { return static_cast<bool>(shape_); }

    /// b(x) for any x in [0, 1]; local cubic interpolation of the samples when
    /// no analytic shape is attached.
    [[nodiscard]] double operator()(double x) const {
        if (shape_) return shape_(x);
        return interpolate(x);
    }

private:
    double interpolate(double x) const {
        const std::size_t n = values_.size();
        const double h = values_.grid().step();
        const double s = std::clamp(x, 0.0, 1.0) / h;
        auto i = static_cast<std::ptrdiff_t>(std::floor(s));
        i = std::clamp<std::ptrdiff_t>(i - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
        double result = 0.0;
        for (std::ptrdiff_t a = 0; a < 4; ++a) {
            double basis = 1.0;
            for (std::ptrdiff_t b = 0; b < 4; ++b) {
                if (a == b) continue;
                basis *= (s - static_cast<double>(i + b)) / static_cast<double>(a - b);
            }
            result += basis * values_[static_cast<std::size_t>(i + a)];
        }
        return result;
    }

    Profile values_;
    double sample_time_;
    std::function<double(double)> shape_;
};

struct PlantConfig {
    double epsilon = 1.0;
    double q = std::numeric_limits<double>::infinity();
    Actuation actuation = Actuation::Dirichlet;
    double c = 0.0;

    [[nodiscard]] bool dirichlet_at_zero() const noexcept { return std::isinf(q) && q > 0.0; }
    [[nodiscard]] double q_bar() const noexcept { return dirichlet_at_zero() ? 0.0 : std::max(0.0, -q); }

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw ValidationError("PlantConfig: epsilon must be positive");
        }
        if (std::isnan(q) || (std::isinf(q) && q < 0.0)) {
            throw ValidationError("PlantConfig: q must be a real number or +inf");
        }
        const double qb = q_bar();
        double c_min = epsilon * qb * qb;
        if (actuation == Actuation::Neumann) c_min += 0.5 * epsilon;
        if (!(c >= c_min) || !std::isfinite(c)) {
            throw ValidationError("PlantConfig: c = " + std::to_string(c) + " below the admissible minimum " +
                                  std::to_string(c_min));
        }
    }
};

inline SampledCoefficient sample_coefficient(const ReactionCoefficient& lambda, double t_j, const Grid& grid) {
    if (!(t_j >= 0.0)) throw ValidationError("sample_coefficient: sample time must be >= 0");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = lambda(t_j, grid.x(i));
        if (!std::isfinite(v[i])) {
            throw NumericalError("sample_coefficient: non-finite lambda(" + std::to_string(t_j) + ", " +
                                 std::to_string(grid.x(i)) + ")");
        }
    }
    auto eval = lambda.evaluate;
    return SampledCoefficient(Profile(grid, std::move(v)), t_j, [eval, t_j](double x) { return eval(t_j, x); });
}

/// e_j(t, x_i) = lambda(t, x_i) - b_j(x_i).
inline Profile sampling_error(const ReactionCoefficient& lambda, const SampledCoefficient& b, double t,
                              const Grid& grid) {
    require_same_grid(b.grid(), grid, "sampling_error");
    if (t < b.sample_time()) {
        throw ValidationError("sampling_error: t precedes the sample time");
    }
    std::vector<double> e(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) e[i] = lambda(t, grid.x(i)) - b.values()[i];
    return Profile(grid, std::move(e));
}

/// One implicit Euler step of the plant from t to t + dt with boundary input U.
/// Second-order centered differences in the interior; ghost-node elimination
/// for the Robin condition at x = 0 and the Neumann condition at x = 1.
inline Profile step_plant(const Profile& u, double t, double dt, double U, const ReactionCoefficient& lambda,
                          const PlantConfig& cfg) {
    if (!(dt > 0.0)) throw ValidationError("step_plant: dt must be positive");
    const Grid& grid = u.grid();
    const std::size_t n = grid.size();
    const double h = grid.step();
    const double r = dt * cfg.epsilon / (h * h);
    const double t1 = t + dt;

    std::vector<double> lower(n - 1, 0.0), diag(n, 0.0), upper(n - 1, 0.0), rhs(u.vector());

    for (std::size_t i = 1; i + 1 < n; ++i) {
        diag[i] = 1.0 + 2.0 * r - dt * lambda(t1, grid.x(i));
        lower[i - 1] = -r;
        upper[i] = -r;
    }

    if (cfg.dirichlet_at_zero()) {
        diag[0] = 1.0;
        upper[0] = 0.0;
        rhs[0] = 0.0;
    } else {
        // u_{-1} = u_1 - 2 h q u_0
        diag[0] = 1.0 + 2.0 * r * (1.0 + h * cfg.q) - dt * lambda(t1, 0.0);
        upper[0] = -2.0 * r;
    }

    if (cfg.actuation == Actuation::Dirichlet) {
        diag[n - 1] = 1.0;
        lower[n - 2] = 0.0;
        rhs[n - 1] = U;
    } else {
        // u_n = u_{n-2} + 2 h U
        diag[n - 1] = 1.0 + 2.0 * r - dt * lambda(t1, 1.0);
        lower[n - 2] = -2.0 * r;
        rhs[n - 1] += 2.0 * r * h * U;
    }

    auto next = solve_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(next[i])) {
            throw NumericalError("step_plant: non-finite state at node " + std::to_string(i));
        }
    }
    return Profile(grid, std::move(next));
}

}  // namespace rdgain
