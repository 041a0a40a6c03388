#pragma once

// Discretization, quadrature, tridiagonal solves and modified Bessel functions
// shared by the plant, kernel and trigger code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rdgain/errors.hpp"

namespace rdgain {

/// Uniform closed grid on [0, 1]: x_i = i * h, i = 0..n-1, h = 1/(n-1).
class Grid {
public:
    explicit Grid(std::size_t n) : n_(n) {
        if (n < 3) {
            throw ValidationError("Grid: need at least 3 nodes, got " + std::to_string(n));
        }
        h_ = 1.0 / static_cast<double>(n - 1);
    }

    /// Grid whose spacing is the given step (1/h must be an integer up to rounding).
    static Grid with_step(double h) {
        if (!(h > 0.0) || h > 0.5) {
            throw ValidationError("Grid: step must lie in (0, 0.5]");
        }
        const double cells = 1.0 / h;
        const auto rounded = std::llround(cells);
        if (std::abs(cells - static_cast<double>(rounded)) > 1e-9 * cells) {
            throw ValidationError("Grid: 1/h must be an integer");
        }
        return Grid(static_cast<std::size_t>(rounded) + 1);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double step() const noexcept { return h_; }
    [[nodiscard]] double x(std::size_t i) const noexcept {
        return i + 1 == n_ ? 1.0 : static_cast<double>(i) * h_;
    }

    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
        return out;
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

private:
    std::size_t n_;
    double h_;
};

/// Samples of a function of x on a Grid.
class Profile {
public:
    explicit Profile(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

    Profile(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw ValidationError("Profile: " + std::to_string(values_.size()) +
                                  " values for a grid of " + std::to_string(grid_.size()) + " nodes");
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw ValidationError("Profile: non-finite value at node " + std::to_string(i));
            }
        }
    }

    template <typename F>
    static Profile from_function(const Grid& grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.x(i));
        return Profile(grid, std::move(v));
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return values_; }

    [[nodiscard]] double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) {
        throw ValidationError(std::string(where) + ": grid mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + " nodes)");
    }
}

/// Pointwise product p(x) q(x).
inline Profile pointwise_product(const Profile& p, const Profile& q) {
    require_same_grid(p.grid(), q.grid(), "pointwise_product");
    std::vector<double> v(p.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = p[i] * q[i];
    return Profile(p.grid(), std::move(v));
}

/// Trapezoid weights of a row with `intervals` cells of width h.
inline std::vector<double> trapezoid_weights(std::size_t intervals, double h) {
    std::vector<double> w(intervals + 1, h);
    if (intervals == 0) {
        w[0] = 0.0;
        return w;
    }
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return w;
}

/// Fourth-order composite Newton-Cotes weights over `intervals` equal cells:
/// Simpson for an even count, Simpson 3/8 on the first three cells followed by
/// Simpson for an odd count, trapezoid for a single cell.
inline std::vector<double> newton_cotes_weights(std::size_t intervals, double h) {
    if (intervals < 2) return trapezoid_weights(intervals, h);
    std::vector<double> w(intervals + 1, 0.0);
    std::size_t start = 0;
    if (intervals % 2 == 1) {
        const double c = 3.0 * h / 8.0;
        w[0] += c;
        w[1] += 3.0 * c;
        w[2] += 3.0 * c;
        w[3] += c;
        start = 3;
    }
    for (std::size_t k = start; k + 2 <= intervals; k += 2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    return w;
}

/// Quadrature weights for every row integral  int_0^{x_i} f(y) dy  of a grid,
/// stored packed: row i holds i + 1 weights.
class RowQuadrature {
public:
    explicit RowQuadrature(const Grid& grid) : n_(grid.size()), weights_(grid.size() * (grid.size() + 1) / 2) {
        for (std::size_t i = 0; i < n_; ++i) {
            const auto w = newton_cotes_weights(i, grid.step());
            std::copy(w.begin(), w.end(), weights_.begin() + static_cast<std::ptrdiff_t>(offset(i)));
        }
    }

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {weights_.data() + offset(i), i + 1};
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    static std::size_t offset(std::size_t i) noexcept { return i * (i + 1) / 2; }

    std::size_t n_;
    std::vector<double> weights_;
};

/// Trapezoid approximation of int_0^1 p(x) q(x) dx.
inline double inner_product(const Profile& p, const Profile& q) {
    require_same_grid(p.grid(), q.grid(), "inner_product");
    const std::size_t n = p.size();
    double s = 0.5 * (p[0] * q[0] + p[n - 1] * q[n - 1]);
    for (std::size_t i = 1; i + 1 < n; ++i) s += p[i] * q[i];
    return s * p.grid().step();
}

inline double l2_norm(const Profile& p) { return std::sqrt(inner_product(p, p)); }

/// Thomas algorithm for a tridiagonal system. `lower[i]` couples row i+1 to
/// column i, `upper[i]` couples row i to column i+1.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                             std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0 || rhs.size() != n || lower.size() + 1 != n || upper.size() + 1 != n) {
        throw ValidationError("solve_tridiagonal: inconsistent band sizes");
    }
    std::vector<double> c(n, 0.0);
    std::vector<double> d(n, 0.0);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
        throw PivotError(0, "solve_tridiagonal: zero pivot at row 0");
    }
    c[0] = n > 1 ? upper[0] / pivot : 0.0;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw PivotError(i, "solve_tridiagonal: zero pivot at row " + std::to_string(i));
        }
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

namespace detail {

inline constexpr double kBesselAsymptoticThreshold = 20.0;

// e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k
inline double bessel_i_asymptotic(int order, double x) {
    const double mu = 4.0 * order * order;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) * sum;
}

inline void require_finite_argument(double x, const char* name) {
    if (!std::isfinite(x)) throw ValidationError(std::string(name) + ": non-finite argument");
}

}  // namespace detail

/// Modified Bessel function of the first kind, order 0.
inline double bessel_i0(double x) {
    detail::require_finite_argument(x, "bessel_i0");
    const double ax = std::abs(x);
    if (ax > detail::kBesselAsymptoticThreshold) return detail::bessel_i_asymptotic(0, ax);
    const double q = 0.25 * ax * ax;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

/// Modified Bessel function of the first kind, order 1.
inline double bessel_i1(double x) {
    detail::require_finite_argument(x, "bessel_i1");
    const double ax = std::abs(x);
    double value;
    if (ax > detail::kBesselAsymptoticThreshold) {
        value = detail::bessel_i_asymptotic(1, ax);
    } else {
        const double q = 0.25 * ax * ax;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<double>(k) * (k + 1));
            sum += term;
            if (term < 1e-16 * sum) break;
        }
        value = 0.5 * ax * sum;
    }
    return x < 0.0 ? -value : value;
}

}  // namespace rdgain
