#pragma once

// Reaction-coefficient models selectable by name, plus a dense spot-check of
// the declared bound and Lipschitz constant.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rdgain/errors.hpp"
#include "rdgain/plant.hpp"

namespace rdgain::coefficients {

/// Time-dependent part lambda~(t) of the example coefficient
/// lambda(t, x) = lambda~(t) + 50 / cosh^2(5 x).
inline double example_lambda_tilde(double t) {
    const double s = 1.0 / std::cosh(5.0 * (t - 1.0));
    return 10.0 + 50.0 * s * s + 7.0 * std::cos(5.0 * std::numbers::pi * t);
}

inline double example_spatial_term(double x) {
    const double s = 1.0 / std::cosh(5.0 * x);
    return 50.0 * s * s;
}

/// lambda(t, x) = 10 + 50/cosh^2(5(t-1)) + 7 cos(5 pi t) + 50/cosh^2(5x).
inline ReactionCoefficient example_coefficient() {
    return {"paper-example",
            [](double t, double x) { return example_lambda_tilde(t) + example_spatial_term(x); },
            117.0, 303.0};
}

inline ReactionCoefficient constant(double value) {
    return {"constant", [value](double, double) { return value; }, std::abs(value), 0.0};
}

/// lambda(t, x) = amplitude sin(omega t) + spatial_amplitude cos(pi x).
inline ReactionCoefficient slow_sine(double amplitude, double omega, double spatial_amplitude) {
    return {"slow-sine",
            [=](double t, double x) {
                return amplitude * std::sin(omega * t) + spatial_amplitude * std::cos(std::numbers::pi * x);
            },
            std::abs(amplitude) + std::abs(spatial_amplitude), std::abs(amplitude * omega)};
}

/// Bilinear interpolation of lambda on a rectilinear (t, x) table. Outside the
/// table the nearest edge value is used.
class TabulatedCoefficient {
public:
    TabulatedCoefficient(std::vector<double> times, std::vector<double> xs, std::vector<double> values)
        : times_(std::move(times)), xs_(std::move(xs)), values_(std::move(values)) {
        if (times_.size() < 1 || xs_.size() < 2 || values_.size() != times_.size() * xs_.size()) {
            throw ValidationError("tabulated coefficient: table is not a full rectilinear grid");
        }
        if (!std::is_sorted(times_.begin(), times_.end()) || !std::is_sorted(xs_.begin(), xs_.end()) ||
            std::adjacent_find(times_.begin(), times_.end()) != times_.end() ||
            std::adjacent_find(xs_.begin(), xs_.end()) != xs_.end()) {
            throw ValidationError("tabulated coefficient: axes must be strictly increasing");
        }
    }

    [[nodiscard]] double operator()(double t, double x) const {
        const auto [it, wt] = locate(times_, t);
        const auto [ix, wx] = locate(xs_, x);
        auto at = [&](std::size_t a, std::size_t b) { return values_[a * xs_.size() + b]; };
        const std::size_t it1 = std::min(it + 1, times_.size() - 1);
        const std::size_t ix1 = std::min(ix + 1, xs_.size() - 1);
        const double v0 = (1.0 - wx) * at(it, ix) + wx * at(it, ix1);
        const double v1 = (1.0 - wx) * at(it1, ix) + wx * at(it1, ix1);
        return (1.0 - wt) * v0 + wt * v1;
    }

    [[nodiscard]] double bound() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Exact Lipschitz constant in t of the piecewise-linear interpolant.
    [[nodiscard]] double lipschitz() const {
        double m = 0.0;
        for (std::size_t a = 0; a + 1 < times_.size(); ++a) {
            const double dt = times_[a + 1] - times_[a];
            for (std::size_t b = 0; b < xs_.size(); ++b) {
                m = std::max(m, std::abs(values_[(a + 1) * xs_.size() + b] - values_[a * xs_.size() + b]) / dt);
            }
        }
        return m;
    }

private:
    static std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
        if (axis.size() == 1 || v <= axis.front()) return {0, 0.0};
        if (v >= axis.back()) return {axis.size() - 1, 0.0};
        const auto upper = std::upper_bound(axis.begin(), axis.end(), v);
        const auto i = static_cast<std::size_t>(upper - axis.begin()) - 1;
        return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
    }

    std::vector<double> times_;
    std::vector<double> xs_;
    std::vector<double> values_;
};

/// Builds a tabulated model from (t, x, lambda) triples in any order.
inline ReactionCoefficient tabulated(const std::vector<std::array<double, 3>>& rows) {
    std::map<double, std::map<double, double>> table;
    for (const auto& r : rows) table[r[0]][r[1]] = r[2];
    if (table.empty()) throw ValidationError("tabulated coefficient: no rows");
    std::vector<double> times, xs, values;
    for (const auto& [x, v] : table.begin()->second) xs.push_back(x);
    for (const auto& [t, row] : table) {
        times.push_back(t);
        if (row.size() != xs.size()) throw ValidationError("tabulated coefficient: ragged x axis");
        std::size_t k = 0;
        for (const auto& [x, v] : row) {
            if (x != xs[k++]) throw ValidationError("tabulated coefficient: x axis differs between times");
            values.push_back(v);
        }
    }
    auto model = std::make_shared<TabulatedCoefficient>(std::move(times), std::move(xs), std::move(values));
    return {"tabulated", [model](double t, double x) { return (*model)(t, x); }, model->bound(),
            model->lipschitz()};
}

/// Reads a CSV with header columns t, x, lambda.
inline ReactionCoefficient tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("tabulated coefficient: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("tabulated coefficient: empty file " + path);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(std::remove_if(cell.begin(), cell.end(), ::isspace), cell.end());
            header.push_back(cell);
        }
    }
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ValidationError("tabulated coefficient: missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ct = column("t"), cx = column("x"), cl = column("lambda");
    std::vector<std::array<double, 3>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            double v = 0.0;
            const char* first = cell.data() + (b == std::string::npos ? cell.size() : b);
            const char* last = cell.data() + (e == std::string::npos ? cell.size() : e + 1);
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) {
                throw ValidationError("tabulated coefficient: bad number on line " + std::to_string(line_no));
            }
            cells.push_back(v);
        }
        if (cells.size() != header.size()) {
            throw ValidationError("tabulated coefficient: wrong column count on line " + std::to_string(line_no));
        }
        rows.push_back({cells[ct], cells[cx], cells[cl]});
    }
    return tabulated(rows);
}

struct CoefficientCheck {
    double observed_bound = 0.0;
    double observed_lipschitz = 0.0;
};

/// Spot-checks |lambda| <= lambda_bar and |lambda(t,x) - lambda(s,x)| <= phi |t - s|
/// on a dense (t, x) sample of [0, t_max] x [0, 1]. Throws when a declaration
/// is violated by more than 1e-6 relative.
inline CoefficientCheck validate_coefficient(const ReactionCoefficient& lambda, double t_max,
                                             std::size_t time_samples = 4001, std::size_t space_samples = 101) {
    if (!(t_max > 0.0) || time_samples < 2 || space_samples < 2) {
        throw ValidationError("validate_coefficient: bad sampling parameters");
    }
    CoefficientCheck out;
    const double dt = t_max / static_cast<double>(time_samples - 1);
    for (std::size_t b = 0; b < space_samples; ++b) {
        const double x = static_cast<double>(b) / static_cast<double>(space_samples - 1);
        double prev = lambda(0.0, x);
        out.observed_bound = std::max(out.observed_bound, std::abs(prev));
        for (std::size_t a = 1; a < time_samples; ++a) {
            const double v = lambda(static_cast<double>(a) * dt, x);
            if (!std::isfinite(v)) throw ValidationError("validate_coefficient: non-finite value");
            out.observed_bound = std::max(out.observed_bound, std::abs(v));
            out.observed_lipschitz = std::max(out.observed_lipschitz, std::abs(v - prev) / dt);
            prev = v;
        }
    }
    if (out.observed_bound > lambda.lambda_bar * (1.0 + 1e-6) + 1e-300) {
        throw ValidationError("coefficient '" + lambda.name + "': observed bound " +
                              std::to_string(out.observed_bound) + " exceeds declared lambda_bar " +
                              std::to_string(lambda.lambda_bar));
    }
    if (out.observed_lipschitz > lambda.phi * (1.0 + 1e-6) + 1e-12) {
        throw ValidationError("coefficient '" + lambda.name + "': observed Lipschitz constant " +
                              std::to_string(out.observed_lipschitz) + " exceeds declared phi " +
                              std::to_string(lambda.phi));
    }
    return out;
}

}  // namespace rdgain::coefficients
