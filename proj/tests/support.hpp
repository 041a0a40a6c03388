#pragma once

// Hand-rolled generators for the property tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "rdgain/numerics.hpp"

namespace rdgain::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    /// Random profile with independent node values in [-1, 1].
    Profile rough(const Grid& grid) {
        std::vector<double> v(grid.size());
        for (auto& x : v) x = uniform(-1.0, 1.0);
        return Profile(grid, std::move(v));
    }

    /// Smooth profile: a few low-frequency sine modes plus a quadratic.
    Profile smooth(const Grid& grid) {
        double a[4], w[4], p[4];
        for (int k = 0; k < 4; ++k) {
            a[k] = uniform(-1.0, 1.0);
            w[k] = uniform(0.5, 3.0) * std::numbers::pi;
            p[k] = uniform(0.0, 2.0 * std::numbers::pi);
        }
        const double c0 = uniform(-1.0, 1.0), c1 = uniform(-1.0, 1.0), c2 = uniform(-1.0, 1.0);
        return Profile::from_function(grid, [&](double x) {
            double s = c0 + c1 * x + c2 * x * x;
            for (int k = 0; k < 4; ++k) s += a[k] * std::sin(w[k] * x + p[k]);
            return s;
        });
    }

    /// Smooth profile vanishing at x = 0.
    Profile smooth_dirichlet(const Grid& grid) {
        const Profile base = smooth(grid);
        const double b0 = base[0];
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] - b0 * (1.0 - grid.x(i));
        return Profile(grid, std::move(v));
    }

private:
    std::mt19937_64 rng_;
};

inline double sup_diff(const Profile& a, const Profile& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace rdgain::testing
