#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "rdgain/numerics.hpp"
#include "support.hpp"

using namespace rdgain;
using Catch::Approx;

namespace {

// Power series of I_nu at long double precision, summed until terms vanish.
long double series_bessel(int nu, long double x) {
    const long double q = x * x / 4.0L;
    long double term = nu == 0 ? 1.0L : x / 2.0L;
    long double sum = term;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (term < 1e-21L * sum) break;
    }
    return sum;
}

}  // namespace

TEST_CASE("grid spans the closed unit interval", "[numerics][grid]") {
    const Grid g(51);
    CHECK(g.size() == 51);
    CHECK(g.step() == Approx(0.02));
    CHECK(g.x(0) == 0.0);
    CHECK(g.x(50) == 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g.x(i) - g.x(i - 1) == Approx(g.step()).epsilon(1e-12));
    CHECK(Grid::with_step(0.02).size() == 51);
    CHECK_THROWS_AS(Grid(2), ValidationError);
    CHECK_THROWS_AS(Grid::with_step(0.03), ValidationError);
}

TEST_CASE("profiles reject non-finite values and wrong lengths", "[numerics][profile]") {
    const Grid g(5);
    CHECK_THROWS_AS(Profile(g, {0, 1, 2}), ValidationError);
    CHECK_THROWS_AS(Profile(g, {0, 1, NAN, 3, 4}), ValidationError);
    CHECK_THROWS_AS(Profile(g, {0, 1, INFINITY, 3, 4}), ValidationError);
}

TEST_CASE("l2 norm examples", "[numerics][l2]") {
    const Grid g(51);
    CHECK(l2_norm(Profile(g)) == 0.0);
    CHECK(l2_norm(Profile::from_function(g, [](double) { return 1.0; })) == Approx(1.0).epsilon(1e-14));
    const auto s = Profile::from_function(g, [](double x) { return std::sin(std::numbers::pi * x); });
    CHECK(std::abs(l2_norm(s) - 1.0 / std::sqrt(2.0)) < 1e-3);
}

TEST_CASE("inner product examples", "[numerics][inner]") {
    const Grid g(51);
    testing::Gen gen(1);
    const Profile p = gen.rough(g);
    CHECK(inner_product(p, Profile(g)) == 0.0);
    CHECK(inner_product(p, p) == Approx(l2_norm(p) * l2_norm(p)).epsilon(1e-12));
    const auto x = Profile::from_function(g, [](double v) { return v; });
    const auto one = Profile::from_function(g, [](double) { return 1.0; });
    CHECK(std::abs(inner_product(x, one) - 0.5) < 1e-12);
    CHECK_THROWS_AS(inner_product(p, Profile(Grid(52))), ValidationError);
}

TEST_CASE("inner product is symmetric and bilinear", "[numerics][inner][property]") {
    testing::Gen gen(2);
    for (int trial = 0; trial < 200; ++trial) {
        const Grid g(gen.index(3, 120));
        const Profile p = gen.rough(g), q = gen.rough(g), r = gen.rough(g);
        const double a = gen.uniform(-3, 3), b = gen.uniform(-3, 3);
        CHECK(inner_product(p, q) == inner_product(q, p));
        std::vector<double> mix(g.size());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * p[i] + b * q[i];
        const double lhs = inner_product(Profile(g, mix), r);
        const double rhs = a * inner_product(p, r) + b * inner_product(q, r);
        const double scale = std::abs(a * inner_product(p, r)) + std::abs(b * inner_product(q, r)) + 1e-300;
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, scale));
        const double n = l2_norm(p);
        CHECK(std::abs(n * n - inner_product(p, p)) <= 1e-12 * inner_product(p, p));
    }
}

TEST_CASE("Newton-Cotes row weights integrate cubics exactly", "[numerics][quadrature]") {
    for (std::size_t cells = 2; cells <= 12; ++cells) {
        const double h = 0.1;
        const auto w = newton_cotes_weights(cells, h);
        double s = 0.0;
        for (std::size_t k = 0; k <= cells; ++k) {
            const double y = static_cast<double>(k) * h;
            s += w[k] * (1.0 + y - 2.0 * y * y + 3.0 * y * y * y);
        }
        const double L = static_cast<double>(cells) * h;
        const double exact = L + L * L / 2.0 - 2.0 * L * L * L / 3.0 + 3.0 * L * L * L * L / 4.0;
        CHECK(s == Approx(exact).epsilon(1e-13));
    }
    const auto t = trapezoid_weights(1, 0.5);
    CHECK(t[0] == 0.25);
    CHECK(t[1] == 0.25);
    CHECK(trapezoid_weights(0, 0.5)[0] == 0.0);
}

TEST_CASE("tridiagonal solver examples", "[numerics][tridiagonal]") {
    {
        const std::vector<double> lo(3, 0.0), up(3, 0.0), d(4, 1.0), r{1, 2, 3, 4};
        CHECK(solve_tridiagonal(lo, d, up, r) == r);
    }
    {
        const auto x = solve_tridiagonal(std::vector<double>{1}, std::vector<double>{2, 2}, std::vector<double>{1},
                                         std::vector<double>{3, 3});
        CHECK(x[0] == Approx(1.0));
        CHECK(x[1] == Approx(1.0));
    }
    {
        try {
            solve_tridiagonal(std::vector<double>{1, 1}, std::vector<double>{1, 1, 1}, std::vector<double>{1, 1},
                              std::vector<double>{1, 1, 1});
            FAIL("expected a pivot error");
        } catch (const PivotError& e) {
            CHECK(e.index() == 1);
        }
    }
    CHECK_THROWS_AS(solve_tridiagonal(std::vector<double>{1}, std::vector<double>{1, 1, 1}, std::vector<double>{1, 1},
                                      std::vector<double>{1, 1, 1}),
                    ValidationError);
}

TEST_CASE("tridiagonal residual on random diagonally dominant systems", "[numerics][tridiagonal][property]") {
    testing::Gen gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = trial == 0 ? 100 : gen.index(1, 300);
        std::vector<double> lo(n - 1), up(n - 1), d(n), r(n);
        for (auto& v : lo) v = gen.uniform(-1, 1);
        for (auto& v : up) v = gen.uniform(-1, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double off = (i > 0 ? std::abs(lo[i - 1]) : 0.0) + (i + 1 < n ? std::abs(up[i]) : 0.0);
            d[i] = (gen.uniform(0, 1) < 0.5 ? -1.0 : 1.0) * (off + gen.uniform(0.1, 2.0));
            r[i] = gen.uniform(-10, 10);
        }
        const auto x = solve_tridiagonal(lo, d, up, r);
        double res = 0.0, rn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ax = d[i] * x[i];
            if (i > 0) ax += lo[i - 1] * x[i - 1];
            if (i + 1 < n) ax += up[i] * x[i + 1];
            res = std::max(res, std::abs(ax - r[i]));
            rn = std::max(rn, std::abs(r[i]));
        }
        CHECK(res <= 1e-12 * rn);
    }
}

TEST_CASE("Bessel examples", "[numerics][bessel]") {
    CHECK(bessel_i0(0.0) == 1.0);
    CHECK(bessel_i1(0.0) == 0.0);
    CHECK(std::abs(bessel_i0(1.0) - 1.2660658778) < 1e-9);
    CHECK(bessel_i0(-2.5) == bessel_i0(2.5));
    CHECK(bessel_i1(-2.5) == -bessel_i1(2.5));
    CHECK_THROWS_AS(bessel_i0(NAN), ValidationError);
    CHECK_THROWS_AS(bessel_i1(INFINITY), ValidationError);
}

TEST_CASE("Bessel functions match independent oracles on [0, 30]", "[numerics][bessel][property]") {
    // Absolute 1e-10 cannot hold where I0 ~ 1e11; the tolerance is absolute
    // below 1 and relative above.
    for (int k = 0; k <= 200; ++k) {
        const double x = k == 0 ? 0.0 : std::pow(10.0, -3.0 + 4.4771212547 * (k - 1) / 199.0);
        const double tol = 1e-10 * std::max(1.0, bessel_i0(x));
        CHECK(std::abs(bessel_i0(x) - static_cast<double>(series_bessel(0, x))) <= tol);
        CHECK(std::abs(bessel_i1(x) - static_cast<double>(series_bessel(1, x))) <= tol);
        CHECK(std::abs(bessel_i0(x) - std::cyl_bessel_i(0.0, x)) <= tol);
        CHECK(std::abs(bessel_i1(x) - std::cyl_bessel_i(1.0, x)) <= tol);
    }
}
