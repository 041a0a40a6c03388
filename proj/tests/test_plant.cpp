#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "rdgain/coefficients.hpp"
#include "rdgain/plant.hpp"
#include "support.hpp"

using namespace rdgain;
using Catch::Approx;

namespace {

ReactionCoefficient zero_lambda() { return coefficients::constant(0.0); }

ReactionCoefficient identity_in_x() { return {"x", [](double, double x) { return x; }, 1.0, 0.0}; }

}  // namespace

TEST_CASE("sample_coefficient examples", "[plant][sample]") {
    const Grid g(51);
    const auto b = sample_coefficient(identity_in_x(), 0.7, g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(b.values()[i] == g.x(i));
    CHECK(b.sample_time() == 0.7);

    const auto lam = coefficients::example_coefficient();
    const auto p = sample_coefficient(lam, 1.0, g);
    CHECK(p.values()[0] == Approx(103.0).epsilon(1e-14));
    const double c5 = std::cosh(5.0);
    CHECK(std::abs(p.values()[50] - (10.0 + 50.0 - 7.0 + 50.0 / (c5 * c5))) < 1e-12);
    CHECK(std::abs(p.values()[50] - 53.00907) < 1e-4);
    CHECK_THROWS_AS(sample_coefficient(lam, -0.1, g), ValidationError);

    const ReactionCoefficient bad{"bad", [](double, double x) { return x > 0.5 ? NAN : 0.0; }, 1.0, 0.0};
    CHECK_THROWS_AS(sample_coefficient(bad, 0.0, g), NumericalError);
}

TEST_CASE("sampled coefficient interpolates between nodes without a shape", "[plant][sample]") {
    const Grid g(21);
    const auto cubic = [](double x) { return 1.0 - x + 2.0 * x * x * x; };
    const SampledCoefficient b(Profile::from_function(g, cubic), 0.0);
    CHECK_FALSE(b.has_shape());
    for (double x : {0.0, 0.013, 0.5, 0.777, 0.99, 1.0}) CHECK(b(x) == Approx(cubic(x)).margin(1e-12));
}

TEST_CASE("sampling error examples", "[plant][error]") {
    const Grid g(51);
    const auto lam = coefficients::example_coefficient();
    const auto b = sample_coefficient(lam, 0.4, g);
    CHECK(sampling_error(lam, b, 0.4, g).max_abs() == 0.0);
    CHECK_THROWS_AS(sampling_error(lam, b, 0.39, g), ValidationError);
    const auto frozen = coefficients::constant(3.0);
    CHECK(sampling_error(frozen, sample_coefficient(frozen, 0.2, g), 1.7, g).max_abs() == 0.0);
}

TEST_CASE("sampling error is bounded by phi (t - t_j)", "[plant][error][property]") {
    testing::Gen gen(11);
    const Grid g(51);
    const auto lam = coefficients::example_coefficient();
    for (int trial = 0; trial < 300; ++trial) {
        const double tj = gen.uniform(0.0, 2.0);
        const double t = tj + gen.uniform(0.0, 0.3);
        const auto b = sample_coefficient(lam, tj, g);
        CHECK(sampling_error(lam, b, t, g).max_abs() <= lam.phi * (t - tj) * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("step_plant examples", "[plant][step]") {
    const Grid g(51);
    const PlantConfig cfg;
    CHECK(step_plant(Profile(g), 0.0, 4e-4, 0.0, zero_lambda(), cfg).max_abs() == 0.0);

    const auto s = Profile::from_function(g, [](double x) { return std::sin(std::numbers::pi * x); });
    const auto next = step_plant(s, 0.0, 4e-4, 0.0, zero_lambda(), cfg);
    const double factor = 1.0 / (1.0 + 4e-4 * std::numbers::pi * std::numbers::pi);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(std::abs(next[i] / (s[i] * factor) - 1.0) < 2e-3);

    CHECK_THROWS_AS(step_plant(s, 0.0, 0.0, 0.0, zero_lambda(), cfg), ValidationError);
    CHECK_THROWS_AS(step_plant(s, 0.0, -1e-3, 0.0, zero_lambda(), cfg), ValidationError);
}

TEST_CASE("heat decay is monotone for every boundary configuration", "[plant][step][property]") {
    const Grid g(41);
    testing::Gen gen(12);
    for (Actuation act : {Actuation::Dirichlet, Actuation::Neumann}) {
        for (double q : {std::numeric_limits<double>::infinity(), 0.0, 0.7, 5.0}) {
            PlantConfig cfg;
            cfg.q = q;
            cfg.actuation = act;
            cfg.c = act == Actuation::Neumann ? 0.5 : 0.0;
            Profile u = gen.smooth(g);
            if (cfg.dirichlet_at_zero()) u = gen.smooth_dirichlet(g);
            double prev = l2_norm(u);
            for (int k = 0; k < 200; ++k) {
                u = step_plant(u, k * 1e-3, 1e-3, 0.0, zero_lambda(), cfg);
                const double n = l2_norm(u);
                CHECK(n <= prev * (1.0 + 1e-12));
                prev = n;
            }
        }
    }
}

TEST_CASE("step_plant is jointly linear in state and input", "[plant][step][property]") {
    testing::Gen gen(13);
    const auto lam = coefficients::example_coefficient();
    for (int trial = 0; trial < 40; ++trial) {
        const Grid g(gen.index(5, 80));
        PlantConfig cfg;
        cfg.actuation = trial % 2 ? Actuation::Neumann : Actuation::Dirichlet;
        cfg.q = trial % 3 == 0 ? std::numeric_limits<double>::infinity() : gen.uniform(-0.5, 3.0);
        cfg.c = 10.0;
        const Profile u = gen.rough(g);
        const double U = gen.uniform(-2, 2), a = gen.uniform(-5, 5), t = gen.uniform(0, 2);
        std::vector<double> scaled(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) scaled[i] = a * u[i];
        const auto lhs = step_plant(Profile(g, scaled), t, 1e-3, a * U, lam, cfg);
        const auto rhs = step_plant(u, t, 1e-3, U, lam, cfg);
        for (std::size_t i = 0; i < u.size(); ++i) {
            CHECK(std::abs(lhs[i] - a * rhs[i]) <= 1e-12 * std::max(1.0, std::abs(a * rhs[i])));
        }
    }
}

TEST_CASE("boundary closures reach the exact linear steady states", "[plant][step]") {
    const Grid g(21);
    {
        // u_x(0) = q u(0), u(1) = 1  ->  u = (1 + q x) / (1 + q)
        PlantConfig cfg;
        cfg.q = 2.0;
        Profile u(g);
        for (int k = 0; k < 400; ++k) u = step_plant(u, 0.0, 0.05, 1.0, zero_lambda(), cfg);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(u[i] == Approx((1.0 + 2.0 * g.x(i)) / 3.0).margin(1e-10));
    }
    {
        // u(0) = 0, u_x(1) = U  ->  u = U x
        PlantConfig cfg;
        cfg.actuation = Actuation::Neumann;
        cfg.c = 0.5;
        Profile u(g);
        for (int k = 0; k < 800; ++k) u = step_plant(u, 0.0, 0.05, 0.3, zero_lambda(), cfg);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(u[i] == Approx(0.3 * g.x(i)).margin(1e-10));
    }
}

TEST_CASE("plant configuration admissibility", "[plant][config]") {
    PlantConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.actuation = Actuation::Neumann;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.c = 0.5;
    CHECK_NOTHROW(cfg.validate());
    cfg = PlantConfig{};
    cfg.q = -1.0;
    CHECK(cfg.q_bar() == 1.0);
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.c = 1.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("declared bounds of the coefficient models survive dense spot checks", "[plant][coefficient]") {
    const auto example = coefficients::validate_coefficient(coefficients::example_coefficient(), 2.0);
    // The declared constants add up the term-wise maxima, so they are not tight:
    // max lambda is about 103 (near t = 1) and max |lambda_t| about 201.
    CHECK(example.observed_bound <= 117.0);
    CHECK(example.observed_bound > 102.0);
    CHECK(example.observed_lipschitz <= 303.0);
    CHECK(example.observed_lipschitz > 195.0);

    CHECK_NOTHROW(coefficients::validate_coefficient(coefficients::slow_sine(0.25, 4.0, 0.25), 10.0));
    CHECK_NOTHROW(coefficients::validate_coefficient(coefficients::constant(-4.0), 1.0));

    auto understated = coefficients::example_coefficient();
    understated.phi = 150.0;
    CHECK_THROWS_AS(coefficients::validate_coefficient(understated, 2.0), ValidationError);
    understated = coefficients::example_coefficient();
    understated.lambda_bar = 100.0;
    CHECK_THROWS_AS(coefficients::validate_coefficient(understated, 2.0), ValidationError);
}

TEST_CASE("tabulated coefficient is bilinear and reads CSV", "[plant][coefficient]") {
    std::vector<std::array<double, 3>> rows;
    for (double t : {0.0, 1.0, 2.0}) {
        for (double x : {0.0, 0.5, 1.0}) rows.push_back({t, x, 1.0 + 2.0 * t + 3.0 * x});
    }
    const auto lam = coefficients::tabulated(rows);
    CHECK(lam(0.25, 0.3) == Approx(1.0 + 0.5 + 0.9));
    CHECK(lam.phi == Approx(2.0));
    CHECK(lam.lambda_bar == Approx(1.0 + 4.0 + 3.0));
    CHECK(lam(5.0, 1.0) == Approx(8.0));

    const auto path = std::filesystem::temp_directory_path() / "rdgain_tabulated_test.csv";
    {
        std::ofstream out(path);
        out << "t, x, lambda\n";
        for (const auto& r : rows) out << r[0] << "," << r[1] << "," << r[2] << "\n";
    }
    const auto from_file = coefficients::tabulated_from_csv(path.string());
    CHECK(from_file(1.5, 0.75) == Approx(lam(1.5, 0.75)));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(coefficients::tabulated_from_csv("/nonexistent/table.csv"), ValidationError);
    rows.pop_back();
    CHECK_THROWS_AS(coefficients::tabulated(rows), ValidationError);
}
