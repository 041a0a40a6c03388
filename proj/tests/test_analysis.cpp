#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "rdgain/analysis.hpp"
#include "rdgain/csv.hpp"
#include "support.hpp"

using namespace rdgain;
using Catch::Approx;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

double g_oracle(double s, double eps) { return 1.0 + std::sqrt(s / (4.0 * eps) * (std::exp(4.0 * s / eps) - 1.0)); }

}  // namespace

TEST_CASE("transform bound G examples", "[analysis][G]") {
    CHECK(transform_bound_G(0.0, 0.0, 1.0) == 1.0);
    const double expected = 1.0 + std::sqrt(0.125 * (std::exp(2.0) - 1.0));
    CHECK(transform_bound_G(0.5, 0.0, 1.0) == Approx(expected).epsilon(1e-14));
    CHECK(std::abs(transform_bound_G(0.5, 0.0, 1.0) - 1.89366) < 1e-5);

    // exp(468) fits in a double, so the example's G is finite but astronomically large.
    const auto example = transform_bound_G_checked(117.0, 0.0, 1.0);
    CHECK_FALSE(example.overflow);
    CHECK(example.value == Approx(g_oracle(117.0, 1.0)).epsilon(1e-12));
    CHECK(example.value > 1e100);

    const auto huge = transform_bound_G_checked(200.0, 0.0, 1.0);
    CHECK(huge.overflow);
    CHECK(std::isinf(huge.value));
    CHECK_THROWS_AS(transform_bound_G(1.0, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(transform_bound_G(-1.0, 0.0, 1.0), ValidationError);
}

TEST_CASE("G is at least one and monotone", "[analysis][G][property]") {
    testing::Gen gen(41);
    for (int trial = 0; trial < 500; ++trial) {
        const double lb = gen.uniform(0.0, 20.0), c = gen.uniform(0.0, 5.0), eps = gen.uniform(0.2, 5.0);
        const double G = transform_bound_G(lb, c, eps);
        CHECK(G >= 1.0);
        CHECK(transform_bound_G(lb + gen.uniform(1e-3, 1.0), c, eps) > G);
        CHECK(transform_bound_G(lb, c, eps * gen.uniform(1.01, 2.0)) < G);
    }
}

TEST_CASE("stability condition examples", "[analysis][condition]") {
    const double G = transform_bound_G(0.5, 0.0, 1.0);
    const double threshold = kPi2 * kPi2 * 0.25 / (G * G * std::log(G));
    CHECK(stability_threshold(kPi2, 0.5, G) == Approx(threshold).epsilon(1e-14));
    // Quoted elsewhere as 10.632; evaluating the formula gives 10.63567.
    CHECK(std::abs(threshold - 10.63567) < 1e-4);
    CHECK(stability_condition(0.0, kPi2, 0.5, G));
    CHECK(stability_condition(1.0, kPi2, 0.5, G));
    CHECK_FALSE(stability_condition(11.0, kPi2, 0.5, G));
    CHECK_THROWS_AS(stability_condition(1.0, kPi2, 0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(stability_condition(1.0, kPi2, 1.5, G), ValidationError);
    // R = 1/2 maximizes the admissible phi.
    for (double R = 0.01; R < 1.0; R += 0.01) CHECK(stability_threshold(kPi2, R, G) <= stability_threshold(kPi2, 0.5, G));
}

TEST_CASE("decay rate examples", "[analysis][sigma]") {
    const double G = transform_bound_G(0.5, 0.0, 1.0);
    CHECK(decay_rate_sigma(0.0, kPi2, 0.4, G) == Approx(kPi2 * 0.6).epsilon(1e-14));
    const double oracle = (kPi2 * kPi2 * 0.25 - G * G * std::log(G)) / (kPi2 * 0.5);
    CHECK(decay_rate_sigma(1.0, kPi2, 0.5, G) == Approx(oracle).epsilon(1e-14));
    CHECK(std::abs(decay_rate_sigma(1.0, kPi2, 0.5, G) - 4.4707) < 2e-4);
    double prev = decay_rate_sigma(0.0, kPi2, 0.5, G);
    for (double phi = 0.5; phi < 10.5; phi += 0.5) {
        const double s = decay_rate_sigma(phi, kPi2, 0.5, G);
        CHECK(s < prev);
        prev = s;
    }
    CHECK_THROWS_AS(decay_rate_sigma(11.0, kPi2, 0.5, G), ValidationError);
}

TEST_CASE("dwell-time identity tau phi G^2 = mu R", "[analysis][property]") {
    testing::Gen gen(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const double phi = gen.uniform(1e-3, 1e3), mu = gen.uniform(1e-2, 1e2), R = gen.uniform(1e-3, 0.999);
        const double G = gen.uniform(1.0, 1e3);
        const double tau = min_dwell_time(phi, mu, R, G);
        CHECK(std::abs(tau * phi * G * G - mu * R) <= 1e-12 * mu * R);
    }
}

TEST_CASE("condition and positive decay rate agree", "[analysis][property]") {
    testing::Gen gen(43);
    for (int trial = 0; trial < 1000; ++trial) {
        const double phi = gen.uniform(0.0, 30.0), mu = gen.uniform(0.5, 30.0), R = gen.uniform(0.01, 0.99);
        const double G = gen.uniform(1.0001, 4.0);
        const double raw_sigma = (mu * mu * R * (1.0 - R) - phi * G * G * std::log(G)) / (mu * R);
        CHECK(stability_condition(phi, mu, R, G) == (raw_sigma > 0.0));
        if (raw_sigma > 0.0) CHECK(decay_rate_sigma(phi, mu, R, G) > 0.0);
    }
}

TEST_CASE("event statistics examples", "[analysis][stats]") {
    const std::vector<double> even{0, 1, 2, 3};
    const auto a = event_statistics(even);
    CHECK(a.count == 4);
    CHECK(a.defined);
    CHECK(a.mean_inter_execution == 1.0);
    CHECK(a.coefficient_of_variation == 0.0);

    const std::vector<double> skew{0, 1, 3};
    const auto b = event_statistics(skew);
    CHECK(b.mean_inter_execution == 1.5);
    // Population std of {1, 2} is 0.5, so CV = 1/3; the sample convention gives sqrt(0.5)/1.5.
    CHECK(b.coefficient_of_variation == Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(b.sample_coefficient_of_variation == Approx(std::sqrt(0.5) / 1.5).epsilon(1e-14));
    CHECK(std::abs(b.sample_coefficient_of_variation - 0.4714) < 1e-4);

    const std::vector<double> one{0.3};
    CHECK_FALSE(event_statistics(one).defined);
    CHECK(event_statistics(one).count == 1);
    CHECK_FALSE(event_statistics(std::vector<double>{}).defined);
    CHECK_THROWS_AS(event_statistics(std::vector<double>{0, 1, 1}), ValidationError);
}

TEST_CASE("event statistics match a brute-force oracle", "[analysis][stats][property]") {
    testing::Gen gen(44);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> t{0.0};
        const std::size_t n = gen.index(2, 400);
        for (std::size_t k = 1; k < n; ++k) t.push_back(t.back() - std::log(1.0 - gen.uniform(0.0, 0.999)) * 0.05 + 1e-9);
        long double sum = 0.0L;
        for (std::size_t k = 1; k < n; ++k) sum += static_cast<long double>(t[k] - t[k - 1]);
        const long double mean = sum / static_cast<long double>(n - 1);
        long double ss = 0.0L;
        for (std::size_t k = 1; k < n; ++k) {
            const long double d = static_cast<long double>(t[k] - t[k - 1]) - mean;
            ss += d * d;
        }
        const long double cv = std::sqrt(ss / static_cast<long double>(n - 1)) / mean;
        const auto s = event_statistics(t);
        CHECK(std::abs(s.mean_inter_execution - static_cast<double>(mean)) <= 1e-12 * static_cast<double>(mean));
        CHECK(std::abs(s.coefficient_of_variation - static_cast<double>(cv)) <= 1e-12 * std::max(1.0, static_cast<double>(cv)));
    }
}

TEST_CASE("decay envelope check", "[analysis][envelope]") {
    SimResult zero;
    zero.times = {0.0, 0.5, 1.0};
    zero.l2_norms = {0.0, 0.0, 0.0};
    CHECK(check_decay_envelope(zero, 1.5, 2.0));
    CHECK(check_decay_envelope(SimResult{}, 1.5, 2.0));

    SimResult r;
    r.times = {0.0, 0.5, 1.0};
    r.l2_norms = {1.0, std::exp(-1.0), std::exp(-2.0)};
    CHECK(check_decay_envelope(r, 1.0, 2.0));
    CHECK_FALSE(check_decay_envelope(r, 1.0, 2.1));
    CHECK(check_decay_envelope(r, 1.2, 2.1));
}

TEST_CASE("stability report", "[analysis][report]") {
    PlantConfig plant;
    const auto ok = stability_report(0.5, 1.0, plant, 0.5);
    CHECK(ok.condition_holds);
    CHECK(ok.G == Approx(1.89366).epsilon(1e-5));
    CHECK(ok.mu == Approx(kPi2));
    CHECK(ok.sigma == Approx(4.4707).epsilon(1e-4));
    CHECK(ok.tau == Approx(kPi2 * 0.5 / (ok.G * ok.G)));
    const auto parsed = csv::parse(ok.to_csv());
    CHECK(csv::parse_double(parsed.cells[0][parsed.column("sigma")]) == ok.sigma);

    const auto example = stability_report(117.0, 303.0, plant, 0.15);
    CHECK_FALSE(example.condition_holds);
    CHECK(std::isnan(example.sigma));
    CHECK(example.G > 1e100);
    CHECK(example.to_text().find("does not hold") != std::string::npos);

    const auto degenerate = stability_report(0.0, 0.0, plant, 0.5);
    CHECK(degenerate.G == 1.0);
    CHECK(degenerate.condition_holds);
    CHECK(degenerate.sigma == Approx(kPi2 * 0.5));
}
