#include <doctest.h>

#include <cmath>
#include <vector>

#include "siet/errors.hpp"
#include "siet/gaussian.hpp"
#include "siet/util.hpp"

using namespace siet;

namespace {

// Simpson's rule, used as the test-side integration oracle.
template <typename F>
double simpson(F&& f, double lo, double hi, int intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = (hi - lo) / intervals;
    double sum = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

DiscreteInputCdf random_cdf(Rng& rng, double peak, int points) {
    std::vector<double> support;
    for (int i = 0; i < points; ++i) support.push_back(-peak + 2.0 * peak * i / (points - 1));
    std::vector<double> masses = rng.simplex_point(points);
    return DiscreteInputCdf(std::move(support), std::move(masses));
}

}  // namespace

TEST_SUITE_BEGIN("gaussian");

TEST_CASE("rho closed form") {
    CHECK(rho(0.0, 1.0) == 1.0);
    CHECK(rho(2.0, 1.0) == 5.0);
    CHECK(rho(-1.5, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("type validation") {
    CHECK_THROWS_AS(GaussianMulticast({1.0, -1.0}, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianMulticast({1.0}, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianMulticast({1.0}, 1.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteInputCdf({0.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteInputCdf({-1.0, 1.0}, {0.6, 0.6}), std::invalid_argument);
}

TEST_CASE("reduce_channels picks the variance extremes") {
    CHECK(reduce_channels(GaussianMulticast({1, 2, 3}, 1.0, 0.0)) == std::pair<int, int>{0, 2});
    CHECK(reduce_channels(GaussianMulticast({2, 2, 2}, 1.0, 0.0)) == std::pair<int, int>{0, 0});
    CHECK(reduce_channels(GaussianMulticast({2, 1}, 1.0, 0.0)) == std::pair<int, int>{1, 0});
}

TEST_CASE("E[rho(X)] equals the output-side energy integral") {
    Rng rng(606);
    for (int trial = 0; trial < 5; ++trial) {
        const double sigma = 0.5 + rng.uniform();
        const DiscreteInputCdf F = random_cdf(rng, 1.0 + rng.uniform(), 5);

        // input side, closed form
        double direct = 0.0;
        for (size_t i = 0; i < F.support.size(); ++i) direct += F.masses[i] * rho(F.support[i], sigma);
        CHECK(expected_rho(F, sigma) == doctest::Approx(direct).epsilon(1e-10));

        // output side, through the density
        const double ext = 2.0 + 10.0 * sigma;
        const double harvested = simpson(
            [&](double y) { return output_density(y, F, sigma) * y * y; }, -ext, ext, 4000);
        CHECK(harvested == doctest::Approx(expected_rho(F, sigma)).epsilon(1e-8));
    }
}

TEST_CASE("output density integrates to one") {
    Rng rng(707);
    for (int trial = 0; trial < 5; ++trial) {
        const double sigma = 0.4 + rng.uniform();
        const DiscreteInputCdf F = random_cdf(rng, 1.5, 7);
        const double ext = 1.5 + 10.0 * sigma;
        const double total = simpson([&](double y) { return output_density(y, F, sigma); }, -ext, ext, 4000);
        CHECK(std::abs(total - 1.0) <= 1e-8);
    }
}

TEST_CASE("marginal information density basics") {
    const DiscreteInputCdf point({0.4}, {1.0});
    CHECK(std::abs(marginal_information_density(0.4, point, 1.0)) <= 1e-9);

    const DiscreteInputCdf sym({-1.0, 0.0, 1.0}, {0.3, 0.4, 0.3});
    const double left = marginal_information_density(-0.7, sym, 0.8);
    const double right = marginal_information_density(0.7, sym, 0.8);
    CHECK(left == doctest::Approx(right).epsilon(1e-8));
}

TEST_CASE("integral of the marginal density recovers the mutual information") {
    Rng rng(808);
    for (int trial = 0; trial < 3; ++trial) {
        const double sigma = 0.8 + rng.uniform();
        const DiscreteInputCdf F = random_cdf(rng, 1.0, 5);
        double integral = 0.0;
        for (size_t i = 0; i < F.support.size(); ++i) {
            integral += F.masses[i] * marginal_information_density(F.support[i], F, sigma);
        }
        CHECK(integral == doctest::Approx(gaussian_mutual_information(F, sigma)).epsilon(1e-6));
    }
}

TEST_CASE("small-peak optimum is two-point and passes the KKT check") {
    const GaussianMulticast gm({1.0, 1.5}, 1.0, 0.0);
    const GaussianSolution sol = gaussian_capacity_energy(gm, 33);
    CHECK(sol.converged);
    CHECK(sol.kkt.passed);
    CHECK(sol.kkt.lambda == 0.0);
    // all mass at the amplitude limits, half each by symmetry
    CHECK(std::abs(sol.input.masses.front() - sol.input.masses.back()) <= 1e-6);
    CHECK(sol.input.masses.front() == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(sol.input.second_moment() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("forced max-energy input is the antipodal pair") {
    const double peak = 1.0;
    const GaussianMulticast gm({1.0, 1.5}, peak, 2.0);  // B = P^2 + sigma_min^2
    const GaussianSolution sol = gaussian_capacity_energy(gm, 33);
    CHECK(sol.input.masses.front() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sol.input.masses.back() == doctest::Approx(0.5).epsilon(1e-6));

    // binary-antipodal mutual information over the worst channel, by Simpson
    const double sigma = 1.5;
    auto phi = [&](double y, double x) {
        return std::exp(-(y - x) * (y - x) / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * M_PI));
    };
    const double ext = peak + 10 * sigma;
    const double oracle = simpson(
        [&](double y) {
            const double p0 = phi(y, -peak), p1 = phi(y, peak);
            const double mix = 0.5 * (p0 + p1);
            double v = 0.0;
            if (p0 > 0) v += 0.5 * p0 * std::log2(p0 / mix);
            if (p1 > 0) v += 0.5 * p1 * std::log2(p1 / mix);
            return v;
        },
        -ext, ext, 8000);
    CHECK(sol.value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("single channel matches the degenerate multicast") {
    const GaussianSolution one = gaussian_capacity_energy(GaussianMulticast({1.2}, 1.0, 0.0), 33);
    const GaussianSolution two = gaussian_capacity_energy(GaussianMulticast({1.2, 1.2}, 1.0, 0.0), 33);
    CHECK(one.value == doctest::Approx(two.value).epsilon(1e-9));
}

TEST_CASE("active energy constraint yields a complementary multiplier") {
    // wide peak: the unconstrained optimum holds back energy, so a high B binds
    const GaussianMulticast gm({1.0}, 2.5, 1.0 + 0.9 * 6.25);
    const GaussianSolution sol = gaussian_capacity_energy(gm, 41);
    CHECK(sol.kkt.lambda > 0.0);
    CHECK(std::abs(sol.kkt.lambda * sol.kkt.j_value) <= 1e-6);
    CHECK(sol.input.second_moment() == doctest::Approx(0.9 * 6.25).epsilon(1e-6));
    CHECK(sol.kkt.passed);
}

TEST_CASE("perturbing the optimizer breaks the KKT certificate") {
    const GaussianMulticast gm({1.0, 1.5}, 1.0, 0.0);
    const GaussianSolution sol = gaussian_capacity_energy(gm, 33);
    REQUIRE(sol.kkt.passed);
    // drag 30% of the mass to the origin
    const DiscreteInputCdf bad({-1.0, 0.0, 1.0}, {0.35, 0.3, 0.35});
    const KktReport report = kkt_verify(bad, 0.0, gm, 1e-4);
    CHECK_FALSE(report.passed);
    CHECK(report.max_violation > 1e-4);
}

TEST_CASE("monotone in constraint and peak") {
    double prev = 1e9;
    for (double B : {0.0, 1.0, 1.6, 1.9}) {
        const double v = gaussian_capacity_energy(GaussianMulticast({1.0, 1.5}, 1.0, B), 33).value;
        CHECK(v <= prev + 1e-6);
        prev = v;
    }
    const double narrow = gaussian_capacity_energy(GaussianMulticast({1.0}, 0.8, 0.0), 33).value;
    const double wide = gaussian_capacity_energy(GaussianMulticast({1.0}, 1.2, 0.0), 33).value;
    CHECK(wide >= narrow - 1e-6);
}

TEST_CASE("infeasible constraint raises with the peak-power cap") {
    CHECK_THROWS_AS(gaussian_capacity_energy(GaussianMulticast({1.0, 1.5}, 1.0, 2.1), 33), InfeasibleError);
    CHECK_THROWS_AS(gaussian_capacity_energy(GaussianMulticast({1.0}, 1.0, 0.0), 2), std::invalid_argument);
}

TEST_SUITE_END();
