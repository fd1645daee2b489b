#include <doctest.h>

#include <cmath>
#include <vector>

#include "siet/channel.hpp"
#include "siet/polytope.hpp"
#include "test_helpers.hpp"

using namespace siet;

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("polytope");

TEST_CASE("simplex projection") {
    std::vector<double> a{2.0, 0.0};
    project_to_simplex(a);
    CHECK(a[0] == doctest::Approx(1.0));
    CHECK(a[1] == doctest::Approx(0.0));

    std::vector<double> b{0.6, 0.6};
    project_to_simplex(b);
    CHECK(b[0] == doctest::Approx(0.5));
    CHECK(b[1] == doctest::Approx(0.5));

    std::vector<double> c{-1.0, 0.2, 0.4};
    project_to_simplex(c);
    CHECK(c[0] == doctest::Approx(0.0));
    CHECK(c[1] + c[2] == doctest::Approx(1.0));
    CHECK(c[2] - c[1] == doctest::Approx(0.2));
}

TEST_CASE("halfspace projection") {
    const HalfSpace h{{1.0, 2.0}, 1.0};
    std::vector<double> inside{1.0, 0.5};
    project_to_halfspace(inside, h);
    CHECK(inside[0] == 1.0);  // untouched

    std::vector<double> outside{0.0, 0.0};
    project_to_halfspace(outside, h);
    CHECK(outside[0] * h.a[0] + outside[1] * h.a[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(outside[0] == doctest::Approx(0.2));
    CHECK(outside[1] == doctest::Approx(0.4));
}

TEST_CASE("Dykstra projection agrees with a brute scan in 2-D") {
    // feasible set: simplex with q[1] >= 0.7 (energy 0.7*q1 >= 0.49)
    const std::vector<HalfSpace> cons{{{0.0, 0.7}, 0.49}};
    const std::vector<double> start{0.5, 0.5};
    const auto proj = project_to_polytope(start, cons);
    CHECK(proj[1] >= 0.7 - 1e-9);
    CHECK(proj[0] + proj[1] == doctest::Approx(1.0).epsilon(1e-12));

    double best = 1e9;
    std::vector<double> best_q;
    for (int k = 0; k <= 100000; ++k) {
        const double p1 = k * 1e-5;
        if (0.7 * p1 < 0.49) continue;
        const std::vector<double> q{1.0 - p1, p1};
        const double d = dist2(q, start);
        if (d < best) {
            best = d;
            best_q = q;
        }
    }
    CHECK(dist2(proj, best_q) < 1e-8);
}

TEST_CASE("max_linear over constrained simplex") {
    // maximize q0 subject to 0.12 q0 + 0.88 q1 >= 0.5
    const std::vector<double> c{1.0, 0.0};
    const std::vector<HalfSpace> cons{{{0.12, 0.88}, 0.5}};
    const LpPoint p = max_linear(c, cons);
    REQUIRE(p.found);
    CHECK(p.value == doctest::Approx(0.5).epsilon(1e-9));  // q = (0.5, 0.5) hits the plane
    CHECK(0.12 * p.q[0] + 0.88 * p.q[1] == doctest::Approx(0.5).epsilon(1e-9));

    // unconstrained: best vertex
    const LpPoint free = max_linear(std::vector<double>{0.3, 0.9, 0.1}, {});
    CHECK(free.value == doctest::Approx(0.9));

    // multi-constraint path goes through general vertex enumeration
    const std::vector<HalfSpace> two{{{1.0, 0.0, 0.0}, 0.2}, {{0.0, 1.0, 0.0}, 0.3}};
    const LpPoint gen = max_linear(std::vector<double>{0.0, 0.0, 1.0}, two);
    REQUIRE(gen.found);
    CHECK(gen.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("max_min_affine solves the BSC/Z common-energy program") {
    // B_max for {BSC(0.12), Z(0.3)} with Hamming energy: lines 0.12+0.76p and 0.7p
    const std::vector<std::vector<double>> rows{{0.12, 0.88}, {0.0, 0.7}};
    const std::vector<double> offsets{0.0, 0.0};
    const LpPoint p = max_min_affine(rows, offsets, 2, {});
    REQUIRE(p.found);
    CHECK(p.value == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p.q[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("feasible_point finds witnesses and blockers") {
    // q1 >= 0.5 and q1 <= 0.8 expressed as half-spaces
    const std::vector<HalfSpace> cons{{{0.0, 1.0}, 0.5}, {{0.0, -1.0}, -0.8}};
    const FeasibilityResult ok = feasible_point(2, cons);
    CHECK(ok.feasible);
    CHECK(ok.witness[1] >= 0.5 - 1e-9);
    CHECK(ok.witness[1] <= 0.8 + 1e-9);

    const std::vector<HalfSpace> empty{{{0.0, 1.0}, 0.9}, {{0.0, -1.0}, -0.2}};
    const FeasibilityResult bad = feasible_point(2, empty);
    CHECK_FALSE(bad.feasible);
    CHECK(bad.slack < 0.0);
    CHECK_FALSE(bad.blocking.empty());

    const FeasibilityResult none = feasible_point(3, {});
    CHECK(none.feasible);
    CHECK(none.witness[0] == doctest::Approx(1.0 / 3));
}

TEST_CASE("property: projections land in the feasible set and are idempotent") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 3);
        const Dmc ch = testutil::random_dmc(rng, n, 2 + static_cast<int>(rng.uniform() * 2));
        const EnergyFunctional b = testutil::random_energy(rng, ch.output_size());
        const std::vector<double> profile = input_energy_profile(ch, b);
        const double bmax = *std::max_element(profile.begin(), profile.end());
        const std::vector<HalfSpace> cons{{profile, 0.8 * bmax}};

        std::vector<double> start(n);
        for (double& v : start) v = rng.uniform(-1.0, 1.5);
        const auto proj = project_to_polytope(start, cons);

        double sum = 0.0, energy = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(proj[i] >= -1e-12);
            sum += proj[i];
            energy += proj[i] * profile[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(energy >= 0.8 * bmax - 1e-8);

        const auto again = project_to_polytope(proj, cons);
        CHECK(dist2(proj, again) < 1e-16);
    }
}

TEST_SUITE_END();
