#include <doctest.h>

#include <string>
#include <vector>

#include "siet/errors.hpp"
#include "siet/oracle.hpp"
#include "siet/pp_solver.hpp"
#include "test_helpers.hpp"

using namespace siet;
using testutil::bsc_capacity;
using testutil::z_capacity;

TEST_SUITE_BEGIN("pp_solver");

TEST_CASE("b_max_single row energies") {
    const EnergyFunctional b = EnergyFunctional::hamming();
    CHECK(b_max_single(make_bsc(0.12), b) == doctest::Approx(0.88).epsilon(1e-15));
    CHECK(b_max_single(make_bsc(0.4), b) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(b_max_single(make_z(0.3), b) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(b_max_single(make_bsc(0.0), b) == doctest::Approx(1.0));
}

TEST_CASE("unconstrained capacities hit the closed forms") {
    const EnergyFunctional b = EnergyFunctional::hamming();

    const CapacityPoint bsc = capacity_energy(make_bsc(0.12), b, 0.0);
    CHECK(bsc.value == doctest::Approx(bsc_capacity(0.12)).epsilon(1e-6));
    CHECK(bsc.optimizer[0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(bsc.converged);
    CHECK(bsc.gap_estimate < 1e-7);

    const CapacityPoint z = capacity_energy(make_z(0.3), b, 0.0);
    CHECK(z.value == doctest::Approx(z_capacity(0.3)).epsilon(1e-6));
    CHECK(z.converged);
}

TEST_CASE("max-energy constraint forces the degenerate input") {
    const CapacityPoint p = capacity_energy(make_bsc(0.12), EnergyFunctional::hamming(), 0.88);
    CHECK(p.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(p.optimizer[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.converged);
}

TEST_CASE("infeasible constraint names B_max") {
    try {
        capacity_energy(make_bsc(0.12), EnergyFunctional::hamming(), 0.9);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(e.feasible_b_max() == doctest::Approx(0.88));
        CHECK(std::string(e.what()).find("0.88") != std::string::npos);
    }
}

TEST_CASE("constraint below the optimizer's delivered energy is inactive") {
    const EnergyFunctional b = EnergyFunctional::hamming();
    const CapacityPoint free = capacity_energy(make_bsc(0.12), b, 0.0);
    const CapacityPoint low = capacity_energy(make_bsc(0.12), b, 0.3);
    CHECK(low.value == doctest::Approx(free.value).epsilon(1e-6));

    const CapacityPoint z_free = capacity_energy(make_z(0.3), b, 0.0);
    const CapacityPoint z_low = capacity_energy(make_z(0.3), b, 0.2);
    CHECK(z_low.value == doctest::Approx(z_free.value).epsilon(1e-6));
}

TEST_CASE("optimizer always meets its energy constraint") {
    const EnergyFunctional b = EnergyFunctional::hamming();
    for (double B : {0.0, 0.3, 0.5, 0.7, 0.85}) {
        const CapacityPoint p = capacity_energy(make_bsc(0.12), b, B);
        CHECK(received_energy(p.optimizer, make_bsc(0.12), b) >= B - 1e-9);
        CHECK(p.value >= 0.0);
    }
}

TEST_CASE("agreement with the grid oracle on random channels") {
    Rng rng(4242);
    const GridSpec fine(1e-3, 2);
    for (int trial = 0; trial < 10; ++trial) {
        const Dmc ch = testutil::random_dmc(rng, 2, 2 + static_cast<int>(rng.uniform() * 2));
        const EnergyFunctional b = testutil::random_energy(rng, ch.output_size());
        const double B = rng.uniform() * 0.7 * b_max_single(ch, b);
        const CapacityPoint p = capacity_energy(ch, b, B);
        const GridResult g = grid_capacity_energy(MulticastProblem({ch}, {b}, {B}), fine);
        CHECK(std::abs(p.value - g.value) <= 1e-4);
    }
    const GridSpec fine3(1e-3, 3);
    for (int trial = 0; trial < 5; ++trial) {
        const Dmc ch = testutil::random_dmc(rng, 3, 3);
        const EnergyFunctional b = testutil::random_energy(rng, 3);
        const double B = rng.uniform() * 0.7 * b_max_single(ch, b);
        const CapacityPoint p = capacity_energy(ch, b, B);
        const GridResult g = grid_capacity_energy(MulticastProblem({ch}, {b}, {B}), fine3);
        CHECK(std::abs(p.value - g.value) <= 1e-4);
    }
}

TEST_CASE("capacity_curve sweeps") {
    const EnergyFunctional b = EnergyFunctional::hamming();
    const Dmc ch = make_bsc(0.12);

    const CapacityCurve single = capacity_curve(ch, b, std::vector<double>{0.0});
    CHECK(single.points.size() == 1);
    CHECK(single.points[0].value == doctest::Approx(bsc_capacity(0.12)).epsilon(1e-6));

    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.88 * i / 10);
    const CapacityCurve curve = capacity_curve(ch, b, grid);
    for (size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].value <= curve.points[i - 1].value + 1e-9);
    }
    CHECK(curve.points.back().value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(concavity_violation(curve) <= 1e-6);

    CHECK_THROWS_AS(capacity_curve(ch, b, std::vector<double>{0.2, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(capacity_curve(ch, b, std::vector<double>{0.2, 0.9}), InfeasibleError);
}

TEST_SUITE_END();
