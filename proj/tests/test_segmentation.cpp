#include <doctest.h>

#include <cmath>
#include <vector>

#include "siet/errors.hpp"
#include "siet/multicast.hpp"
#include "siet/pp_solver.hpp"
#include "siet/segmentation.hpp"
#include "test_helpers.hpp"

using namespace siet;
using testutil::bsc_capacity;
using testutil::bsc_mi;
using testutil::z_capacity;
using testutil::z_mi;

namespace {

// Reference instance: BSC(0.3), Z(0.6), Z(0.65), Hamming energy, common B.
MulticastProblem three_receivers(double B) {
    return MulticastProblem::common({make_bsc(0.3), make_z(0.6), make_z(0.65)},
                                    EnergyFunctional::hamming(), B);
}

}  // namespace

TEST_SUITE_BEGIN("segmentation");

TEST_CASE("partition enumeration counts and canonical order") {
    const auto s32 = enumerate_partitions(3, 2);
    REQUIRE(s32.size() == 3);  // Stirling S(3,2)
    CHECK(s32[0].groups == std::vector<std::vector<int>>{{0, 1}, {2}});
    CHECK(s32[1].groups == std::vector<std::vector<int>>{{0, 2}, {1}});
    CHECK(s32[2].groups == std::vector<std::vector<int>>{{0}, {1, 2}});
    CHECK(s32[2].to_string() == "{1}{2,3}");

    CHECK(enumerate_partitions(4, 2).size() == 7);  // S(4,2)
    CHECK(enumerate_partitions(4, 4).size() == 1);
    CHECK(enumerate_partitions(1, 1).size() == 1);
    CHECK(enumerate_partitions(5, 3).size() == 25);  // S(5,3)

    CHECK_THROWS_AS(enumerate_partitions(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_partitions(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_partitions(13, 2), std::invalid_argument);
}

TEST_CASE("Segmentation::of validates and canonicalizes") {
    const Segmentation s = Segmentation::of({{2, 1}, {0}}, 3);
    CHECK(s.groups == std::vector<std::vector<int>>{{0}, {1, 2}});
    CHECK_THROWS_AS(Segmentation::of({{0, 1}}, 3), std::invalid_argument);      // misses 2
    CHECK_THROWS_AS(Segmentation::of({{0, 1}, {1, 2}}, 3), std::invalid_argument);  // overlap
    CHECK_THROWS_AS(Segmentation::of({{0}, {}}, 1), std::invalid_argument);
}

TEST_CASE("group capacities against closed forms and a 1-D scan") {
    const MulticastProblem prob = three_receivers(0.0);

    const int singleton[] = {1};
    CHECK(group_capacity(singleton, prob) == doctest::Approx(z_capacity(0.6)).epsilon(1e-6));

    const int bsc_z[] = {0, 1};
    CHECK(group_capacity(bsc_z, prob) == doctest::Approx(bsc_capacity(0.3)).epsilon(1e-6));

    // Z(0.65) is a degraded Z(0.6), so the pair's max-min is Z(0.65)'s own capacity
    const int zz[] = {1, 2};
    const double pair = group_capacity(zz, prob);
    CHECK(pair == doctest::Approx(z_capacity(0.65)).epsilon(1e-5));

    double scan = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double p = k * 1e-5;
        scan = std::max(scan, std::min(z_mi(p, 0.6), z_mi(p, 0.65)));
    }
    CHECK(std::abs(pair - scan) <= 1e-4);
}

TEST_CASE("segmentation loss") {
    const MulticastProblem prob = three_receivers(0.0);
    const int singleton[] = {2};
    CHECK(segmentation_loss(singleton, prob) == 0.0);

    const int bsc_z[] = {0, 1};
    CHECK(segmentation_loss(bsc_z, prob) <= 1e-6);

    // oracle for the Z/Z pair at B=0: scan both terms of the definition
    const int zz[] = {1, 2};
    const double loss = segmentation_loss(zz, prob);
    double joint = 0.0, best6 = 0.0, best65 = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double p = k * 1e-5;
        joint = std::max(joint, std::min(z_mi(p, 0.6), z_mi(p, 0.65)));
        best6 = std::max(best6, z_mi(p, 0.6));
        best65 = std::max(best65, z_mi(p, 0.65));
    }
    const double oracle = std::abs(joint - std::min(best6, best65));
    CHECK(std::abs(loss - oracle) <= 1e-4);
}

TEST_CASE("loss under an active common constraint stays consistent with a scan") {
    const double B = 0.25;
    const MulticastProblem prob = three_receivers(B);
    const int zz[] = {1, 2};
    const double loss = segmentation_loss(zz, prob);

    // feasibility for the pair: 0.4 p >= B and 0.35 p >= B
    double joint = -1.0, best6 = -1.0, best65 = -1.0;
    for (int k = 0; k <= 100000; ++k) {
        const double p = k * 1e-5;
        if (0.4 * p < B || 0.35 * p < B) continue;
        joint = std::max(joint, std::min(z_mi(p, 0.6), z_mi(p, 0.65)));
        best6 = std::max(best6, z_mi(p, 0.6));
        best65 = std::max(best65, z_mi(p, 0.65));
    }
    CHECK(std::abs(loss - std::abs(joint - std::min(best6, best65))) <= 1e-4);
}

TEST_CASE("group capacity never beats any member's individual capacity") {
    Rng rng(2222);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Dmc> chs;
        std::vector<EnergyFunctional> bs;
        std::vector<double> B;
        for (int l = 0; l < 3; ++l) {
            chs.push_back(testutil::random_dmc(rng, 2, 2));
            bs.push_back(testutil::random_energy(rng, 2));
            B.push_back(0.5 * rng.uniform() * b_max_single(chs.back(), bs.back()));
        }
        const MulticastProblem prob(chs, bs, B);
        const int group[] = {0, 1, 2};
        const double cap = group_capacity(group, prob);
        for (int m = 0; m < 3; ++m) {
            CHECK(cap <= capacity_energy(chs[m], bs[m], B[m]).value + 1e-6);
        }
    }
}

TEST_CASE("splitting a group keeps the other groups and can only help the parts") {
    Rng rng(3333);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Dmc> chs;
        std::vector<EnergyFunctional> bs;
        std::vector<double> B;
        for (int l = 0; l < 4; ++l) {
            chs.push_back(testutil::random_dmc(rng, 2, 2));
            bs.push_back(testutil::random_energy(rng, 2));
            B.push_back(0.4 * rng.uniform() * b_max_single(chs.back(), bs.back()));
        }
        const MulticastProblem prob(chs, bs, B);

        const int whole[] = {0, 1, 2};
        const int part_a[] = {0, 2};
        const int part_b[] = {1};
        const int untouched[] = {3};
        const double cap_whole = group_capacity(whole, prob);
        CHECK(group_capacity(part_a, prob) >= cap_whole - 1e-9);
        CHECK(group_capacity(part_b, prob) >= cap_whole - 1e-9);
        // deterministic scores: the untouched group is bit-identical across scans
        CHECK(group_capacity(untouched, prob) == group_capacity(untouched, prob));
    }
}

TEST_CASE("optimize_capacity groups the two Z-channels where the maximum is strict") {
    const auto [seg, score] = optimize_capacity(three_receivers(0.25), 2);
    CHECK(seg.groups == std::vector<std::vector<int>>{{0}, {1, 2}});
    CHECK(score.c_q == doctest::Approx(bsc_capacity(0.3)).epsilon(1e-5));

    // strictness at this constraint: second best is visibly below
    GroupScoreCache cache;
    double second = -1.0;
    for (const Segmentation& s : enumerate_partitions(3, 2)) {
        if (s == seg) continue;
        second = std::max(second, score_segmentation(s, three_receivers(0.25), SolveOptions::multicast_defaults(), &cache).c_q);
    }
    CHECK(score.c_q > second + 1e-3);
}

TEST_CASE("optimize_capacity ties resolve to the first canonical partition") {
    const MulticastProblem same =
        MulticastProblem::common({make_bsc(0.2), make_bsc(0.2), make_bsc(0.2)},
                                 EnergyFunctional::hamming(), 0.0);
    const auto [seg, score] = optimize_capacity(same, 2);
    CHECK(seg.groups == std::vector<std::vector<int>>{{0, 1}, {2}});

    const auto [segk, scorek] = optimize_capacity(same, 3);
    CHECK(segk.groups == std::vector<std::vector<int>>{{0}, {1}, {2}});
    CHECK(scorek.max_loss == 0.0);

    // identical channels: every partition carries zero loss
    GroupScoreCache cache;
    for (const Segmentation& s : enumerate_partitions(3, 2)) {
        CHECK(score_segmentation(s, same, SolveOptions::multicast_defaults(), &cache).max_loss <= 1e-9);
    }
}

TEST_CASE("optimize_loss pairs the BSC with a Z-channel at zero loss") {
    for (double B : {0.0, 0.2}) {
        const auto [seg, score] = optimize_loss(three_receivers(B), 2);
        CHECK(score.max_loss <= 1e-6);
        bool bsc_paired = false;
        for (const auto& g : seg.groups) {
            if (g.size() == 2 && g[0] == 0) bsc_paired = true;
        }
        CHECK(bsc_paired);
    }
}

TEST_CASE("winner beats or ties every partition on re-scan") {
    const MulticastProblem prob = three_receivers(0.15);
    const auto [seg, score] = optimize_capacity(prob, 2);
    GroupScoreCache cache;
    for (const Segmentation& s : enumerate_partitions(3, 2)) {
        const auto other = score_segmentation(s, prob, SolveOptions::multicast_defaults(), &cache);
        CHECK(score.c_q >= other.c_q - 1e-9);
    }
}

TEST_CASE("all partitions infeasible raises") {
    // Z(0.65) cannot deliver 0.4 per symbol
    CHECK_THROWS_AS(optimize_capacity(three_receivers(0.4), 2), InfeasibleError);
}

TEST_SUITE_END();
