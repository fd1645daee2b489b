#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "siet/channel.hpp"
#include "siet/pp_solver.hpp"

namespace siet {

/// Simplex grid resolution for brute-force scans.  Guarded against grid
/// explosion: step in (0, 0.25], dimension at most 4.
struct GridSpec {
    double step;
    int dimension;
    GridSpec(double step, int dimension);
};

struct GridResult {
    double value = 0.0;          // best feasible grid value (lower bound)
    std::vector<double> argmax;  // grid point attaining it
    double slack = 0.0;          // Lipschitz slack bound for the step size
};

/// Exhaustive scan of min_l I(q;P(l)) over feasible simplex grid points.
/// Throws InfeasibleError when no grid point satisfies the constraints.
GridResult grid_capacity_energy(const MulticastProblem& prob, const GridSpec& grid);

/// Two-letter capacity-energy of binary-input channels: brute-force max over
/// joint input distributions on X^2 (3-simplex grid) with per-receiver energy
/// constraint 2B over the product channels.  Halving the result should
/// recover the one-letter value.
double product_capacity_n2(std::span<const Dmc> channels,
                           std::span<const EnergyFunctional> energies,
                           double B,
                           double step);

/// Worst chord-above-curve violation over consecutive triples; nonpositive
/// for concave data.
double concavity_violation(std::span<const double> constraints, std::span<const double> values);
double concavity_violation(const CapacityCurve& curve);

/// Draw random feasible constraint vectors through the channels and check
/// that every convex combination stays feasible.
bool domain_convexity_probe(const MulticastProblem& prob, int trials, std::uint64_t seed = 0x5eed);

}  // namespace siet
