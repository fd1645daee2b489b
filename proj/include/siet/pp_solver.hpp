#pragma once

#include <span>
#include <vector>

#include "siet/channel.hpp"
#include "siet/maxmin.hpp"

namespace siet {

/// One solved point of a capacity-energy function.
struct CapacityPoint {
    double constraint = 0.0;   // B, energy per symbol
    double value = 0.0;        // C(B), bits per symbol
    InputDistribution optimizer{std::vector<double>{1.0}};
    bool converged = false;
    double gap_estimate = 0.0;
    long iterations = 0;
};

/// Capacity-energy points at strictly increasing constraint values.
struct CapacityCurve {
    std::vector<CapacityPoint> points;
};

/// Largest single-letter deliverable energy max_x (P.b)[x].
double b_max_single(const Dmc& ch, const EnergyFunctional& b);

/// C(B) = max { I(q;P) : q on the simplex, q.P.b >= B }.
/// Throws InfeasibleError when B exceeds b_max_single.
CapacityPoint capacity_energy(const Dmc& ch, const EnergyFunctional& b, double B,
                              const SolveOptions& opts = SolveOptions::pp_defaults());

/// Sweep of capacity_energy over an ascending grid of feasible B values.
CapacityCurve capacity_curve(const Dmc& ch, const EnergyFunctional& b,
                             std::span<const double> grid,
                             const SolveOptions& opts = SolveOptions::pp_defaults(),
                             int threads = 1);

}  // namespace siet
