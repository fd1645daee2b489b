#pragma once

#include <span>
#include <vector>

#include "siet/channel.hpp"
#include "siet/maxmin.hpp"

namespace siet {

struct MulticastSolution {
    double value = 0.0;  // min over receivers of I(q*;P(l)), bits per symbol
    InputDistribution optimizer{std::vector<double>{1.0}};
    std::vector<double> per_channel_mi;
    std::vector<int> active_set;  // receivers attaining the min within 1e-7
    bool converged = false;
    double gap_estimate = 0.0;
    long iterations = 0;
};

/// Compound capacity-energy: max over admissible q of min_l I(q;P(l)).
/// Throws InfeasibleError naming the blocking receivers and the common-B
/// feasibility limit when the constraint vector is outside the domain.
MulticastSolution multicast_capacity(const MulticastProblem& prob,
                                     const SolveOptions& opts = SolveOptions::multicast_defaults());

/// Largest common B for which the multicast problem is feasible:
/// max over the simplex of min_l q.P(l).b_l, solved exactly as an LP.
double b_max_multicast(std::span<const Dmc> channels, std::span<const EnergyFunctional> energies);

struct DomainCheck {
    bool feasible = false;
    std::vector<double> witness;  // admissible q when feasible, best-slack q otherwise
    double slack = 0.0;           // max-min constraint slack over the simplex
    std::vector<int> blocking;    // receivers pinning the slack when infeasible
};

/// Membership test for the constraint-vector domain (is some q admissible?).
DomainCheck domain_feasible(const MulticastProblem& prob);

/// min_l C(B_l) over the individual channels; always an upper bound on
/// multicast_capacity.
double upper_bound_min_individual(const MulticastProblem& prob,
                                  const SolveOptions& opts = SolveOptions::pp_defaults());

struct MulticastCurvePoint {
    double constraint = 0.0;  // common B
    MulticastSolution solution;
};

/// Multicast solutions over a grid of common B values, with the per-channel
/// mutual informations evaluated at each optimizer.
std::vector<MulticastCurvePoint> per_channel_curves(std::span<const Dmc> channels,
                                                    std::span<const EnergyFunctional> energies,
                                                    std::span<const double> common_b_grid,
                                                    const SolveOptions& opts = SolveOptions::multicast_defaults(),
                                                    int threads = 1);

}  // namespace siet
