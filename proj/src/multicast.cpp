#include "siet/multicast.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmc_objective.hpp"
#include "siet/errors.hpp"
#include "siet/pp_solver.hpp"
#include "siet/util.hpp"

namespace siet {

namespace {

constexpr double kActiveSetTol = 1e-7;

std::string receiver_list(const std::vector<int>& receivers) {
    std::string s;
    for (size_t i = 0; i < receivers.size(); ++i) {
        if (i > 0) s += ", ";
        s += std::to_string(receivers[i] + 1);
    }
    return s;
}

}  // namespace

double b_max_multicast(std::span<const Dmc> channels, std::span<const EnergyFunctional> energies) {
    if (channels.empty() || channels.size() != energies.size()) {
        throw std::invalid_argument("b_max_multicast needs one energy functional per channel");
    }
    const int n = channels[0].input_size();
    std::vector<std::vector<double>> rows;
    for (size_t l = 0; l < channels.size(); ++l) {
        if (channels[l].input_size() != n) {
            throw std::invalid_argument("b_max_multicast channels must share the input alphabet");
        }
        rows.push_back(input_energy_profile(channels[l], energies[l]));
    }
    const std::vector<double> offsets(rows.size(), 0.0);
    const LpPoint p = max_min_affine(rows, offsets, n, {});
    return p.found ? p.value : 0.0;
}

DomainCheck domain_feasible(const MulticastProblem& prob) {
    std::vector<int> receiver_of;
    const std::vector<HalfSpace> cons = detail::energy_constraints(prob, &receiver_of);
    const FeasibilityResult feas = feasible_point(prob.input_size(), cons);
    DomainCheck check;
    check.feasible = feas.feasible;
    check.witness = feas.witness;
    check.slack = feas.slack;
    for (int c : feas.blocking) check.blocking.push_back(receiver_of[c]);
    return check;
}

MulticastSolution multicast_capacity(const MulticastProblem& prob, const SolveOptions& opts) {
    const DomainCheck check = domain_feasible(prob);
    if (!check.feasible) {
        const double bmax = b_max_multicast(prob.channels(), prob.energies());
        throw InfeasibleError("constraint vector is outside the feasible domain; receivers {" +
                                  receiver_list(check.blocking) +
                                  "} cannot be satisfied jointly (feasible common B_max=" +
                                  std::to_string(bmax) + ")",
                              check.blocking, bmax);
    }

    detail::DmcObjective objective(prob.channels());
    const std::vector<HalfSpace> cons = detail::energy_constraints(prob);
    SolveResult r = maximize_min_concave(objective, prob.input_size(), cons, opts);

    MulticastSolution sol;
    sol.per_channel_mi = r.component_values;
    sol.value = *std::min_element(sol.per_channel_mi.begin(), sol.per_channel_mi.end());
    sol.optimizer = InputDistribution(r.q);
    for (int l = 0; l < prob.num_receivers(); ++l) {
        if (sol.per_channel_mi[l] <= sol.value + kActiveSetTol) sol.active_set.push_back(l);
    }
    sol.converged = r.converged;
    sol.gap_estimate = r.gap;
    sol.iterations = r.iterations;
    return sol;
}

double upper_bound_min_individual(const MulticastProblem& prob, const SolveOptions& opts) {
    double bound = std::numeric_limits<double>::infinity();
    for (int l = 0; l < prob.num_receivers(); ++l) {
        const CapacityPoint p =
            capacity_energy(prob.channels()[l], prob.energies()[l], prob.constraints()[l], opts);
        bound = std::min(bound, p.value);
    }
    return bound;
}

std::vector<MulticastCurvePoint> per_channel_curves(std::span<const Dmc> channels,
                                                    std::span<const EnergyFunctional> energies,
                                                    std::span<const double> common_b_grid,
                                                    const SolveOptions& opts,
                                                    int threads) {
    std::vector<Dmc> chs(channels.begin(), channels.end());
    std::vector<EnergyFunctional> bs(energies.begin(), energies.end());
    std::vector<MulticastCurvePoint> curve(common_b_grid.size());
    parallel_for(static_cast<int>(common_b_grid.size()), threads, [&](int i) {
        const MulticastProblem prob = MulticastProblem(
            chs, bs, std::vector<double>(chs.size(), common_b_grid[i]));
        curve[i].constraint = common_b_grid[i];
        curve[i].solution = multicast_capacity(prob, opts);
    });
    return curve;
}

}  // namespace siet
