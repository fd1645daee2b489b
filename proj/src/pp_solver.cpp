#include "siet/pp_solver.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "dmc_objective.hpp"
#include "siet/errors.hpp"
#include "siet/util.hpp"

namespace siet {

double b_max_single(const Dmc& ch, const EnergyFunctional& b) {
    const std::vector<double> profile = input_energy_profile(ch, b);
    return *std::max_element(profile.begin(), profile.end());
}

CapacityPoint capacity_energy(const Dmc& ch, const EnergyFunctional& b, double B,
                              const SolveOptions& opts) {
    const double bmax = b_max_single(ch, b);
    if (B > bmax + 1e-12) {
        throw InfeasibleError("energy constraint B=" + std::to_string(B) +
                                  " exceeds the deliverable maximum B_max=" + std::to_string(bmax),
                              {0}, bmax);
    }
    std::vector<HalfSpace> cons;
    if (B > 0.0) cons.push_back({input_energy_profile(ch, b), std::min(B, bmax)});

    detail::DmcObjective objective(ch);
    SolveResult r = maximize_min_concave(objective, ch.input_size(), cons, opts);

    CapacityPoint point;
    point.constraint = B;
    point.value = r.value;
    point.optimizer = InputDistribution(r.q);
    point.converged = r.converged;
    point.gap_estimate = r.gap;
    point.iterations = r.iterations;
    return point;
}

CapacityCurve capacity_curve(const Dmc& ch, const EnergyFunctional& b,
                             std::span<const double> grid,
                             const SolveOptions& opts,
                             int threads) {
    if (grid.empty()) throw std::invalid_argument("capacity_curve needs a nonempty grid");
    const double bmax = b_max_single(ch, b);
    for (size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("capacity_curve grid must be strictly ascending");
        }
        if (grid[i] > bmax + 1e-12) {
            throw InfeasibleError("grid point B=" + std::to_string(grid[i]) +
                                      " exceeds B_max=" + std::to_string(bmax),
                                  {0}, bmax);
        }
    }
    CapacityCurve curve;
    curve.points.resize(grid.size());
    parallel_for(static_cast<int>(grid.size()), threads,
                 [&](int i) { curve.points[i] = capacity_energy(ch, b, grid[i], opts); });
    return curve;
}

}  // namespace siet
