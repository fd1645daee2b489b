#pragma once

#include <span>
#include <vector>

#include "siet/polytope.hpp"

namespace siet {

/// Pointwise minimum of finitely many concave functions on the simplex.
/// One instance serves one solver call; implementations may keep scratch
/// buffers, so share across threads only by constructing per call.
class MaxMinObjective {
public:
    virtual ~MaxMinObjective() = default;
    virtual int components() const = 0;
    /// Writes f_k(q) for every component k.
    virtual void values(std::span<const double> q, std::span<double> out) const = 0;
    /// Writes a supergradient of f_k at q (same units as values).
    virtual void gradient(int k, std::span<const double> q, std::span<double> out) const = 0;
};

struct SolveOptions {
    double gap_tolerance = 1e-7;
    long max_iterations = 200000;
    int stall_window = 200;
    double stall_improvement = 1e-9;
    bool refine = true;

    static SolveOptions pp_defaults() { return {}; }
    static SolveOptions multicast_defaults() {
        SolveOptions o;
        o.gap_tolerance = 1e-6;
        return o;
    }
};

struct SolveResult {
    std::vector<double> q;
    double value = 0.0;                    // min_k f_k(q)
    std::vector<double> component_values;  // f_k(q)
    double gap = 0.0;                      // linearized upper bound minus value
    bool converged = false;
    long iterations = 0;
};

/// Maximize min_k f_k(q) over {q in simplex : a_l.q >= b_l for all l}.
///
/// Projected supergradient ascent (step c/sqrt(t), iterate averaging,
/// Dykstra projections) followed by coordinate-pair refinement with
/// golden-section line search.  The reported gap is the exact LP bound
/// max over the polytope of the pointwise-min of the component
/// linearizations, minus the achieved value.
SolveResult maximize_min_concave(const MaxMinObjective& objective,
                                 int n,
                                 std::span<const HalfSpace> constraints,
                                 const SolveOptions& opts = {});

}  // namespace siet
