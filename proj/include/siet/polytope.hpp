#pragma once

#include <span>
#include <vector>

namespace siet {

/// Closed half-space {q : a.q >= b}.
struct HalfSpace {
    std::vector<double> a;
    double b = 0.0;
};

/// Euclidean projection onto the probability simplex, in place.
void project_to_simplex(std::span<double> q);

/// Euclidean projection onto a half-space, in place.
void project_to_halfspace(std::span<double> q, const HalfSpace& h);

/// Euclidean projection onto simplex ∩ half-spaces via Dykstra's alternating
/// projections.  The intersection must be nonempty.
std::vector<double> project_to_polytope(std::vector<double> q, std::span<const HalfSpace> constraints);

struct LpPoint {
    double value = 0.0;
    std::vector<double> q;
    bool found = false;
};

/// max c.q over {q in simplex, a_l.q >= b_l} by vertex enumeration.
LpPoint max_linear(std::span<const double> c, std::span<const HalfSpace> constraints);

/// max over the same polytope of min_k (rows[k].q + offsets[k]), solved
/// exactly in epigraph form.  Used for B_max, feasibility and gap bounds.
LpPoint max_min_affine(const std::vector<std::vector<double>>& rows,
                       std::span<const double> offsets,
                       int n,
                       std::span<const HalfSpace> constraints);

struct FeasibilityResult {
    bool feasible = false;
    double slack = 0.0;               // max over simplex of min_l (a_l.q - b_l)
    std::vector<double> witness;      // argmax point (meaningful even when infeasible)
    std::vector<int> blocking;        // constraints attaining the min slack
};

/// Decide whether simplex ∩ half-spaces is nonempty; returns the max-min-slack
/// point as witness and, when infeasible, the constraints that block.
FeasibilityResult feasible_point(int n, std::span<const HalfSpace> constraints);

}  // namespace siet
