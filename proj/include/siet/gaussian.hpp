#pragma once

#include <utility>
#include <vector>

#include "siet/maxmin.hpp"

namespace siet {

/// Multicast over L amplitude-constrained AWGN channels with energy
/// functional b(y) = y^2 and a common received-energy constraint B.
struct GaussianMulticast {
    std::vector<double> sigmas;  // per-receiver noise standard deviations
    double peak;                 // amplitude bound: inputs live in [-peak, peak]
    double constraint;           // B >= 0, energy per symbol

    GaussianMulticast(std::vector<double> sigmas, double peak, double constraint);
};

/// Discrete input distribution on [-P, P]: strictly increasing support with
/// nonnegative masses summing to 1 (validated within 1e-12, renormalized).
struct DiscreteInputCdf {
    std::vector<double> support;
    std::vector<double> masses;

    DiscreteInputCdf(std::vector<double> support, std::vector<double> masses);

    double second_moment() const;  // E[X^2]
};

struct KktReport {
    double lambda = 0.0;
    double max_violation = 0.0;
    double j_value = 0.0;  // J(F) = B - sigma_min^2 - E[X^2]
    bool passed = false;
    double tolerance = 0.0;
};

/// Received energy at one receiver from input x: x^2 + sigma^2.
double rho(double x, double sigma);

/// E[rho(X)] over a discrete input: E[X^2] + sigma^2.
double expected_rho(const DiscreteInputCdf& F, double sigma);

/// (l_min, l_max): indices of the smallest and largest noise variance,
/// ties broken toward the lowest index.  The energy constraint reduces to
/// receiver l_min and the information objective to receiver l_max.
std::pair<int, int> reduce_channels(const GaussianMulticast& gm);

/// Output density p(y;F) of the AWGN channel with noise sigma.
double output_density(double y, const DiscreteInputCdf& F, double sigma);

/// I(X;Y) in bits for a discrete input over AWGN noise sigma, by adaptive
/// Gauss-Legendre panels.  Throws QuadratureError if refinement stalls.
double gaussian_mutual_information(const DiscreteInputCdf& F, double sigma);

/// Marginal information density i(x;F) in bits over the l_max noise level.
double marginal_information_density(double x, const DiscreteInputCdf& F, double sigma_lmax);

/// Check Lagrangian optimality of F0 at multiplier lambda: the maximum over
/// a dense amplitude grid of i(x;F0) + lambda x^2 must not exceed
/// I(X0;Y(l_max)) + lambda E_F0[X^2] by more than tol.
KktReport kkt_verify(const DiscreteInputCdf& F0, double lambda, const GaussianMulticast& gm, double tol);

struct GaussianSolution {
    double value = 0.0;  // C(B,P) in bits per symbol
    DiscreteInputCdf input{{0.0}, {1.0}};
    KktReport kkt;
    bool converged = false;
    double gap_estimate = 0.0;
    long iterations = 0;
};

/// C(B,P) maximized over distributions on a symmetric grid of `grid_size`
/// points in [-P, P] subject to E[X^2] + sigma_min^2 >= B, with a KKT report
/// evaluated on a 10x finer grid.  Throws InfeasibleError when B exceeds
/// P^2 + sigma_min^2.
GaussianSolution gaussian_capacity_energy(const GaussianMulticast& gm,
                                          int grid_size = 65,
                                          const SolveOptions& opts = SolveOptions::pp_defaults());

}  // namespace siet
