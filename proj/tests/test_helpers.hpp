#pragma once

// Closed forms and generators shared across test suites.  These stay
// independent of the solver code paths they are used to check.

#include <cmath>
#include <vector>

#include "siet/channel.hpp"
#include "siet/util.hpp"

namespace testutil {

inline double hb(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double bsc_capacity(double eps) { return 1.0 - hb(eps); }

// Unconstrained Z-channel capacity log2(1 + 2^{-hb(e0)/(1-e0)}).
inline double z_capacity(double eps0) {
    if (eps0 >= 1.0) return 0.0;
    return std::log2(1.0 + std::exp2(-hb(eps0) / (1.0 - eps0)));
}

// I(X;Y) of a BSC at input P(X=1) = p.
inline double bsc_mi(double p, double eps) { return hb(eps + p * (1.0 - 2.0 * eps)) - hb(eps); }

// I(X;Y) of a Z-channel at input P(X=1) = p.
inline double z_mi(double p, double eps0) { return hb(p * (1.0 - eps0)) - p * hb(eps0); }

inline siet::Dmc random_dmc(siet::Rng& rng, int inputs, int outputs) {
    std::vector<double> rows(static_cast<size_t>(inputs) * outputs);
    for (int x = 0; x < inputs; ++x) {
        double sum = 0.0;
        for (int y = 0; y < outputs; ++y) {
            const double v = 0.05 + rng.uniform();
            rows[static_cast<size_t>(x) * outputs + y] = v;
            sum += v;
        }
        for (int y = 0; y < outputs; ++y) rows[static_cast<size_t>(x) * outputs + y] /= sum;
    }
    return siet::Dmc(inputs, outputs, std::move(rows));
}

inline siet::EnergyFunctional random_energy(siet::Rng& rng, int outputs, double scale = 2.0) {
    std::vector<double> b(outputs);
    for (double& v : b) v = scale * rng.uniform();
    return siet::EnergyFunctional(std::move(b));
}

}  // namespace testutil
