#include "siet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "siet/errors.hpp"
#include "siet/multicast.hpp"
#include "siet/util.hpp"

namespace siet {

namespace {

// Entropy-gradient magnitude bound with probabilities clipped at 1e-9:
// |dI/dq_x| <= log2(1/1e-9) + log2(e).
constexpr double kGradBound = 29.897352853986263 + 1.4426950408889634;

// Per-channel tables for fast grid evaluation: I(q) = H(p_Y) + sum_x q_x R_x
// with R_x = sum_y p(y|x) log2 p(y|x).
struct ChannelTables {
    const Dmc* ch;
    std::vector<double> row_term;
    std::vector<double> profile;

    double info(std::span<const double> q, std::vector<double>& py) const {
        const int n = ch->input_size();
        const int m = ch->output_size();
        py.assign(m, 0.0);
        double cond = 0.0;
        for (int x = 0; x < n; ++x) {
            const double qx = q[x];
            if (qx == 0.0) continue;
            auto row = ch->row(x);
            for (int y = 0; y < m; ++y) py[y] += qx * row[y];
            cond += qx * row_term[x];
        }
        double hy = 0.0;
        for (int y = 0; y < m; ++y) {
            if (py[y] > 0.0) hy -= py[y] * std::log2(py[y]);
        }
        const double info = hy + cond;
        return info > 0.0 ? info : 0.0;
    }
};

std::vector<ChannelTables> make_tables(const MulticastProblem& prob) {
    std::vector<ChannelTables> tables;
    for (int l = 0; l < prob.num_receivers(); ++l) {
        ChannelTables t;
        t.ch = &prob.channels()[l];
        t.row_term.resize(t.ch->input_size());
        for (int x = 0; x < t.ch->input_size(); ++x) {
            double s = 0.0;
            for (int y = 0; y < t.ch->output_size(); ++y) {
                const double p = (*t.ch)(x, y);
                if (p > 0.0) s += p * std::log2(p);
            }
            t.row_term[x] = s;
        }
        t.profile = input_energy_profile(prob.channels()[l], prob.energies()[l]);
        tables.push_back(std::move(t));
    }
    return tables;
}

// Enumerate compositions of N into dim parts; calls visit(q) for each point.
template <typename Visit>
void scan_simplex(int N, int dim, Visit&& visit) {
    std::vector<int> counts(dim, 0);
    std::vector<double> q(dim, 0.0);
    const double inv = 1.0 / N;

    auto rec = [&](auto&& self, int coord, int remaining) -> void {
        if (coord == dim - 1) {
            counts[coord] = remaining;
            for (int i = 0; i < dim; ++i) q[i] = counts[i] * inv;
            visit(q);
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            counts[coord] = k;
            self(self, coord + 1, remaining - k);
        }
    };
    rec(rec, 0, N);
}

}  // namespace

GridSpec::GridSpec(double step_, int dimension_) : step(step_), dimension(dimension_) {
    if (!(step > 0.0 && step <= 0.25)) {
        throw std::invalid_argument("GridSpec step must lie in (0, 0.25], got " + std::to_string(step));
    }
    if (dimension < 1 || dimension > 4) {
        throw std::invalid_argument("GridSpec dimension must lie in [1, 4], got " + std::to_string(dimension));
    }
}

GridResult grid_capacity_energy(const MulticastProblem& prob, const GridSpec& grid) {
    if (prob.input_size() != grid.dimension) {
        throw std::invalid_argument("GridSpec dimension " + std::to_string(grid.dimension) +
                                    " does not match input alphabet size " +
                                    std::to_string(prob.input_size()));
    }
    const int N = std::max(1, static_cast<int>(std::llround(1.0 / grid.step)));
    const std::vector<ChannelTables> tables = make_tables(prob);
    const std::vector<double>& B = prob.constraints();
    const int L = prob.num_receivers();

    GridResult result;
    result.value = -1.0;
    std::vector<double> py;
    scan_simplex(N, grid.dimension, [&](const std::vector<double>& q) {
        for (int l = 0; l < L; ++l) {
            double energy = 0.0;
            for (int x = 0; x < grid.dimension; ++x) energy += q[x] * tables[l].profile[x];
            if (energy < B[l] - 1e-12) return;
        }
        double worst = std::numeric_limits<double>::infinity();
        for (int l = 0; l < L; ++l) {
            worst = std::min(worst, tables[l].info(q, py));
            if (worst <= result.value) return;  // cannot improve
        }
        if (worst > result.value) {
            result.value = worst;
            result.argmax = q;
        }
    });

    if (result.argmax.empty()) {
        throw InfeasibleError("no feasible grid point at step " + std::to_string(grid.step), {},
                              b_max_multicast(prob.channels(), prob.energies()));
    }
    // effective resolution 1/N, which rounding can leave coarser than asked
    result.slack = kGradBound * (grid.dimension - 1) / N;
    return result;
}

double product_capacity_n2(std::span<const Dmc> channels,
                           std::span<const EnergyFunctional> energies,
                           double B,
                           double step) {
    if (channels.empty() || channels.size() != energies.size()) {
        throw std::invalid_argument("product_capacity_n2 needs one energy functional per channel");
    }
    std::vector<Dmc> products;
    std::vector<EnergyFunctional> pair_energies;
    for (size_t l = 0; l < channels.size(); ++l) {
        const Dmc& ch = channels[l];
        if (ch.input_size() != 2) {
            throw std::invalid_argument("product_capacity_n2 is restricted to binary inputs");
        }
        const int m = ch.output_size();
        std::vector<double> rows(4 * m * m);
        for (int x1 = 0; x1 < 2; ++x1) {
            for (int x2 = 0; x2 < 2; ++x2) {
                for (int y1 = 0; y1 < m; ++y1) {
                    for (int y2 = 0; y2 < m; ++y2) {
                        rows[static_cast<size_t>(2 * x1 + x2) * m * m + y1 * m + y2] =
                            ch(x1, y1) * ch(x2, y2);
                    }
                }
            }
        }
        products.emplace_back(4, m * m, std::move(rows));
        std::vector<double> b2(m * m);
        for (int y1 = 0; y1 < m; ++y1) {
            for (int y2 = 0; y2 < m; ++y2) b2[y1 * m + y2] = energies[l][y1] + energies[l][y2];
        }
        pair_energies.emplace_back(std::move(b2));
    }
    const MulticastProblem pair_problem(std::move(products), std::move(pair_energies),
                                        std::vector<double>(channels.size(), 2.0 * B));
    return grid_capacity_energy(pair_problem, GridSpec(step, 4)).value;
}

double concavity_violation(std::span<const double> constraints, std::span<const double> values) {
    if (constraints.size() != values.size() || constraints.size() < 3) {
        throw std::invalid_argument("concavity probe needs at least 3 matching points");
    }
    double worst = 0.0;
    for (size_t i = 0; i + 2 < constraints.size(); ++i) {
        const double b0 = constraints[i], b1 = constraints[i + 1], b2 = constraints[i + 2];
        if (!(b1 > b0 && b2 > b1)) {
            throw std::invalid_argument("concavity probe needs strictly increasing constraints");
        }
        const double chord = values[i] + (values[i + 2] - values[i]) * (b1 - b0) / (b2 - b0);
        worst = std::max(worst, chord - values[i + 1]);
    }
    return worst;
}

double concavity_violation(const CapacityCurve& curve) {
    std::vector<double> bs, cs;
    for (const CapacityPoint& p : curve.points) {
        bs.push_back(p.constraint);
        cs.push_back(p.value);
    }
    return concavity_violation(bs, cs);
}

bool domain_convexity_probe(const MulticastProblem& prob, int trials, std::uint64_t seed) {
    Rng rng(seed);
    const int L = prob.num_receivers();
    std::vector<std::vector<double>> profiles;
    for (int l = 0; l < L; ++l) {
        profiles.push_back(input_energy_profile(prob.channels()[l], prob.energies()[l]));
    }
    auto constraint_of = [&](const std::vector<double>& q) {
        std::vector<double> B(L, 0.0);
        for (int l = 0; l < L; ++l) {
            for (int x = 0; x < prob.input_size(); ++x) B[l] += q[x] * profiles[l][x];
        }
        return B;
    };
    for (int t = 0; t < trials; ++t) {
        const std::vector<double> B1 = constraint_of(rng.simplex_point(prob.input_size()));
        const std::vector<double> B2 = constraint_of(rng.simplex_point(prob.input_size()));
        const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0, rng.uniform()};
        for (double alpha : alphas) {
            std::vector<double> mix(L);
            for (int l = 0; l < L; ++l) mix[l] = alpha * B1[l] + (1.0 - alpha) * B2[l];
            if (!domain_feasible(prob.with_constraints(mix)).feasible) return false;
        }
    }
    return true;
}

}  // namespace siet
