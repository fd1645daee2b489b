#include "siet/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "siet/errors.hpp"

namespace siet {

namespace {

constexpr double kLog2E = 1.4426950408889634;
constexpr double kTailSigmas = 8.0;
constexpr double kDensityFloor = 1e-300;

struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// 16-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_16 roots).
void gauss_legendre_16(std::vector<double>& x, std::vector<double>& w) {
    constexpr int n = 16;
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

Quadrature panel_rule(double lo, double hi, int panels) {
    // magic-static keeps the one-time node computation safe under the
    // parallel curve sweeps
    static const std::pair<std::vector<double>, std::vector<double>> base = [] {
        std::vector<double> x, w;
        gauss_legendre_16(x, w);
        return std::make_pair(std::move(x), std::move(w));
    }();
    const auto& [base_x, base_w] = base;
    Quadrature q;
    q.nodes.reserve(static_cast<size_t>(panels) * base_x.size());
    q.weights.reserve(static_cast<size_t>(panels) * base_x.size());
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width;
        const double mid = a + 0.5 * width;
        for (size_t k = 0; k < base_x.size(); ++k) {
            q.nodes.push_back(mid + 0.5 * width * base_x[k]);
            q.weights.push_back(0.5 * width * base_w[k]);
        }
    }
    return q;
}

struct NoiseModel {
    double sigma;
    double log2_norm;       // log2 of 1/(sigma sqrt(2 pi))
    double inv_2s2;         // 1/(2 sigma^2)
    double inv_2s2_log2e;   // converts -d^2/(2 sigma^2) to bits

    explicit NoiseModel(double s)
        : sigma(s),
          log2_norm(-std::log2(s * std::sqrt(2.0 * std::numbers::pi))),
          inv_2s2(1.0 / (2.0 * s * s)),
          inv_2s2_log2e(kLog2E / (2.0 * s * s)) {}

    double density(double d) const { return std::exp2(log2_norm - d * d * inv_2s2_log2e); }
    double log2_density(double d) const { return log2_norm - d * d * inv_2s2_log2e; }
};

// I(X;Y) over a fixed rule: sum_i w_i R_i - sum_j omega_j p_j log2 p_j with
// R_i = int cond * log2 cond.
double mutual_information_on_rule(const DiscreteInputCdf& F, const NoiseModel& noise, const Quadrature& rule) {
    const size_t K = F.support.size();
    const size_t M = rule.nodes.size();
    double info = 0.0;
    std::vector<double> p(M, 0.0);
    for (size_t i = 0; i < K; ++i) {
        const double wi = F.masses[i];
        if (wi == 0.0) continue;
        double ri = 0.0;
        for (size_t j = 0; j < M; ++j) {
            const double d = rule.nodes[j] - F.support[i];
            const double c = noise.density(d);
            p[j] += wi * c;
            if (c > kDensityFloor) ri += rule.weights[j] * c * noise.log2_density(d);
        }
        info += wi * ri;
    }
    for (size_t j = 0; j < M; ++j) {
        if (p[j] > kDensityFloor) info -= rule.weights[j] * p[j] * std::log2(p[j]);
    }
    return info;
}

int initial_panels(double lo, double hi, double sigma) {
    const int by_width = static_cast<int>(std::ceil((hi - lo) / (0.5 * sigma)));
    return std::clamp(by_width, 16, 512);
}

// Doubles the panel count until two consecutive levels agree.
template <typename Eval>
double adaptive(Eval&& eval, double lo, double hi, double sigma, const char* what) {
    int panels = initial_panels(lo, hi, sigma);
    double coarse = eval(panel_rule(lo, hi, panels));
    for (int doubling = 0; doubling < 6; ++doubling) {
        panels *= 2;
        const double fine = eval(panel_rule(lo, hi, panels));
        if (std::abs(fine - coarse) <= 1e-10 * std::max(1.0, std::abs(fine))) return fine;
        coarse = fine;
    }
    throw QuadratureError(std::string(what) + " quadrature did not settle after refinement");
}

double support_extent(const DiscreteInputCdf& F) {
    return std::max(std::abs(F.support.front()), std::abs(F.support.back()));
}

}  // namespace

GaussianMulticast::GaussianMulticast(std::vector<double> sigmas_, double peak_, double constraint_)
    : sigmas(std::move(sigmas_)), peak(peak_), constraint(constraint_) {
    if (sigmas.empty()) throw std::invalid_argument("GaussianMulticast needs at least one receiver");
    for (size_t l = 0; l < sigmas.size(); ++l) {
        if (!(sigmas[l] > 0.0)) {
            throw std::invalid_argument("sigma_" + std::to_string(l) + " must be positive");
        }
    }
    if (!(peak > 0.0)) throw std::invalid_argument("peak amplitude must be positive");
    if (!(constraint >= 0.0)) throw std::invalid_argument("energy constraint must be nonnegative");
}

DiscreteInputCdf::DiscreteInputCdf(std::vector<double> support_, std::vector<double> masses_)
    : support(std::move(support_)), masses(std::move(masses_)) {
    if (support.empty() || support.size() != masses.size()) {
        throw std::invalid_argument("DiscreteInputCdf needs matching nonempty support and masses");
    }
    double sum = 0.0;
    for (size_t i = 0; i < support.size(); ++i) {
        if (i > 0 && !(support[i] > support[i - 1])) {
            throw std::invalid_argument("DiscreteInputCdf support must be strictly increasing");
        }
        if (!(masses[i] >= 0.0)) throw std::invalid_argument("DiscreteInputCdf masses must be nonnegative");
        sum += masses[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("DiscreteInputCdf masses sum to " + std::to_string(sum) + ", expected 1");
    }
    for (double& m : masses) m /= sum;
}

double DiscreteInputCdf::second_moment() const {
    double s = 0.0;
    for (size_t i = 0; i < support.size(); ++i) s += masses[i] * support[i] * support[i];
    return s;
}

double rho(double x, double sigma) { return x * x + sigma * sigma; }

double expected_rho(const DiscreteInputCdf& F, double sigma) {
    return F.second_moment() + sigma * sigma;
}

std::pair<int, int> reduce_channels(const GaussianMulticast& gm) {
    int lmin = 0, lmax = 0;
    for (int l = 1; l < static_cast<int>(gm.sigmas.size()); ++l) {
        if (gm.sigmas[l] < gm.sigmas[lmin]) lmin = l;
        if (gm.sigmas[l] > gm.sigmas[lmax]) lmax = l;
    }
    return {lmin, lmax};
}

double output_density(double y, const DiscreteInputCdf& F, double sigma) {
    const NoiseModel noise(sigma);
    double p = 0.0;
    for (size_t i = 0; i < F.support.size(); ++i) {
        if (F.masses[i] == 0.0) continue;
        p += F.masses[i] * noise.density(y - F.support[i]);
    }
    return p;
}

double gaussian_mutual_information(const DiscreteInputCdf& F, double sigma) {
    const NoiseModel noise(sigma);
    const double extent = support_extent(F);
    return adaptive(
        [&](const Quadrature& rule) { return mutual_information_on_rule(F, noise, rule); },
        -extent - kTailSigmas * sigma, extent + kTailSigmas * sigma, sigma, "mutual information");
}

double marginal_information_density(double x, const DiscreteInputCdf& F, double sigma_lmax) {
    const NoiseModel noise(sigma_lmax);
    const double extent = std::max(support_extent(F), std::abs(x));
    auto eval = [&](const Quadrature& rule) {
        double v = 0.0;
        std::vector<double> p(rule.nodes.size());
        for (size_t j = 0; j < rule.nodes.size(); ++j) p[j] = output_density(rule.nodes[j], F, sigma_lmax);
        for (size_t j = 0; j < rule.nodes.size(); ++j) {
            const double c = noise.density(rule.nodes[j] - x);
            if (c <= kDensityFloor) continue;
            v += rule.weights[j] * c * (noise.log2_density(rule.nodes[j] - x) - std::log2(std::max(p[j], kDensityFloor)));
        }
        return v;
    };
    return adaptive(eval, -extent - kTailSigmas * sigma_lmax, extent + kTailSigmas * sigma_lmax,
                    sigma_lmax, "marginal information density");
}

namespace {

/// I(X;Y(l_max)) over masses on a fixed support grid, as a single-component
/// concave objective for the max-min core.
class GaussianObjective final : public MaxMinObjective {
public:
    GaussianObjective(std::vector<double> support, const NoiseModel& noise, const Quadrature& rule)
        : support_(std::move(support)), noise_(noise), rule_(rule) {
        const size_t K = support_.size();
        const size_t M = rule_.nodes.size();
        cond_.resize(K * M);
        row_term_.assign(K, 0.0);
        for (size_t i = 0; i < K; ++i) {
            for (size_t j = 0; j < M; ++j) {
                const double d = rule_.nodes[j] - support_[i];
                const double c = noise_.density(d);
                cond_[i * M + j] = c;
                if (c > kDensityFloor) row_term_[i] += rule_.weights[j] * c * noise_.log2_density(d);
            }
        }
    }

    int components() const override { return 1; }

    void values(std::span<const double> q, std::span<double> out) const override {
        const size_t M = rule_.nodes.size();
        double info = mix_density(q);
        for (size_t j = 0; j < M; ++j) {
            if (p_[j] > kDensityFloor) info -= rule_.weights[j] * p_[j] * std::log2(p_[j]);
        }
        out[0] = info > 0.0 ? info : 0.0;
    }

    void gradient(int, std::span<const double> q, std::span<double> out) const override {
        const size_t K = support_.size();
        const size_t M = rule_.nodes.size();
        mix_density(q);
        lp_.resize(M);
        for (size_t j = 0; j < M; ++j) lp_[j] = std::log2(std::max(p_[j], kDensityFloor));
        for (size_t i = 0; i < K; ++i) {
            const double* row = &cond_[i * M];
            double marg = row_term_[i];
            for (size_t j = 0; j < M; ++j) {
                if (row[j] > kDensityFloor) marg -= rule_.weights[j] * row[j] * lp_[j];
            }
            out[i] = marg - kLog2E;
        }
    }

private:
    // Output mixture over the rule nodes; also returns sum_i q_i R_i.  The
    // scratch is per-instance, so one objective serves one solver call.
    double mix_density(std::span<const double> q) const {
        const size_t K = support_.size();
        const size_t M = rule_.nodes.size();
        p_.assign(M, 0.0);
        double info = 0.0;
        for (size_t i = 0; i < K; ++i) {
            const double wi = q[i];
            if (wi == 0.0) continue;
            const double* row = &cond_[i * M];
            for (size_t j = 0; j < M; ++j) p_[j] += wi * row[j];
            info += wi * row_term_[i];
        }
        return info;
    }

    std::vector<double> support_;
    NoiseModel noise_;
    Quadrature rule_;
    std::vector<double> cond_;
    std::vector<double> row_term_;
    mutable std::vector<double> p_;
    mutable std::vector<double> lp_;
};

std::vector<double> symmetric_grid(double peak, int grid_size) {
    std::vector<double> x(grid_size);
    for (int i = 0; i < grid_size / 2; ++i) {
        const double v = -peak + 2.0 * peak * i / (grid_size - 1);
        x[i] = v;
        x[grid_size - 1 - i] = -v;
    }
    if (grid_size % 2 == 1) x[grid_size / 2] = 0.0;
    return x;
}

GaussianSolution solve_on_grid(const GaussianMulticast& gm, int grid_size, const SolveOptions& opts);

double value_at(const GaussianMulticast& gm, double B, int grid_size, const SolveOptions& opts) {
    GaussianMulticast shifted = gm;
    shifted.constraint = B;
    return solve_on_grid(shifted, grid_size, opts).value;
}

GaussianSolution solve_on_grid(const GaussianMulticast& gm, int grid_size, const SolveOptions& opts) {
    const auto [lmin, lmax] = reduce_channels(gm);
    const double sigma_min = gm.sigmas[lmin];
    const double sigma_max = gm.sigmas[lmax];
    const double cap = gm.peak * gm.peak + sigma_min * sigma_min;
    if (gm.constraint > cap + 1e-12) {
        throw InfeasibleError("energy constraint B=" + std::to_string(gm.constraint) +
                                  " exceeds the peak-power limit P^2 + sigma_min^2 = " + std::to_string(cap),
                              {lmin}, cap);
    }

    const NoiseModel noise(sigma_max);
    const double lo = -gm.peak - kTailSigmas * sigma_max;
    const double hi = gm.peak + kTailSigmas * sigma_max;
    const std::vector<double> support = symmetric_grid(gm.peak, grid_size);

    // Pick a rule the refinement check accepts, then freeze it for the solve.
    int panels = initial_panels(lo, hi, sigma_max);
    const DiscreteInputCdf probe(support, std::vector<double>(support.size(), 1.0 / support.size()));
    {
        double coarse = mutual_information_on_rule(probe, noise, panel_rule(lo, hi, panels));
        bool settled = false;
        for (int doubling = 0; doubling < 5; ++doubling) {
            const double fine = mutual_information_on_rule(probe, noise, panel_rule(lo, hi, 2 * panels));
            if (std::abs(fine - coarse) <= 1e-10 * std::max(1.0, std::abs(fine))) {
                settled = true;
                break;
            }
            panels *= 2;
            coarse = fine;
        }
        if (!settled) throw QuadratureError("output integration did not settle for the solver grid");
    }
    const Quadrature rule = panel_rule(lo, hi, panels);
    GaussianObjective objective(support, noise, rule);

    std::vector<HalfSpace> cons;
    const double rhs = gm.constraint - sigma_min * sigma_min;
    if (rhs > 0.0) {
        std::vector<double> a(support.size());
        for (size_t i = 0; i < support.size(); ++i) a[i] = support[i] * support[i];
        cons.push_back({std::move(a), rhs});
    }

    SolveOptions local = opts;
    // The sweep refinement does the precision work here; a long ascent tail
    // adds nothing at these support sizes.
    local.max_iterations = std::min<long>(opts.max_iterations, 3000);
    SolveResult r = maximize_min_concave(objective, grid_size, cons, local);

    GaussianSolution sol;
    sol.value = r.value;
    sol.input = DiscreteInputCdf(support, r.q);
    sol.converged = r.converged;
    sol.gap_estimate = r.gap;
    sol.iterations = r.iterations;
    return sol;
}

}  // namespace

KktReport kkt_verify(const DiscreteInputCdf& F0, double lambda, const GaussianMulticast& gm, double tol) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("kkt_verify needs lambda >= 0");
    const auto [lmin, lmax] = reduce_channels(gm);
    const double sigma_min = gm.sigmas[lmin];
    const double sigma_max = gm.sigmas[lmax];
    const NoiseModel noise(sigma_max);

    const double info = gaussian_mutual_information(F0, sigma_max);
    const double ex2 = F0.second_moment();
    const double rhs = info + lambda * ex2;

    // Dense evaluation grid, 10x the support resolution.
    const int points = std::max(641, 10 * static_cast<int>(F0.support.size()) + 1);
    const double lo = -gm.peak - kTailSigmas * sigma_max;
    const double hi = gm.peak + kTailSigmas * sigma_max;
    const Quadrature rule = panel_rule(lo, hi, 2 * initial_panels(lo, hi, sigma_max));
    std::vector<double> lp(rule.nodes.size());
    for (size_t j = 0; j < rule.nodes.size(); ++j) {
        lp[j] = std::log2(std::max(output_density(rule.nodes[j], F0, sigma_max), kDensityFloor));
    }

    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
        const double x = -gm.peak + 2.0 * gm.peak * k / (points - 1);
        double ix = 0.0;
        for (size_t j = 0; j < rule.nodes.size(); ++j) {
            const double d = rule.nodes[j] - x;
            const double c = noise.density(d);
            if (c <= kDensityFloor) continue;
            ix += rule.weights[j] * c * (noise.log2_density(d) - lp[j]);
        }
        worst = std::max(worst, ix + lambda * x * x - rhs);
    }

    KktReport report;
    report.lambda = lambda;
    report.max_violation = worst;
    report.j_value = gm.constraint - sigma_min * sigma_min - ex2;
    report.tolerance = tol;
    report.passed = worst <= tol;
    return report;
}

GaussianSolution gaussian_capacity_energy(const GaussianMulticast& gm, int grid_size, const SolveOptions& opts) {
    if (grid_size < 3) throw std::invalid_argument("grid_size must be at least 3");

    GaussianSolution sol = solve_on_grid(gm, grid_size, opts);

    const auto [lmin, lmax] = reduce_channels(gm);
    const double sigma_min2 = gm.sigmas[lmin] * gm.sigmas[lmin];
    const double cap = gm.peak * gm.peak + sigma_min2;

    // Multiplier of the energy constraint: zero on slack, else the (negated)
    // sensitivity of the value to B by central difference.
    double lambda = 0.0;
    const double slack = sol.input.second_moment() + sigma_min2 - gm.constraint;
    if (gm.constraint > sigma_min2 && slack <= 1e-7) {
        const double h = std::max(1e-6, 1e-4 * gm.constraint);
        const double b_lo = std::max(0.0, gm.constraint - h);
        const double b_hi = std::min(cap, gm.constraint + h);
        const double c_lo = value_at(gm, b_lo, grid_size, opts);
        const double c_hi = value_at(gm, b_hi, grid_size, opts);
        lambda = std::max(0.0, -(c_hi - c_lo) / (b_hi - b_lo));
    }

    sol.kkt = kkt_verify(sol.input, lambda, gm, 1e-4);
    return sol;
}

}  // namespace siet
