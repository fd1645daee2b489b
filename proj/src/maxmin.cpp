#include "siet/maxmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "siet/errors.hpp"

namespace siet {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

constexpr double kActiveTol = 1e-9;
constexpr double kGolden = 0.6180339887498949;

struct Evaluation {
    double value;
    int active;  // lowest index attaining the min within kActiveTol
};

Evaluation evaluate(const MaxMinObjective& obj, std::span<const double> q, std::vector<double>& vals) {
    obj.values(q, vals);
    double m = vals[0];
    for (double v : vals) m = std::min(m, v);
    int active = 0;
    for (size_t k = 0; k < vals.size(); ++k) {
        if (vals[k] <= m + kActiveTol) {
            active = static_cast<int>(k);
            break;
        }
    }
    return {m, active};
}

bool satisfies(std::span<const double> q, std::span<const HalfSpace> cons, double tol) {
    for (const HalfSpace& h : cons) {
        if (dot(h.a, q) < h.b - tol) return false;
    }
    return true;
}

// Maximize a unimodal function on [0, hi] by golden-section; returns the best
// probed point (argument and value).
template <typename F>
std::pair<double, double> golden_max(F&& f, double hi, double f0) {
    double best_t = 0.0;
    double best_v = f0;
    double a = 0.0, b = hi;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    auto track = [&](double t, double v) {
        if (v > best_v) {
            best_v = v;
            best_t = t;
        }
    };
    track(x1, f1);
    track(x2, f2);
    for (int it = 0; it < 90 && (b - a) > 1e-14 * std::max(1.0, hi); ++it) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
            track(x1, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
            track(x2, f2);
        }
    }
    const double fh = f(hi);
    track(hi, fh);
    return {best_t, best_v};
}

// Largest mass t movable from coordinate i to j without leaving the polytope.
double max_transfer(std::span<const double> q, int i, int j, std::span<const HalfSpace> cons) {
    double tmax = q[i];
    for (const HalfSpace& h : cons) {
        const double delta = h.a[j] - h.a[i];
        if (delta >= 0.0) continue;
        const double slack = dot(h.a, q) - h.b;
        tmax = std::min(tmax, std::max(0.0, slack) / (-delta));
    }
    return tmax;
}

// Largest step along an arbitrary direction d (sum d = 0) inside the polytope.
// Directions constructed to lie in a constraint plane carry rounding residue
// in a.d; residues within noise of zero must not choke the step.
double max_step(std::span<const double> q, std::span<const double> d, std::span<const HalfSpace> cons) {
    double tmax = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < q.size(); ++i) {
        if (d[i] < 0.0) tmax = std::min(tmax, q[i] / (-d[i]));
    }
    for (const HalfSpace& h : cons) {
        const double along = dot(h.a, d);
        double magnitude = 0.0;
        for (size_t i = 0; i < q.size(); ++i) magnitude += std::abs(h.a[i] * d[i]);
        if (along >= -1e-12 * std::max(1.0, magnitude)) continue;
        const double slack = dot(h.a, q) - h.b;
        tmax = std::min(tmax, std::max(0.0, slack) / (-along));
    }
    return std::isfinite(tmax) ? tmax : 0.0;
}

class Refiner {
public:
    Refiner(const MaxMinObjective& obj, std::span<const HalfSpace> cons, std::vector<double>& q, int n,
            double gap_tolerance)
        : obj_(obj),
          cons_(cons),
          q_(q),
          n_(n),
          gap_tolerance_(gap_tolerance),
          vals_(obj.components()),
          probe_(q),
          probe_vals_(obj.components()) {}

    // One golden-section line search along e_j - e_i; applies the move when it
    // improves.  Returns the gain.
    double try_pair(int i, int j, double f_cur) {
        if (i == j || q_[i] <= 1e-18) return 0.0;
        const double tmax = max_transfer(q_, i, j, cons_);
        if (tmax <= 1e-16) return 0.0;
        auto phi = [&](double t) {
            probe_ = q_;
            probe_[i] -= t;
            probe_[j] += t;
            if (probe_[i] < 0.0) probe_[i] = 0.0;
            return evaluate(obj_, probe_, probe_vals_).value;
        };
        auto [t_star, v_star] = golden_max(phi, tmax, f_cur);
        if (v_star > f_cur + 1e-15 && t_star > 0.0) {
            q_[i] -= t_star;
            q_[j] += t_star;
            if (q_[i] < 0.0) q_[i] = 0.0;
            return v_star - f_cur;
        }
        return 0.0;
    }

    // Mass exchange i -> {j, k} along a direction that keeps one active
    // constraint tight; pair moves alone cannot travel on that face.
    double try_triple(int i, int j, int k, const HalfSpace& active, double f_cur) {
        if (i == j || i == k || j == k || q_[i] <= 1e-18) return 0.0;
        const double cj = active.a[j], ck = active.a[k], ci = active.a[i];
        if (std::abs(cj - ck) < 1e-15) return 0.0;
        const double alpha = (ci - ck) / (cj - ck);
        if (alpha < 0.0 || alpha > 1.0) return 0.0;
        std::vector<double> d(n_, 0.0);
        d[i] -= 1.0;
        d[j] += alpha;
        d[k] += 1.0 - alpha;
        const double tmax = max_step(q_, d, cons_);
        if (tmax <= 1e-16) return 0.0;
        auto phi = [&](double t) {
            probe_ = q_;
            for (int c = 0; c < n_; ++c) probe_[c] += t * d[c];
            if (probe_[i] < 0.0) probe_[i] = 0.0;
            return evaluate(obj_, probe_, probe_vals_).value;
        };
        auto [t_star, v_star] = golden_max(phi, tmax, f_cur);
        if (v_star > f_cur + 1e-15 && t_star > 0.0) {
            for (int c = 0; c < n_; ++c) q_[c] += t_star * d[c];
            if (q_[i] < 0.0) q_[i] = 0.0;
            return v_star - f_cur;
        }
        return 0.0;
    }

    std::vector<int> active_constraints() const {
        std::vector<int> act;
        for (size_t l = 0; l < cons_.size(); ++l) {
            if (dot(cons_[l].a, q_) - cons_[l].b <= 1e-9) act.push_back(static_cast<int>(l));
        }
        return act;
    }

    // Line search along the segment toward a feasible target point.
    double try_point(const std::vector<double>& target, double f_cur) {
        auto phi = [&](double t) {
            for (int c = 0; c < n_; ++c) probe_[c] = (1.0 - t) * q_[c] + t * target[c];
            return evaluate(obj_, probe_, probe_vals_).value;
        };
        auto [t_star, v_star] = golden_max(phi, 1.0, f_cur);
        if (v_star > f_cur + 1e-15 && t_star > 0.0) {
            for (int c = 0; c < n_; ++c) q_[c] = (1.0 - t_star) * q_[c] + t_star * target[c];
            return v_star - f_cur;
        }
        return 0.0;
    }

    // Line search toward the vertex maximizing the linearized objective; a
    // feasible direction whenever any first-order improvement exists.
    double try_frank_wolfe(double f_cur) {
        const Evaluation ev = evaluate(obj_, q_, vals_);
        std::vector<double> g(n_);
        obj_.gradient(ev.active, q_, g);
        const LpPoint v = max_linear(g, cons_);
        if (!v.found) return 0.0;
        return try_point(v.q, f_cur);
    }

    // Sweep refinement: line-search every improving pair, walk active
    // constraint faces with triples, then take a Frank-Wolfe vertex step.
    // On wide supports the pair scan is filtered by the sweep-start gradient
    // (stale entries just cost the odd extra search) and the loop ends once
    // the Frank-Wolfe certificate puts the remaining gap inside tolerance.
    double refine(double f_cur, int max_sweeps) {
        double total = 0.0;
        std::vector<double> g(n_);
        const bool single = obj_.components() == 1;
        const bool wide = n_ > 16;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            const Evaluation ev = evaluate(obj_, q_, vals_);
            obj_.gradient(ev.active, q_, g);

            const LpPoint vertex = max_linear(g, cons_);
            const double fw_gain = vertex.found ? std::max(0.0, vertex.value - dot(g, q_)) : 0.0;
            if (single && fw_gain <= 0.25 * gap_tolerance_) break;

            double sweep_gain = 0.0;
            for (int i = 0; i < n_; ++i) {
                if (q_[i] <= 1e-18) continue;
                for (int j = 0; j < n_; ++j) {
                    if (i == j) continue;
                    if (wide && g[j] - g[i] <= 1e-16) continue;
                    sweep_gain += try_pair(i, j, f_cur + total + sweep_gain);
                }
            }

            for (int l : active_constraints()) {
                if (!wide) {
                    for (int i = 0; i < n_; ++i) {
                        for (int j = 0; j < n_; ++j) {
                            for (int k = j + 1; k < n_; ++k) {
                                sweep_gain += try_triple(i, j, k, cons_[l], f_cur + total + sweep_gain);
                            }
                        }
                    }
                    continue;
                }
                // guided triples: high-gradient targets plus the coefficient
                // extremes, which any on-face exchange must straddle
                std::vector<int> order(n_);
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](int a, int b) { return g[a] > g[b]; });
                std::vector<int> pool(order.begin(), order.begin() + 6);
                int cmin = 0, cmax = 0;
                for (int c = 1; c < n_; ++c) {
                    if (cons_[l].a[c] < cons_[l].a[cmin]) cmin = c;
                    if (cons_[l].a[c] > cons_[l].a[cmax]) cmax = c;
                }
                pool.push_back(cmin);
                pool.push_back(cmax);
                for (int i = 0; i < n_; ++i) {
                    if (q_[i] <= 1e-15) continue;
                    for (size_t jt = 0; jt < pool.size(); ++jt) {
                        for (size_t kt = jt + 1; kt < pool.size(); ++kt) {
                            const int j = pool[jt], k = pool[kt];
                            const double cj = cons_[l].a[j], ck = cons_[l].a[k];
                            if (std::abs(cj - ck) < 1e-15) continue;
                            const double alpha = (cons_[l].a[i] - ck) / (cj - ck);
                            if (alpha < 0.0 || alpha > 1.0) continue;
                            if (alpha * g[j] + (1.0 - alpha) * g[k] - g[i] <= 1e-16) continue;
                            sweep_gain += try_triple(i, j, k, cons_[l], f_cur + total + sweep_gain);
                        }
                    }
                }
            }

            sweep_gain += try_frank_wolfe(f_cur + total + sweep_gain);
            total += sweep_gain;
            if (sweep_gain < (single ? 1e-15 : 1e-13)) break;
        }
        return total;
    }

private:
    const MaxMinObjective& obj_;
    std::span<const HalfSpace> cons_;
    std::vector<double>& q_;
    int n_;
    double gap_tolerance_;
    std::vector<double> vals_;
    std::vector<double> probe_;
    std::vector<double> probe_vals_;
};

// Soft minimum -tau log2 sum_k 2^(-f_k/tau): a smooth concave stand-in for
// min_k f_k, within tau*log2(K) below it.  Annealing tau lets the smooth
// machinery walk into kink optima that defeat single-exchange moves.
class SoftMinObjective final : public MaxMinObjective {
public:
    SoftMinObjective(const MaxMinObjective& inner, int n, double tau)
        : inner_(inner), tau_(tau), f_(inner.components()), gk_(n) {}

    int components() const override { return 1; }

    void values(std::span<const double> q, std::span<double> out) const override {
        inner_.values(q, f_);
        out[0] = soft_min(weights_scratch_);
    }

    void gradient(int, std::span<const double> q, std::span<double> out) const override {
        inner_.values(q, f_);
        soft_min(weights_scratch_);
        std::fill(out.begin(), out.end(), 0.0);
        for (int k = 0; k < inner_.components(); ++k) {
            if (weights_scratch_[k] < 1e-18) continue;
            inner_.gradient(k, q, gk_);
            for (size_t i = 0; i < out.size(); ++i) out[i] += weights_scratch_[k] * gk_[i];
        }
    }

private:
    double soft_min(std::vector<double>& weights) const {
        const int K = inner_.components();
        weights.assign(K, 0.0);
        double m = f_[0];
        for (double v : f_) m = std::min(m, v);
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            weights[k] = std::exp2(-(f_[k] - m) / tau_);
            s += weights[k];
        }
        for (double& w : weights) w /= s;
        return m - tau_ * std::log2(s);
    }

    const MaxMinObjective& inner_;
    double tau_;
    mutable std::vector<double> f_;
    mutable std::vector<double> gk_;
    mutable std::vector<double> weights_scratch_;
};

// Exact bound on the optimum from the component linearizations at q: the
// pointwise-min of the tangent planes majorizes min_k f_k, so its maximum
// over the polytope caps the achievable value.  The LP maximizer doubles as
// an ascent target near kinks.
LpPoint linearized_upper_bound(const MaxMinObjective& obj,
                               std::span<const double> q,
                               int n,
                               std::span<const HalfSpace> cons) {
    const int K = obj.components();
    std::vector<double> vals(K);
    obj.values(q, vals);
    std::vector<std::vector<double>> rows(K, std::vector<double>(n));
    std::vector<double> offsets(K);
    for (int k = 0; k < K; ++k) {
        obj.gradient(k, q, rows[k]);
        offsets[k] = vals[k] - dot(rows[k], q);
    }
    LpPoint p;
    if (K == 1) {
        p = max_linear(rows[0], cons);
        if (p.found) p.value += offsets[0];
    } else {
        p = max_min_affine(rows, offsets, n, cons);
    }
    if (!p.found) p.value = std::numeric_limits<double>::infinity();
    return p;
}

}  // namespace

SolveResult maximize_min_concave(const MaxMinObjective& objective,
                                 int n,
                                 std::span<const HalfSpace> constraints,
                                 const SolveOptions& opts) {
    const FeasibilityResult feas = feasible_point(n, constraints);
    if (!feas.feasible) {
        throw InfeasibleError("energy constraints admit no input distribution (max-min slack " +
                                  std::to_string(feas.slack) + ")",
                              feas.blocking, std::numeric_limits<double>::quiet_NaN());
    }

    std::vector<double> q(n, 1.0 / n);
    if (!satisfies(q, constraints, 1e-12)) {
        q = project_to_polytope(q, constraints);
        if (!satisfies(q, constraints, 1e-9)) q = feas.witness;  // degenerate feasible set
        double mass0 = 0.0;
        for (double& v : q) {
            if (v < 0.0) v = 0.0;  // LP witnesses carry tolerance-level noise
            mass0 += v;
        }
        for (double& v : q) v /= mass0;
    }

    const int K = objective.components();
    std::vector<double> vals(K);
    Evaluation ev = evaluate(objective, q, vals);
    std::vector<double> best_q = q;
    double best_value = ev.value;

    std::vector<double> grad(n);
    std::vector<double> step_point(n);
    std::vector<double> avg(n, 0.0);
    std::vector<double> avg_probe(n);
    double window_mark = best_value;
    long iterations = 0;
    const double c0 = 0.5;

    for (long t = 1; t <= opts.max_iterations; ++t) {
        iterations = t;
        objective.gradient(ev.active, q, grad);
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-15) break;
        const double step = c0 / (gnorm * std::sqrt(static_cast<double>(t)));
        for (int i = 0; i < n; ++i) step_point[i] = q[i] + step * grad[i];
        project_to_simplex(step_point);
        if (satisfies(step_point, constraints, 1e-12)) {
            q = step_point;
        } else {
            q = project_to_polytope(step_point, constraints);
        }
        ev = evaluate(objective, q, vals);
        if (ev.value > best_value) {
            best_value = ev.value;
            best_q = q;
        }
        for (int i = 0; i < n; ++i) avg[i] += q[i];

        if (t % opts.stall_window == 0) {
            for (int i = 0; i < n; ++i) avg_probe[i] = avg[i] / static_cast<double>(t);
            if (satisfies(avg_probe, constraints, 0.0)) {
                const Evaluation ea = evaluate(objective, avg_probe, vals);
                if (ea.value > best_value) {
                    best_value = ea.value;
                    best_q = avg_probe;
                }
            }
            if (best_value - window_mark < opts.stall_improvement) break;
            window_mark = best_value;
        }
    }

    q = best_q;
    if (opts.refine) {
        Refiner refiner(objective, constraints, q, n, opts.gap_tolerance);
        best_value += refiner.refine(best_value, 500);
        if (K >= 2) {
            // Kink endgame: where several components tie, single exchanges
            // stall even off the optimum.  Stepping toward the maximizer of
            // the linearization LP ascends the min of the tied components;
            // alternate such steps with sweeps until the gap certificate
            // closes or nothing moves.
            for (int round = 0; round < 100; ++round) {
                const LpPoint bound = linearized_upper_bound(objective, q, n, constraints);
                if (!bound.found || bound.value - best_value <= opts.gap_tolerance) break;
                double gain = refiner.try_point(bound.q, best_value);
                if (gain <= 1e-15) gain += refiner.refine(best_value, 1);
                if (gain <= 1e-15) break;
                best_value += gain;
            }
            // If the certificate still refuses, anneal a smoothed stand-in,
            // polish on the exact objective, and keep whichever point wins.
            if (linearized_upper_bound(objective, q, n, constraints).value - best_value >
                opts.gap_tolerance) {
                const std::vector<double> snapshot = q;
                const double snapshot_value = best_value;
                for (double tau : {1e-4, 1e-6, 1e-8}) {
                    SoftMinObjective soft(objective, n, tau);
                    Refiner soft_refiner(soft, constraints, q, n, std::min(opts.gap_tolerance, tau));
                    std::vector<double> soft_val(1);
                    soft.values(q, soft_val);
                    soft_refiner.refine(soft_val[0], 100);
                }
                std::vector<double> after(K);
                double value = evaluate(objective, q, after).value;
                value += refiner.refine(value, 20);
                for (int round = 0; round < 100; ++round) {
                    const LpPoint bound = linearized_upper_bound(objective, q, n, constraints);
                    if (!bound.found || bound.value - value <= opts.gap_tolerance) break;
                    double gain = refiner.try_point(bound.q, value);
                    if (gain <= 1e-15) gain += refiner.refine(value, 1);
                    if (gain <= 1e-15) break;
                    value += gain;
                }
                if (value > snapshot_value) {
                    best_value = value;
                } else {
                    q = snapshot;
                    best_value = snapshot_value;
                }
            }
        }
    }

    // LP-vertex targets carry tolerance-level negatives; scrub before reporting.
    double mass = 0.0;
    for (double& v : q) {
        if (v < 0.0) v = 0.0;
        mass += v;
    }
    for (double& v : q) v /= mass;

    SolveResult result;
    result.q = q;
    result.component_values.resize(K);
    const Evaluation final_ev = evaluate(objective, q, result.component_values);
    result.value = final_ev.value;
    result.iterations = iterations;
    const double ub = linearized_upper_bound(objective, q, n, constraints).value;
    result.gap = std::max(0.0, ub - result.value);
    result.converged = result.gap <= opts.gap_tolerance;
    return result;
}

}  // namespace siet
