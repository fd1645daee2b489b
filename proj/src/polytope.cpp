#include "siet/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace siet {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-11;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Solve M x = rhs (d x d, row-major) by Gaussian elimination with partial
// pivoting.  Returns false when the system is numerically singular.
bool solve_square(std::vector<double>& M, std::vector<double>& rhs, int d) {
    for (int col = 0; col < d; ++col) {
        int pivot = col;
        double best = std::abs(M[static_cast<size_t>(col) * d + col]);
        for (int r = col + 1; r < d; ++r) {
            double v = std::abs(M[static_cast<size_t>(r) * d + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < kPivotTol) return false;
        if (pivot != col) {
            for (int c = 0; c < d; ++c) std::swap(M[static_cast<size_t>(pivot) * d + c], M[static_cast<size_t>(col) * d + c]);
            std::swap(rhs[pivot], rhs[col]);
        }
        const double inv = 1.0 / M[static_cast<size_t>(col) * d + col];
        for (int r = col + 1; r < d; ++r) {
            const double f = M[static_cast<size_t>(r) * d + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < d; ++c) M[static_cast<size_t>(r) * d + c] -= f * M[static_cast<size_t>(col) * d + c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int r = d - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < d; ++c) s -= M[static_cast<size_t>(r) * d + c] * rhs[c];
        rhs[r] = s / M[static_cast<size_t>(r) * d + r];
    }
    return true;
}

struct Inequality {
    std::vector<double> a;  // a.z >= b in the ambient dimension
    double b;
};

// Enumerate vertices of {z : eq.z = eq_rhs, all inequalities hold} and keep
// the one maximizing objective.  Vertices are intersections of dim-1 active
// inequalities with the single equality.
LpPoint best_vertex(const std::vector<Inequality>& ineqs,
                    const std::vector<double>& eq,
                    double eq_rhs,
                    const std::vector<double>& objective,
                    int dim,
                    double coord_bound) {
    LpPoint best;
    best.value = -std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(ineqs.size());
    const int k = dim - 1;
    if (k > m) return best;

    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> M;
    std::vector<double> rhs;
    std::vector<double> z(dim);

    while (true) {
        M.assign(static_cast<size_t>(dim) * dim, 0.0);
        rhs.assign(dim, 0.0);
        for (int c = 0; c < dim; ++c) M[c] = eq[c];
        rhs[0] = eq_rhs;
        for (int r = 0; r < k; ++r) {
            const Inequality& iq = ineqs[idx[r]];
            for (int c = 0; c < dim; ++c) M[static_cast<size_t>(r + 1) * dim + c] = iq.a[c];
            rhs[r + 1] = iq.b;
        }
        if (solve_square(M, rhs, dim)) {
            bool ok = true;
            for (int c = 0; c < dim; ++c) {
                z[c] = rhs[c];
                if (std::abs(z[c]) > coord_bound) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                for (const Inequality& iq : ineqs) {
                    if (dot(iq.a, z) < iq.b - kFeasTol) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) {
                const double val = dot(objective, z);
                if (val > best.value) {
                    best.value = val;
                    best.q = z;
                    best.found = true;
                }
            }
        }
        // next k-combination of {0..m-1}
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

}  // namespace

void project_to_simplex(std::span<double> q) {
    const int n = static_cast<int>(q.size());
    std::vector<double> u(q.begin(), q.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0;
    double theta = 0.0;
    for (int i = 0; i < n; ++i) {
        css += u[i];
        const double t = (css - 1.0) / (i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    for (double& v : q) v = std::max(0.0, v - theta);
}

void project_to_halfspace(std::span<double> q, const HalfSpace& h) {
    const double viol = h.b - dot(q, h.a);
    if (viol <= 0.0) return;
    const double nn = dot(h.a, h.a);
    if (nn <= 0.0) {
        if (h.b > 0.0) throw std::invalid_argument("half-space with zero normal and positive offset is empty");
        return;
    }
    const double f = viol / nn;
    for (size_t i = 0; i < q.size(); ++i) q[i] += f * h.a[i];
}

std::vector<double> project_to_polytope(std::vector<double> q, std::span<const HalfSpace> constraints) {
    const size_t sets = constraints.size() + 1;
    std::vector<std::vector<double>> corr(sets, std::vector<double>(q.size(), 0.0));
    std::vector<double> prev;
    std::vector<double> y(q.size());

    // The cycle-end iterate only lies in the last set; a small step between
    // cycles is not enough to stop on (corrections can drift for several
    // cycles before the iterate moves again), so membership in every set is
    // required as well.
    auto in_all_sets = [&](const std::vector<double>& x) {
        double sum = 0.0;
        for (double v : x) {
            if (v < -1e-12) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) return false;
        for (const HalfSpace& h : constraints) {
            if (dot(h.a, x) < h.b - 1e-12) return false;
        }
        return true;
    };

    for (int cycle = 0; cycle < 100000; ++cycle) {
        prev = q;
        for (size_t s = 0; s < sets; ++s) {
            for (size_t i = 0; i < q.size(); ++i) y[i] = q[i] + corr[s][i];
            std::vector<double> x = y;
            if (s == 0) {
                project_to_simplex(x);
            } else {
                project_to_halfspace(x, constraints[s - 1]);
            }
            for (size_t i = 0; i < q.size(); ++i) corr[s][i] = y[i] - x[i];
            q = std::move(x);
        }
        double change = 0.0;
        for (size_t i = 0; i < q.size(); ++i) change = std::max(change, std::abs(q[i] - prev[i]));
        if (change < 1e-13 && in_all_sets(q)) break;
    }
    // Fallback if the cycle budget ran out: plain alternating projections
    // reach a feasible point (not necessarily the nearest one).
    for (int round = 0; round < 100000 && !in_all_sets(q); ++round) {
        project_to_simplex(q);
        for (const HalfSpace& h : constraints) project_to_halfspace({q.data(), q.size()}, h);
    }
    project_to_simplex(q);
    return q;
}

LpPoint max_linear(std::span<const double> c, std::span<const HalfSpace> constraints) {
    const int n = static_cast<int>(c.size());
    LpPoint best;
    best.value = -std::numeric_limits<double>::infinity();

    if (constraints.size() <= 1) {
        // Vertices: feasible simplex corners plus constraint-plane crossings of edges.
        auto consider = [&](const std::vector<double>& q) {
            double val = dot(c, q);
            if (val > best.value) {
                best.value = val;
                best.q = q;
                best.found = true;
            }
        };
        const HalfSpace* h = constraints.empty() ? nullptr : &constraints[0];
        for (int i = 0; i < n; ++i) {
            if (h == nullptr || h->a[i] >= h->b - kFeasTol) {
                std::vector<double> q(n, 0.0);
                q[i] = 1.0;
                consider(q);
            }
        }
        if (h != nullptr) {
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    const double ai = h->a[i], aj = h->a[j];
                    if (std::abs(ai - aj) < 1e-15) continue;
                    const double alpha = (h->b - aj) / (ai - aj);  // weight on i
                    if (alpha < -kFeasTol || alpha > 1.0 + kFeasTol) continue;
                    std::vector<double> q(n, 0.0);
                    q[i] = std::clamp(alpha, 0.0, 1.0);
                    q[j] = 1.0 - q[i];
                    consider(q);
                }
            }
        }
        return best;
    }

    std::vector<Inequality> ineqs;
    for (int i = 0; i < n; ++i) {
        Inequality iq;
        iq.a.assign(n, 0.0);
        iq.a[i] = 1.0;
        iq.b = 0.0;
        ineqs.push_back(std::move(iq));
    }
    for (const HalfSpace& h : constraints) {
        ineqs.push_back({h.a, h.b});
    }
    std::vector<double> eq(n, 1.0);
    std::vector<double> obj(c.begin(), c.end());
    return best_vertex(ineqs, eq, 1.0, obj, n, 10.0);
}

LpPoint max_min_affine(const std::vector<std::vector<double>>& rows,
                       std::span<const double> offsets,
                       int n,
                       std::span<const HalfSpace> constraints) {
    if (rows.empty()) throw std::invalid_argument("max_min_affine needs at least one affine piece");
    const int dim = n + 1;  // (q, t)

    double t_lo = std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (size_t k = 0; k < rows.size(); ++k) {
        double lo = *std::min_element(rows[k].begin(), rows[k].end());
        t_lo = std::min(t_lo, offsets[k] + lo);
        for (double v : rows[k]) scale = std::max(scale, std::abs(v) + std::abs(offsets[k]));
    }
    t_lo -= 1.0;

    std::vector<Inequality> ineqs;
    for (int i = 0; i < n; ++i) {
        Inequality iq;
        iq.a.assign(dim, 0.0);
        iq.a[i] = 1.0;
        iq.b = 0.0;
        ineqs.push_back(std::move(iq));
    }
    for (size_t k = 0; k < rows.size(); ++k) {
        Inequality iq;
        iq.a.assign(dim, 0.0);
        for (int i = 0; i < n; ++i) iq.a[i] = rows[k][i];
        iq.a[n] = -1.0;
        iq.b = -offsets[k];
        ineqs.push_back(std::move(iq));
    }
    for (const HalfSpace& h : constraints) {
        Inequality iq;
        iq.a.assign(dim, 0.0);
        for (int i = 0; i < n; ++i) iq.a[i] = h.a[i];
        iq.b = h.b;
        ineqs.push_back(std::move(iq));
    }
    {
        Inequality iq;
        iq.a.assign(dim, 0.0);
        iq.a[n] = 1.0;
        iq.b = t_lo;
        ineqs.push_back(std::move(iq));
    }

    std::vector<double> eq(dim, 1.0);
    eq[n] = 0.0;
    std::vector<double> obj(dim, 0.0);
    obj[n] = 1.0;
    LpPoint v = best_vertex(ineqs, eq, 1.0, obj, dim, std::max(10.0, 10.0 * scale));
    if (v.found) v.q.resize(n);  // drop the epigraph coordinate
    return v;
}

FeasibilityResult feasible_point(int n, std::span<const HalfSpace> constraints) {
    FeasibilityResult res;
    if (constraints.empty()) {
        res.feasible = true;
        res.slack = std::numeric_limits<double>::infinity();
        res.witness.assign(n, 1.0 / n);
        return res;
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> offsets;
    for (const HalfSpace& h : constraints) {
        rows.push_back(h.a);
        offsets.push_back(-h.b);
    }
    LpPoint p = max_min_affine(rows, offsets, n, {});
    if (!p.found) {
        res.feasible = false;
        res.slack = -std::numeric_limits<double>::infinity();
        res.witness.assign(n, 1.0 / n);
        for (int l = 0; l < static_cast<int>(constraints.size()); ++l) res.blocking.push_back(l);
        return res;
    }
    res.slack = p.value;
    res.witness = p.q;
    res.feasible = p.value >= -kFeasTol;
    if (!res.feasible) {
        for (size_t l = 0; l < constraints.size(); ++l) {
            const double s = dot(constraints[l].a, p.q) - constraints[l].b;
            if (s <= res.slack + 1e-9) res.blocking.push_back(static_cast<int>(l));
        }
    }
    return res;
}

}  // namespace siet
