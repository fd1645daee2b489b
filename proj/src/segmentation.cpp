#include "siet/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dmc_objective.hpp"
#include "siet/errors.hpp"
#include "siet/multicast.hpp"

namespace siet {

namespace {

constexpr double kTieTol = 1e-9;

void check_partition_args(int L, int K) {
    if (L < 1 || L > 12) {
        throw std::invalid_argument("receiver count must lie in [1, 12], got " + std::to_string(L));
    }
    if (K < 1 || K > L) {
        throw std::invalid_argument("group count must lie in [1, L], got " + std::to_string(K));
    }
}

}  // namespace

Segmentation Segmentation::of(std::vector<std::vector<int>> groups, int num_receivers) {
    std::vector<bool> seen(num_receivers, false);
    int covered = 0;
    for (auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("segmentation groups must be nonempty");
        std::sort(g.begin(), g.end());
        for (int i : g) {
            if (i < 0 || i >= num_receivers || seen[i]) {
                throw std::invalid_argument("segmentation groups must partition the receiver set");
            }
            seen[i] = true;
            ++covered;
        }
    }
    if (covered != num_receivers) {
        throw std::invalid_argument("segmentation groups must cover every receiver");
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    Segmentation seg;
    seg.groups = std::move(groups);
    return seg;
}

std::string Segmentation::to_string() const {
    std::string s;
    for (const auto& g : groups) {
        s += '{';
        for (size_t i = 0; i < g.size(); ++i) {
            if (i > 0) s += ',';
            s += std::to_string(g[i] + 1);
        }
        s += '}';
    }
    return s;
}

void for_each_partition(int num_receivers, int num_groups,
                        const std::function<void(const Segmentation&)>& visit) {
    check_partition_args(num_receivers, num_groups);
    std::vector<int> assignment(num_receivers, 0);

    auto emit = [&]() {
        std::vector<std::vector<int>> groups(num_groups);
        for (int i = 0; i < num_receivers; ++i) groups[assignment[i]].push_back(i);
        Segmentation seg;
        seg.groups = std::move(groups);  // RGS order is already canonical
        visit(seg);
    };

    // Restricted growth strings in lexicographic order.
    auto rec = [&](auto&& self, int pos, int max_used) -> void {
        if (pos == num_receivers) {
            if (max_used + 1 == num_groups) emit();
            return;
        }
        const int limit = std::min(max_used + 1, num_groups - 1);
        for (int block = 0; block <= limit; ++block) {
            const int next_max = std::max(max_used, block);
            // prune branches that can no longer reach num_groups blocks
            if (num_groups - 1 - next_max > num_receivers - 1 - pos) continue;
            assignment[pos] = block;
            self(self, pos + 1, next_max);
        }
    };
    rec(rec, 1, 0);  // receiver 0 is always in block 0
}

std::vector<Segmentation> enumerate_partitions(int num_receivers, int num_groups) {
    std::vector<Segmentation> all;
    for_each_partition(num_receivers, num_groups, [&](const Segmentation& s) { all.push_back(s); });
    return all;
}

double group_capacity(std::span<const int> group, const MulticastProblem& prob, const SolveOptions& opts) {
    if (group.empty()) throw std::invalid_argument("group_capacity needs a nonempty group");
    return multicast_capacity(prob.restricted_to(group), opts).value;
}

double segmentation_loss(std::span<const int> group, const MulticastProblem& prob, const SolveOptions& opts) {
    if (group.empty()) throw std::invalid_argument("segmentation_loss needs a nonempty group");
    if (group.size() == 1) return 0.0;

    const MulticastProblem sub = prob.restricted_to(group);
    const double joint = multicast_capacity(sub, opts).value;

    // Each member individually optimized but still under the group's full
    // constraint set.
    const std::vector<HalfSpace> cons = detail::energy_constraints(sub);
    double individual = std::numeric_limits<double>::infinity();
    for (int m = 0; m < sub.num_receivers(); ++m) {
        detail::DmcObjective objective(sub.channels()[m]);
        const SolveResult r = maximize_min_concave(objective, sub.input_size(), cons, opts);
        individual = std::min(individual, r.value);
    }
    return std::abs(joint - individual);
}

double GroupScoreCache::capacity(std::span<const int> group, const MulticastProblem& prob,
                                 const SolveOptions& opts) {
    std::vector<int> key(group.begin(), group.end());
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end() && it->second.capacity) return *it->second.capacity;
    }
    const double value = group_capacity(group, prob, opts);
    std::lock_guard lock(mutex_);
    entries_[key].capacity = value;
    return value;
}

double GroupScoreCache::loss(std::span<const int> group, const MulticastProblem& prob,
                             const SolveOptions& opts) {
    std::vector<int> key(group.begin(), group.end());
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end() && it->second.loss) return *it->second.loss;
    }
    const double value = segmentation_loss(group, prob, opts);
    std::lock_guard lock(mutex_);
    entries_[key].loss = value;
    return value;
}

SegmentationScore score_segmentation(const Segmentation& seg, const MulticastProblem& prob,
                                     const SolveOptions& opts, GroupScoreCache* cache) {
    GroupScoreCache local;
    GroupScoreCache& memo = cache != nullptr ? *cache : local;
    SegmentationScore score;
    score.c_q = std::numeric_limits<double>::infinity();
    score.max_loss = 0.0;
    for (const auto& g : seg.groups) {
        const double cap = memo.capacity(g, prob, opts);
        const double loss = memo.loss(g, prob, opts);
        score.per_group_capacity.push_back(cap);
        score.per_group_loss.push_back(loss);
        score.c_q = std::min(score.c_q, cap);
        score.max_loss = std::max(score.max_loss, loss);
    }
    return score;
}

namespace {

template <typename Better>
std::pair<Segmentation, SegmentationScore> optimize(const MulticastProblem& prob, int num_groups,
                                                    const SolveOptions& opts, Better&& better,
                                                    bool need_loss) {
    check_partition_args(prob.num_receivers(), num_groups);
    GroupScoreCache cache;
    std::optional<Segmentation> best;
    SegmentationScore best_score;
    double best_key = 0.0;
    int total = 0;

    for_each_partition(prob.num_receivers(), num_groups, [&](const Segmentation& seg) {
        ++total;
        try {
            SegmentationScore score;
            score.c_q = std::numeric_limits<double>::infinity();
            for (const auto& g : seg.groups) {
                const double cap = cache.capacity(g, prob, opts);
                score.per_group_capacity.push_back(cap);
                score.c_q = std::min(score.c_q, cap);
                if (need_loss) {
                    const double loss = cache.loss(g, prob, opts);
                    score.per_group_loss.push_back(loss);
                    score.max_loss = std::max(score.max_loss, loss);
                }
            }
            const double key = need_loss ? score.max_loss : score.c_q;
            if (!best || better(key, best_key)) {
                best = seg;
                best_score = std::move(score);
                best_key = key;
            }
        } catch (const InfeasibleError&) {
            // partitions with an unsatisfiable group drop out of the scan
        }
    });

    if (!best) {
        throw InfeasibleError("all " + std::to_string(total) + " partitions have an infeasible group",
                              {}, std::numeric_limits<double>::quiet_NaN());
    }
    // Fill in whichever side the scan skipped for the winner.
    if (!need_loss) {
        for (const auto& g : best->groups) {
            best_score.per_group_loss.push_back(cache.loss(g, prob, opts));
            best_score.max_loss = std::max(best_score.max_loss, best_score.per_group_loss.back());
        }
    }
    return {*best, best_score};
}

}  // namespace

std::pair<Segmentation, SegmentationScore> optimize_capacity(const MulticastProblem& prob,
                                                             int num_groups,
                                                             const SolveOptions& opts) {
    return optimize(prob, num_groups, opts,
                    [](double key, double best) { return key > best + kTieTol; }, false);
}

std::pair<Segmentation, SegmentationScore> optimize_loss(const MulticastProblem& prob,
                                                         int num_groups,
                                                         const SolveOptions& opts) {
    return optimize(prob, num_groups, opts,
                    [](double key, double best) { return key < best - kTieTol; }, true);
}

}  // namespace siet
