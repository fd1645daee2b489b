#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "siet/channel.hpp"
#include "siet/maxmin.hpp"

namespace siet {

/// Partition of receiver indices {0..L-1} into disjoint nonempty groups.
/// Canonical form: each group ascending, groups ordered by smallest element.
struct Segmentation {
    std::vector<std::vector<int>> groups;

    static Segmentation of(std::vector<std::vector<int>> groups, int num_receivers);

    int num_groups() const { return static_cast<int>(groups.size()); }
    std::string to_string() const;  // 1-based, e.g. "{1,2}{3}"

    bool operator==(const Segmentation&) const = default;
};

/// All partitions of {0..L-1} into exactly K nonempty groups, emitted once
/// each in canonical (restricted-growth-string) order.  Desk scale: L <= 12.
void for_each_partition(int num_receivers, int num_groups,
                        const std::function<void(const Segmentation&)>& visit);
std::vector<Segmentation> enumerate_partitions(int num_receivers, int num_groups);

/// Compound capacity of one group under the group's joint constraints.
double group_capacity(std::span<const int> group, const MulticastProblem& prob,
                      const SolveOptions& opts = SolveOptions::multicast_defaults());

/// |C_group - min over members of the individually optimized rate under the
/// group's joint constraint set|; exactly zero for singletons.
double segmentation_loss(std::span<const int> group, const MulticastProblem& prob,
                         const SolveOptions& opts = SolveOptions::multicast_defaults());

struct SegmentationScore {
    std::vector<double> per_group_capacity;
    double c_q = 0.0;  // min over groups
    std::vector<double> per_group_loss;
    double max_loss = 0.0;
};

/// Memo of group scores keyed by the index set; safe for concurrent reuse.
class GroupScoreCache {
public:
    double capacity(std::span<const int> group, const MulticastProblem& prob, const SolveOptions& opts);
    double loss(std::span<const int> group, const MulticastProblem& prob, const SolveOptions& opts);

private:
    struct Entry {
        std::optional<double> capacity;
        std::optional<double> loss;
    };
    std::map<std::vector<int>, Entry> entries_;
    std::mutex mutex_;
};

SegmentationScore score_segmentation(const Segmentation& seg, const MulticastProblem& prob,
                                     const SolveOptions& opts = SolveOptions::multicast_defaults(),
                                     GroupScoreCache* cache = nullptr);

/// Exhaustive argmax of C_Q over all K-partitions.  Ties (within 1e-9) go to
/// the earliest partition in canonical order.  Partitions with an infeasible
/// group are skipped; if every partition is infeasible, InfeasibleError.
std::pair<Segmentation, SegmentationScore> optimize_capacity(
    const MulticastProblem& prob, int num_groups,
    const SolveOptions& opts = SolveOptions::multicast_defaults());

/// Exhaustive argmin of max_k loss, same tie-breaking and error contract.
std::pair<Segmentation, SegmentationScore> optimize_loss(
    const MulticastProblem& prob, int num_groups,
    const SolveOptions& opts = SolveOptions::multicast_defaults());

}  // namespace siet
