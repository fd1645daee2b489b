#pragma once

// Internal glue between the channel algebra and the max-min core.

#include <cmath>
#include <span>
#include <vector>

#include "siet/channel.hpp"
#include "siet/maxmin.hpp"

namespace siet::detail {

/// min over a set of channels of the mutual information, as a MaxMinObjective.
class DmcObjective final : public MaxMinObjective {
public:
    explicit DmcObjective(std::span<const Dmc> channels) {
        for (const Dmc& ch : channels) channels_.push_back(&ch);
    }
    explicit DmcObjective(const Dmc& channel) { channels_.push_back(&channel); }

    int components() const override { return static_cast<int>(channels_.size()); }

    void values(std::span<const double> q, std::span<double> out) const override {
        for (size_t k = 0; k < channels_.size(); ++k) out[k] = mutual_information(q, *channels_[k]);
    }

    // d I / d q_x = D(p(.|x) || p_Y) - log2(e), in bits.  Output symbols with
    // zero marginal are clamped so boundary iterates stay finite.
    void gradient(int k, std::span<const double> q, std::span<double> out) const override {
        const Dmc& ch = *channels_[k];
        const std::vector<double> py = output_distribution(q, ch);
        for (int x = 0; x < ch.input_size(); ++x) {
            auto row = ch.row(x);
            double kl = 0.0;
            for (int y = 0; y < ch.output_size(); ++y) {
                const double p = row[y];
                if (p == 0.0) continue;
                kl += p * std::log2(p / std::max(py[y], 1e-300));
            }
            out[x] = kl - 1.4426950408889634;  // log2(e)
        }
    }

private:
    std::vector<const Dmc*> channels_;
};

/// Half-space a.q >= B per receiver with a positive constraint; `receiver_of`
/// maps half-space index back to the receiver it came from.
inline std::vector<HalfSpace> energy_constraints(const MulticastProblem& prob,
                                                 std::vector<int>* receiver_of = nullptr) {
    std::vector<HalfSpace> cons;
    for (int l = 0; l < prob.num_receivers(); ++l) {
        const double B = prob.constraints()[l];
        if (B <= 0.0) continue;  // vacuous: energies are nonnegative
        cons.push_back({input_energy_profile(prob.channels()[l], prob.energies()[l]), B});
        if (receiver_of != nullptr) receiver_of->push_back(l);
    }
    return cons;
}

}  // namespace siet::detail
