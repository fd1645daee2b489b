#pragma once

#include <span>
#include <vector>

namespace siet {

/// Discrete memoryless channel: a row-stochastic transition matrix.
/// rows()[x*output_size()+y] = p(y|x).  Rows are validated to sum to 1
/// within 1e-12 on construction and then renormalized exactly.
class Dmc {
public:
    Dmc(int input_size, int output_size, std::vector<double> rows);

    int input_size() const { return input_size_; }
    int output_size() const { return output_size_; }
    double operator()(int x, int y) const { return rows_[static_cast<size_t>(x) * output_size_ + y]; }
    std::span<const double> row(int x) const {
        return {rows_.data() + static_cast<size_t>(x) * output_size_, static_cast<size_t>(output_size_)};
    }
    std::span<const double> rows() const { return rows_; }

    bool operator==(const Dmc&) const = default;

private:
    int input_size_;
    int output_size_;
    std::vector<double> rows_;
};

/// Binary symmetric channel with crossover probability eps.
Dmc make_bsc(double eps);

/// Z-channel: input 0 is never corrupted, input 1 flips to 0 with probability eps0.
Dmc make_z(double eps0);

/// Nonnegative per-output-symbol harvested energy b(y).
class EnergyFunctional {
public:
    explicit EnergyFunctional(std::vector<double> values);

    /// Hamming weight of a binary output: b = [0, 1].
    static EnergyFunctional hamming();

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int y) const { return values_[y]; }
    std::span<const double> values() const { return values_; }

    bool operator==(const EnergyFunctional&) const = default;

private:
    std::vector<double> values_;
};

/// Point on the input probability simplex.  Entries are validated
/// nonnegative with sum 1 within 1e-12, then renormalized exactly.
class InputDistribution {
public:
    explicit InputDistribution(std::vector<double> probs);

    static InputDistribution uniform(int n);
    static InputDistribution point_mass(int n, int x);

    int size() const { return static_cast<int>(probs_.size()); }
    double operator[](int x) const { return probs_[x]; }
    std::span<const double> probs() const { return probs_; }

    bool operator==(const InputDistribution&) const = default;

private:
    std::vector<double> probs_;
};

/// Output marginal p_Y(y) = sum_x q(x) p(y|x).
std::vector<double> output_distribution(const InputDistribution& q, const Dmc& ch);
std::vector<double> output_distribution(std::span<const double> q, const Dmc& ch);

/// Mutual information I(X;Y) in bits per symbol, with the 0 log 0 := 0 convention.
double mutual_information(const InputDistribution& q, const Dmc& ch);
double mutual_information(std::span<const double> q, const Dmc& ch);

/// Expected harvested energy E[b(Y)] = q . P . b for a single channel use.
double received_energy(const InputDistribution& q, const Dmc& ch, const EnergyFunctional& b);
double received_energy(std::span<const double> q, const Dmc& ch, const EnergyFunctional& b);

/// Per-input expected energy vector (P . b)[x]; received_energy is its dot with q.
std::vector<double> input_energy_profile(const Dmc& ch, const EnergyFunctional& b);

/// A compound-channel instance: L channels sharing an input alphabet, each with
/// its own energy functional and minimum-energy constraint B_l.
class MulticastProblem {
public:
    MulticastProblem(std::vector<Dmc> channels,
                     std::vector<EnergyFunctional> energies,
                     std::vector<double> constraints);

    /// Convenience: one energy functional and one B duplicated across receivers.
    static MulticastProblem common(std::vector<Dmc> channels, const EnergyFunctional& b, double B);

    int num_receivers() const { return static_cast<int>(channels_.size()); }
    int input_size() const { return channels_.front().input_size(); }
    const std::vector<Dmc>& channels() const { return channels_; }
    const std::vector<EnergyFunctional>& energies() const { return energies_; }
    const std::vector<double>& constraints() const { return constraints_; }

    /// Same channels/energies, different constraint vector.
    MulticastProblem with_constraints(std::vector<double> constraints) const;

    /// Sub-problem restricted to a set of receiver indices.
    MulticastProblem restricted_to(std::span<const int> receivers) const;

private:
    std::vector<Dmc> channels_;
    std::vector<EnergyFunctional> energies_;
    std::vector<double> constraints_;
};

}  // namespace siet
