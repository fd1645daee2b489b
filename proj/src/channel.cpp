#include "siet/channel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace siet {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

}  // namespace

Dmc::Dmc(int input_size, int output_size, std::vector<double> rows)
    : input_size_(input_size), output_size_(output_size), rows_(std::move(rows)) {
    if (input_size_ < 1 || output_size_ < 1) {
        throw std::invalid_argument("Dmc alphabets must be nonempty");
    }
    if (rows_.size() != static_cast<size_t>(input_size_) * output_size_) {
        throw std::invalid_argument("Dmc matrix has " + std::to_string(rows_.size()) +
                                    " entries, expected " + std::to_string(input_size_ * output_size_));
    }
    for (int x = 0; x < input_size_; ++x) {
        double sum = 0.0;
        for (int y = 0; y < output_size_; ++y) {
            double p = rows_[static_cast<size_t>(x) * output_size_ + y];
            if (!(p >= 0.0 && p <= 1.0 + kSumTolerance)) {
                throw std::invalid_argument("Dmc row " + std::to_string(x) + " has entry " +
                                            std::to_string(p) + " outside [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kSumTolerance) {
            throw std::invalid_argument("Dmc row " + std::to_string(x) + " sums to " +
                                        std::to_string(sum) + ", expected 1");
        }
        for (int y = 0; y < output_size_; ++y) {
            rows_[static_cast<size_t>(x) * output_size_ + y] /= sum;
        }
    }
}

Dmc make_bsc(double eps) {
    check_probability(eps, "BSC crossover probability");
    return Dmc(2, 2, {1.0 - eps, eps, eps, 1.0 - eps});
}

Dmc make_z(double eps0) {
    check_probability(eps0, "Z-channel 1-to-0 probability");
    return Dmc(2, 2, {1.0, 0.0, eps0, 1.0 - eps0});
}

EnergyFunctional::EnergyFunctional(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("EnergyFunctional must cover a nonempty output alphabet");
    }
    for (size_t y = 0; y < values_.size(); ++y) {
        if (!(values_[y] >= 0.0)) {
            throw std::invalid_argument("EnergyFunctional entry " + std::to_string(y) +
                                        " is negative: " + std::to_string(values_[y]));
        }
    }
}

EnergyFunctional EnergyFunctional::hamming() { return EnergyFunctional({0.0, 1.0}); }

InputDistribution::InputDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw std::invalid_argument("InputDistribution must be nonempty");
    }
    double sum = 0.0;
    for (size_t x = 0; x < probs_.size(); ++x) {
        if (!(probs_[x] >= 0.0)) {
            throw std::invalid_argument("InputDistribution entry " + std::to_string(x) +
                                        " is negative: " + std::to_string(probs_[x]));
        }
        sum += probs_[x];
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw std::invalid_argument("InputDistribution sums to " + std::to_string(sum) +
                                    ", expected 1");
    }
    for (double& p : probs_) p /= sum;
}

InputDistribution InputDistribution::uniform(int n) {
    return InputDistribution(std::vector<double>(n, 1.0 / n));
}

InputDistribution InputDistribution::point_mass(int n, int x) {
    std::vector<double> p(n, 0.0);
    p.at(x) = 1.0;
    return InputDistribution(std::move(p));
}

std::vector<double> output_distribution(std::span<const double> q, const Dmc& ch) {
    if (q.size() != static_cast<size_t>(ch.input_size())) {
        throw std::invalid_argument("input distribution has " + std::to_string(q.size()) +
                                    " entries, channel expects " + std::to_string(ch.input_size()));
    }
    std::vector<double> py(ch.output_size(), 0.0);
    for (int x = 0; x < ch.input_size(); ++x) {
        const double qx = q[x];
        if (qx == 0.0) continue;
        auto row = ch.row(x);
        for (int y = 0; y < ch.output_size(); ++y) py[y] += qx * row[y];
    }
    return py;
}

std::vector<double> output_distribution(const InputDistribution& q, const Dmc& ch) {
    return output_distribution(q.probs(), ch);
}

double mutual_information(std::span<const double> q, const Dmc& ch) {
    const std::vector<double> py = output_distribution(q, ch);
    double info = 0.0;
    for (int x = 0; x < ch.input_size(); ++x) {
        const double qx = q[x];
        if (qx == 0.0) continue;
        auto row = ch.row(x);
        for (int y = 0; y < ch.output_size(); ++y) {
            const double p = row[y];
            if (p == 0.0) continue;  // 0 log 0 := 0, and py[y] >= qx*p > 0 otherwise
            info += qx * p * std::log2(p / py[y]);
        }
    }
    return info > 0.0 ? info : 0.0;
}

double mutual_information(const InputDistribution& q, const Dmc& ch) {
    return mutual_information(q.probs(), ch);
}

double received_energy(std::span<const double> q, const Dmc& ch, const EnergyFunctional& b) {
    if (b.size() != ch.output_size()) {
        throw std::invalid_argument("energy functional covers " + std::to_string(b.size()) +
                                    " symbols, channel emits " + std::to_string(ch.output_size()));
    }
    if (q.size() != static_cast<size_t>(ch.input_size())) {
        throw std::invalid_argument("input distribution size mismatch");
    }
    double e = 0.0;
    for (int x = 0; x < ch.input_size(); ++x) {
        if (q[x] == 0.0) continue;
        auto row = ch.row(x);
        double rowe = 0.0;
        for (int y = 0; y < ch.output_size(); ++y) rowe += row[y] * b[y];
        e += q[x] * rowe;
    }
    return e;
}

double received_energy(const InputDistribution& q, const Dmc& ch, const EnergyFunctional& b) {
    return received_energy(q.probs(), ch, b);
}

std::vector<double> input_energy_profile(const Dmc& ch, const EnergyFunctional& b) {
    if (b.size() != ch.output_size()) {
        throw std::invalid_argument("energy functional covers " + std::to_string(b.size()) +
                                    " symbols, channel emits " + std::to_string(ch.output_size()));
    }
    std::vector<double> profile(ch.input_size(), 0.0);
    for (int x = 0; x < ch.input_size(); ++x) {
        auto row = ch.row(x);
        double e = 0.0;
        for (int y = 0; y < ch.output_size(); ++y) e += row[y] * b[y];
        profile[x] = e;
    }
    return profile;
}

MulticastProblem::MulticastProblem(std::vector<Dmc> channels,
                                   std::vector<EnergyFunctional> energies,
                                   std::vector<double> constraints)
    : channels_(std::move(channels)), energies_(std::move(energies)), constraints_(std::move(constraints)) {
    if (channels_.empty()) {
        throw std::invalid_argument("MulticastProblem needs at least one channel");
    }
    if (energies_.size() != channels_.size() || constraints_.size() != channels_.size()) {
        throw std::invalid_argument("MulticastProblem needs one energy functional and one constraint per channel");
    }
    const int n = channels_.front().input_size();
    for (size_t l = 0; l < channels_.size(); ++l) {
        if (channels_[l].input_size() != n) {
            throw std::invalid_argument("channel " + std::to_string(l) +
                                        " input alphabet differs from channel 0");
        }
        if (energies_[l].size() != channels_[l].output_size()) {
            throw std::invalid_argument("energy functional " + std::to_string(l) +
                                        " length does not match channel output alphabet");
        }
        if (!(constraints_[l] >= 0.0)) {
            throw std::invalid_argument("constraint B_" + std::to_string(l) + " is negative");
        }
    }
}

MulticastProblem MulticastProblem::common(std::vector<Dmc> channels, const EnergyFunctional& b, double B) {
    const size_t count = channels.size();
    return MulticastProblem(std::move(channels),
                            std::vector<EnergyFunctional>(count, b),
                            std::vector<double>(count, B));
}

MulticastProblem MulticastProblem::with_constraints(std::vector<double> constraints) const {
    return MulticastProblem(channels_, energies_, std::move(constraints));
}

MulticastProblem MulticastProblem::restricted_to(std::span<const int> receivers) const {
    std::vector<Dmc> chs;
    std::vector<EnergyFunctional> bs;
    std::vector<double> Bs;
    for (int l : receivers) {
        chs.push_back(channels_.at(l));
        bs.push_back(energies_.at(l));
        Bs.push_back(constraints_.at(l));
    }
    return MulticastProblem(std::move(chs), std::move(bs), std::move(Bs));
}

}  // namespace siet
