#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace siet {

/// Requested energy constraint cannot be met by any input distribution.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(std::string message, std::vector<int> receivers, double feasible_b_max)
        : std::runtime_error(std::move(message)),
          receivers_(std::move(receivers)),
          feasible_b_max_(feasible_b_max) {}

    /// Receivers (0-based) whose constraints block feasibility.
    const std::vector<int>& receivers() const { return receivers_; }
    /// Largest common constraint that would still be feasible.
    double feasible_b_max() const { return feasible_b_max_; }

private:
    std::vector<int> receivers_;
    double feasible_b_max_;
};

/// Numerical integration failed to settle within its refinement budget.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem-spec text is malformed; `field` names the offending entry.
class SpecError : public std::runtime_error {
public:
    SpecError(std::string message, std::string field, int line = -1)
        : std::runtime_error(std::move(message)), field_(std::move(field)), line_(line) {}

    const std::string& field() const { return field_; }
    int line() const { return line_; }  // -1 when unknown

private:
    std::string field_;
    int line_;
};

}  // namespace siet
