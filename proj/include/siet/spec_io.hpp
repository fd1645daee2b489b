#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "siet/channel.hpp"
#include "siet/maxmin.hpp"

namespace siet {

inline constexpr const char* kToolVersion = "1.0.0";

struct ChannelSpec {
    std::string kind;  // "bsc" | "z" | "matrix"
    double eps = 0.0;
    double eps0 = 0.0;
    std::vector<std::vector<double>> rows;

    bool operator==(const ChannelSpec&) const = default;
};

struct ConstraintSpec {
    enum class Kind { Scalar, Vector, Grid };
    Kind kind = Kind::Scalar;
    double scalar = 0.0;
    std::vector<double> values;          // Vector
    double start = 0.0, stop = 0.0;      // Grid
    int steps = 0;

    std::vector<double> grid_points() const;  // common-B sweep (Scalar or Grid)

    bool operator==(const ConstraintSpec&) const = default;
};

struct SolverSpec {
    std::optional<double> gap_tolerance;
    std::optional<long> max_iterations;
    std::optional<bool> refine;

    SolveOptions apply(SolveOptions base) const;

    bool operator==(const SolverSpec&) const = default;
};

/// Parsed, validated problem-spec file.
struct ProblemSpecFile {
    std::string task;  // "pp" | "multicast" | "gaussian" | "segment" | "verify"
    std::vector<ChannelSpec> channels;
    bool energy_hamming = true;
    std::vector<std::vector<double>> energy_vectors;  // when !energy_hamming
    ConstraintSpec constraints;
    // segment
    int num_groups = 0;
    std::string objective = "capacity";  // "capacity" | "loss"
    // gaussian
    std::vector<double> sigmas;
    double peak = 0.0;
    int grid_size = 65;
    // verify
    double oracle_step = 0.0;  // 0 = choose by alphabet size
    int convexity_trials = 1000;
    SolverSpec solver;

    bool operator==(const ProblemSpecFile&) const = default;
};

/// Parse and validate spec text (JSON).  Throws SpecError naming the
/// offending field (and line for syntax errors).  Declared-infeasible
/// constraints produce warnings, not errors.
ProblemSpecFile parse_spec(const std::string& text, std::vector<std::string>* warnings = nullptr);

/// Canonical serialization; parse_spec(emit_spec(s)) == s.
std::string emit_spec(const ProblemSpecFile& spec);

/// DMC problem instance at a given constraint vector.
MulticastProblem build_problem(const ProblemSpecFile& spec, const std::vector<double>& constraints);

/// One solved point of an output curve.
struct CurveRecord {
    std::vector<double> constraints;  // single common B, or one entry per receiver
    double value = 0.0;
    std::vector<double> optimizer;
    std::vector<double> per_channel_mi;
    std::vector<int> active_set;
    bool converged = false;
};

/// Full per-record table: constraint column(s), C, optimizer, per-channel MI,
/// active set, converged flag.  Tab-delimited, 12 significant digits,
/// '.' decimal separator, bitwise stable.
std::string emit_curve_records(const std::vector<CurveRecord>& records, bool common_b);

/// Plot projection: columns B, C, then one MI column per channel.
std::string emit_plot_data(const std::vector<CurveRecord>& records);

struct RunOutcome {
    int exit_code = 0;  // 0 success, 1 non-convergence, 2 infeasible
    std::vector<std::string> files;
    std::string report;  // verify-task report text, empty otherwise
};

/// Execute the spec's task, writing output files under out_dir.
/// Diagnostics go to `diag`; data files are deterministic for a fixed spec
/// and tool version (run_meta.json additionally records wall time).
RunOutcome run_task(const ProblemSpecFile& spec, const std::string& out_dir,
                    int threads = 1, bool verbose = false, std::ostream* diag = nullptr);

/// 12-significant-digit, locale-independent number formatting.
std::string format_g12(double v);

}  // namespace siet
