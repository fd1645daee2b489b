#include "siet/spec_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "siet/errors.hpp"
#include "siet/gaussian.hpp"
#include "siet/multicast.hpp"
#include "siet/oracle.hpp"
#include "siet/pp_solver.hpp"
#include "siet/segmentation.hpp"
#include "siet/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace siet {

namespace {

int line_of_byte(const std::string& text, size_t byte) {
    int line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw SpecError("unknown field '" + it.key() + "' in " + where, where + "." + it.key());
        }
    }
}

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw SpecError("field '" + field + "' must be a number", field);
    return v.get<double>();
}

int as_int(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw SpecError("field '" + field + "' must be an integer", field);
    return v.get<int>();
}

std::vector<double> as_number_array(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) throw SpecError("field '" + field + "' must be a nonempty array", field);
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw SpecError("field '" + field + "' must contain only numbers", field);
        out.push_back(e.get<double>());
    }
    return out;
}

ChannelSpec parse_channel(const json& v, const std::string& where) {
    if (!v.is_object()) throw SpecError(where + " must be an object", where);
    if (!v.contains("kind") || !v["kind"].is_string()) {
        throw SpecError(where + " needs a string field 'kind'", where + ".kind");
    }
    ChannelSpec ch;
    ch.kind = v["kind"].get<std::string>();
    if (ch.kind == "bsc") {
        reject_unknown(v, {"kind", "eps"}, where);
        if (!v.contains("eps")) throw SpecError(where + " of kind 'bsc' needs 'eps'", where + ".eps");
        ch.eps = as_number(v["eps"], where + ".eps");
    } else if (ch.kind == "z") {
        reject_unknown(v, {"kind", "eps0"}, where);
        if (!v.contains("eps0")) throw SpecError(where + " of kind 'z' needs 'eps0'", where + ".eps0");
        ch.eps0 = as_number(v["eps0"], where + ".eps0");
    } else if (ch.kind == "matrix") {
        reject_unknown(v, {"kind", "rows"}, where);
        if (!v.contains("rows") || !v["rows"].is_array() || v["rows"].empty()) {
            throw SpecError(where + " of kind 'matrix' needs a nonempty 'rows' array", where + ".rows");
        }
        for (size_t r = 0; r < v["rows"].size(); ++r) {
            ch.rows.push_back(as_number_array(v["rows"][r], where + ".rows[" + std::to_string(r) + "]"));
            if (ch.rows.back().size() != ch.rows.front().size()) {
                throw SpecError(where + ".rows must be rectangular", where + ".rows");
            }
        }
    } else {
        throw SpecError(where + " has unknown kind '" + ch.kind + "' (expected bsc, z or matrix)",
                        where + ".kind");
    }
    return ch;
}

Dmc channel_from_spec(const ChannelSpec& ch, const std::string& where) {
    try {
        if (ch.kind == "bsc") return make_bsc(ch.eps);
        if (ch.kind == "z") return make_z(ch.eps0);
        std::vector<double> flat;
        for (const auto& row : ch.rows) flat.insert(flat.end(), row.begin(), row.end());
        return Dmc(static_cast<int>(ch.rows.size()), static_cast<int>(ch.rows.front().size()),
                   std::move(flat));
    } catch (const std::invalid_argument& e) {
        throw SpecError(where + ": " + e.what(), where);
    }
}

ConstraintSpec parse_constraints(const json& v) {
    ConstraintSpec c;
    if (v.is_number()) {
        c.kind = ConstraintSpec::Kind::Scalar;
        c.scalar = v.get<double>();
    } else if (v.is_array()) {
        c.kind = ConstraintSpec::Kind::Vector;
        c.values = as_number_array(v, "constraints");
    } else if (v.is_object()) {
        reject_unknown(v, {"start", "stop", "steps"}, "constraints");
        for (const char* key : {"start", "stop", "steps"}) {
            if (!v.contains(key)) {
                throw SpecError("constraints grid needs 'start', 'stop' and 'steps'",
                                std::string("constraints.") + key);
            }
        }
        c.kind = ConstraintSpec::Kind::Grid;
        c.start = as_number(v["start"], "constraints.start");
        c.stop = as_number(v["stop"], "constraints.stop");
        c.steps = as_int(v["steps"], "constraints.steps");
        if (c.steps < 1) throw SpecError("constraints.steps must be at least 1", "constraints.steps");
        if (c.stop < c.start) throw SpecError("constraints.stop must not precede start", "constraints.stop");
    } else {
        throw SpecError("field 'constraints' must be a number, array or {start,stop,steps} object",
                        "constraints");
    }
    if (c.kind == ConstraintSpec::Kind::Scalar && c.scalar < 0.0) {
        throw SpecError("constraints must be nonnegative", "constraints");
    }
    if (c.kind == ConstraintSpec::Kind::Grid && c.start < 0.0) {
        throw SpecError("constraints.start must be nonnegative", "constraints.start");
    }
    for (double b : c.values) {
        if (b < 0.0) throw SpecError("constraints must be nonnegative", "constraints");
    }
    return c;
}

}  // namespace

std::vector<double> ConstraintSpec::grid_points() const {
    if (kind == Kind::Scalar) return {scalar};
    if (kind == Kind::Grid) {
        std::vector<double> pts(steps);
        for (int i = 0; i < steps; ++i) {
            pts[i] = steps == 1 ? start : start + (stop - start) * i / (steps - 1);
        }
        return pts;
    }
    throw std::logic_error("grid_points() called on a vector constraint");
}

SolveOptions SolverSpec::apply(SolveOptions base) const {
    if (gap_tolerance) base.gap_tolerance = *gap_tolerance;
    if (max_iterations) base.max_iterations = *max_iterations;
    if (refine) base.refine = *refine;
    return base;
}

ProblemSpecFile parse_spec(const std::string& text, std::vector<std::string>* warnings) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError("spec is not valid JSON: " + std::string(e.what()), "<root>",
                        line_of_byte(text, e.byte));
    }
    if (!root.is_object()) throw SpecError("spec must be a JSON object", "<root>");
    if (!root.contains("task") || !root["task"].is_string()) {
        throw SpecError("spec needs a string field 'task'", "task");
    }

    ProblemSpecFile spec;
    spec.task = root["task"].get<std::string>();

    const std::set<std::string> dmc_fields = {"task", "channels", "energy", "constraints", "solver"};
    if (spec.task == "pp" || spec.task == "multicast") {
        reject_unknown(root, dmc_fields, "spec");
    } else if (spec.task == "segment") {
        std::set<std::string> fields = dmc_fields;
        fields.insert("K");
        fields.insert("objective");
        reject_unknown(root, fields, "spec");
    } else if (spec.task == "verify") {
        std::set<std::string> fields = dmc_fields;
        fields.insert("oracle_step");
        fields.insert("convexity_trials");
        reject_unknown(root, fields, "spec");
    } else if (spec.task == "gaussian") {
        reject_unknown(root, {"task", "sigmas", "peak", "grid_size", "constraints", "solver"}, "spec");
    } else {
        throw SpecError("unknown task '" + spec.task + "' (expected pp, multicast, gaussian, segment or verify)",
                        "task");
    }

    if (root.contains("solver")) {
        const json& s = root["solver"];
        if (!s.is_object()) throw SpecError("field 'solver' must be an object", "solver");
        reject_unknown(s, {"gap_tolerance", "max_iterations", "refine"}, "solver");
        if (s.contains("gap_tolerance")) spec.solver.gap_tolerance = as_number(s["gap_tolerance"], "solver.gap_tolerance");
        if (s.contains("max_iterations")) spec.solver.max_iterations = as_int(s["max_iterations"], "solver.max_iterations");
        if (s.contains("refine")) {
            if (!s["refine"].is_boolean()) throw SpecError("solver.refine must be a boolean", "solver.refine");
            spec.solver.refine = s["refine"].get<bool>();
        }
    }

    if (!root.contains("constraints")) throw SpecError("spec needs a 'constraints' field", "constraints");
    spec.constraints = parse_constraints(root["constraints"]);

    if (spec.task == "gaussian") {
        if (!root.contains("sigmas")) throw SpecError("gaussian task needs 'sigmas'", "sigmas");
        spec.sigmas = as_number_array(root["sigmas"], "sigmas");
        if (!root.contains("peak")) throw SpecError("gaussian task needs 'peak'", "peak");
        spec.peak = as_number(root["peak"], "peak");
        if (root.contains("grid_size")) spec.grid_size = as_int(root["grid_size"], "grid_size");
        if (spec.grid_size < 3) throw SpecError("grid_size must be at least 3", "grid_size");
        if (spec.constraints.kind == ConstraintSpec::Kind::Vector) {
            throw SpecError("gaussian task takes a scalar or grid constraint", "constraints");
        }
        try {
            GaussianMulticast check(spec.sigmas, spec.peak, 0.0);
            if (warnings != nullptr) {
                const auto [lmin, lmax] = reduce_channels(check);
                const double cap = spec.peak * spec.peak + spec.sigmas[lmin] * spec.sigmas[lmin];
                const auto pts = spec.constraints.grid_points();
                if (pts.back() > cap + 1e-12) {
                    warnings->push_back("declared constraint B=" + format_g12(pts.back()) +
                                        " exceeds the feasible P^2+sigma_min^2=" + format_g12(cap));
                }
            }
        } catch (const std::invalid_argument& e) {
            throw SpecError(std::string("gaussian parameters: ") + e.what(), "sigmas");
        }
        return spec;
    }

    // DMC-backed tasks.
    if (!root.contains("channels") || !root["channels"].is_array() || root["channels"].empty()) {
        throw SpecError("spec needs a nonempty 'channels' array", "channels");
    }
    for (size_t i = 0; i < root["channels"].size(); ++i) {
        spec.channels.push_back(parse_channel(root["channels"][i], "channels[" + std::to_string(i) + "]"));
    }
    if (spec.task == "pp") {
        if (spec.channels.size() != 1) throw SpecError("pp task takes exactly one channel", "channels");
        if (spec.constraints.kind == ConstraintSpec::Kind::Vector) {
            throw SpecError("pp task takes a scalar or grid constraint", "constraints");
        }
    }

    if (root.contains("energy")) {
        const json& e = root["energy"];
        if (e.is_string()) {
            if (e.get<std::string>() != "hamming") {
                throw SpecError("energy must be \"hamming\" or an array of per-channel vectors", "energy");
            }
            spec.energy_hamming = true;
        } else if (e.is_array()) {
            spec.energy_hamming = false;
            if (e.size() != spec.channels.size()) {
                throw SpecError("energy needs one vector per channel", "energy");
            }
            for (size_t l = 0; l < e.size(); ++l) {
                spec.energy_vectors.push_back(as_number_array(e[l], "energy[" + std::to_string(l) + "]"));
            }
        } else {
            throw SpecError("energy must be \"hamming\" or an array of per-channel vectors", "energy");
        }
    }

    if (spec.task == "segment") {
        if (!root.contains("K")) throw SpecError("segment task needs 'K'", "K");
        spec.num_groups = as_int(root["K"], "K");
        if (root.contains("objective")) {
            if (!root["objective"].is_string()) throw SpecError("objective must be a string", "objective");
            spec.objective = root["objective"].get<std::string>();
        }
        if (spec.objective != "capacity" && spec.objective != "loss") {
            throw SpecError("objective must be \"capacity\" or \"loss\"", "objective");
        }
        const int L = static_cast<int>(spec.channels.size());
        if (L > 12) throw SpecError("segment task supports at most 12 receivers", "channels");
        if (spec.num_groups < 1 || spec.num_groups > L) {
            throw SpecError("K must lie between 1 and the receiver count", "K");
        }
    }
    if (spec.task == "verify") {
        if (root.contains("oracle_step")) {
            spec.oracle_step = as_number(root["oracle_step"], "oracle_step");
            if (!(spec.oracle_step > 0.0 && spec.oracle_step <= 0.25)) {
                throw SpecError("oracle_step must lie in (0, 0.25]", "oracle_step");
            }
        }
        if (root.contains("convexity_trials")) {
            spec.convexity_trials = as_int(root["convexity_trials"], "convexity_trials");
            if (spec.convexity_trials < 1) throw SpecError("convexity_trials must be positive", "convexity_trials");
        }
    }

    // Build once to surface dimension mismatches with field names, and to
    // warn about declared constraints the solvers will reject.
    if (spec.constraints.kind == ConstraintSpec::Kind::Vector &&
        spec.constraints.values.size() != spec.channels.size()) {
        throw SpecError("constraints vector needs one entry per channel", "constraints");
    }
    const std::vector<double> zeros(spec.channels.size(), 0.0);
    const MulticastProblem probe = build_problem(spec, zeros);
    if (warnings != nullptr) {
        if (spec.constraints.kind == ConstraintSpec::Kind::Vector) {
            if (!domain_feasible(probe.with_constraints(spec.constraints.values)).feasible) {
                warnings->push_back("declared constraint vector is jointly infeasible; solvers will reject it");
            }
        } else {
            const double top = spec.constraints.grid_points().back();
            const double bmax = b_max_multicast(probe.channels(), probe.energies());
            if (top > bmax + 1e-12) {
                warnings->push_back("declared constraint B=" + format_g12(top) +
                                    " exceeds the feasible B_max=" + format_g12(bmax));
            }
        }
    }
    return spec;
}

MulticastProblem build_problem(const ProblemSpecFile& spec, const std::vector<double>& constraints) {
    std::vector<Dmc> channels;
    for (size_t i = 0; i < spec.channels.size(); ++i) {
        channels.push_back(channel_from_spec(spec.channels[i], "channels[" + std::to_string(i) + "]"));
    }
    std::vector<EnergyFunctional> energies;
    for (size_t l = 0; l < channels.size(); ++l) {
        if (spec.energy_hamming) {
            if (channels[l].output_size() != 2) {
                throw SpecError("energy \"hamming\" needs binary outputs; channels[" + std::to_string(l) +
                                    "] has " + std::to_string(channels[l].output_size()) + " symbols",
                                "energy");
            }
            energies.push_back(EnergyFunctional::hamming());
        } else {
            try {
                energies.emplace_back(spec.energy_vectors[l]);
            } catch (const std::invalid_argument& e) {
                throw SpecError("energy[" + std::to_string(l) + "]: " + e.what(),
                                "energy[" + std::to_string(l) + "]");
            }
            if (energies.back().size() != channels[l].output_size()) {
                throw SpecError("energy[" + std::to_string(l) + "] length does not match channels[" +
                                    std::to_string(l) + "] output alphabet",
                                "energy[" + std::to_string(l) + "]");
            }
        }
    }
    return MulticastProblem(std::move(channels), std::move(energies), constraints);
}

std::string emit_spec(const ProblemSpecFile& spec) {
    nlohmann::ordered_json root;
    root["task"] = spec.task;
    if (spec.task == "gaussian") {
        root["sigmas"] = spec.sigmas;
        root["peak"] = spec.peak;
        root["grid_size"] = spec.grid_size;
    } else {
        nlohmann::ordered_json channels = nlohmann::ordered_json::array();
        for (const ChannelSpec& ch : spec.channels) {
            nlohmann::ordered_json c;
            c["kind"] = ch.kind;
            if (ch.kind == "bsc") c["eps"] = ch.eps;
            if (ch.kind == "z") c["eps0"] = ch.eps0;
            if (ch.kind == "matrix") c["rows"] = ch.rows;
            channels.push_back(std::move(c));
        }
        root["channels"] = std::move(channels);
        if (spec.energy_hamming) {
            root["energy"] = "hamming";
        } else {
            root["energy"] = spec.energy_vectors;
        }
    }
    switch (spec.constraints.kind) {
        case ConstraintSpec::Kind::Scalar:
            root["constraints"] = spec.constraints.scalar;
            break;
        case ConstraintSpec::Kind::Vector:
            root["constraints"] = spec.constraints.values;
            break;
        case ConstraintSpec::Kind::Grid:
            root["constraints"] = {{"start", spec.constraints.start},
                                   {"stop", spec.constraints.stop},
                                   {"steps", spec.constraints.steps}};
            break;
    }
    if (spec.task == "segment") {
        root["K"] = spec.num_groups;
        root["objective"] = spec.objective;
    }
    if (spec.task == "verify") {
        if (spec.oracle_step > 0.0) root["oracle_step"] = spec.oracle_step;
        root["convexity_trials"] = spec.convexity_trials;
    }
    if (spec.solver.gap_tolerance || spec.solver.max_iterations || spec.solver.refine) {
        nlohmann::ordered_json s;
        if (spec.solver.gap_tolerance) s["gap_tolerance"] = *spec.solver.gap_tolerance;
        if (spec.solver.max_iterations) s["max_iterations"] = *spec.solver.max_iterations;
        if (spec.solver.refine) s["refine"] = *spec.solver.refine;
        root["solver"] = std::move(s);
    }
    return root.dump(2) + "\n";
}

std::string format_g12(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what + " in curve record");
}

std::string join_active(const std::vector<int>& active) {
    std::string s;
    for (size_t i = 0; i < active.size(); ++i) {
        if (i > 0) s += ';';
        s += std::to_string(active[i] + 1);
    }
    return s;
}

}  // namespace

std::string emit_curve_records(const std::vector<CurveRecord>& records, bool common_b) {
    if (records.empty()) throw std::invalid_argument("emit_curve_records needs at least one record");
    const size_t L = records.front().per_channel_mi.size();
    const size_t n = records.front().optimizer.size();
    std::string out;
    if (common_b) {
        out += "B";
    } else {
        for (size_t l = 0; l < L; ++l) out += (l ? "\tB_" : "B_") + std::to_string(l + 1);
    }
    out += "\tC";
    for (size_t x = 0; x < n; ++x) out += "\tq_" + std::to_string(x + 1);
    for (size_t l = 0; l < L; ++l) out += "\tMI_" + std::to_string(l + 1);
    out += "\tactive_set\tconverged\n";
    for (const CurveRecord& r : records) {
        std::string row;
        for (size_t i = 0; i < r.constraints.size(); ++i) {
            require_finite(r.constraints[i], "constraint");
            if (i > 0) row += '\t';
            row += format_g12(r.constraints[i]);
        }
        require_finite(r.value, "value");
        row += '\t' + format_g12(r.value);
        for (double q : r.optimizer) {
            require_finite(q, "optimizer");
            row += '\t' + format_g12(q);
        }
        for (double mi : r.per_channel_mi) {
            require_finite(mi, "mutual information");
            row += '\t' + format_g12(mi);
        }
        row += '\t' + join_active(r.active_set);
        row += r.converged ? "\t1\n" : "\t0\n";
        out += row;
    }
    return out;
}

std::string emit_plot_data(const std::vector<CurveRecord>& records) {
    if (records.empty()) throw std::invalid_argument("emit_plot_data needs at least one record");
    const size_t L = records.front().per_channel_mi.size();
    std::string out = "B\tC";
    for (size_t l = 0; l < L; ++l) out += "\tMI_" + std::to_string(l + 1);
    out += '\n';
    for (const CurveRecord& r : records) {
        out += format_g12(r.constraints.front());
        out += '\t' + format_g12(r.value);
        for (double mi : r.per_channel_mi) out += '\t' + format_g12(mi);
        out += '\n';
    }
    return out;
}

namespace {

struct RunContext {
    const ProblemSpecFile& spec;
    fs::path out;
    int threads;
    bool verbose;
    std::ostream& err;
    SolveOptions opts;
    std::vector<std::string> files;
    long total_iterations = 0;
    int exit_code = 0;
    std::string report;
};

void write_file(RunContext& ctx, const std::string& name, const std::string& content) {
    const fs::path p = ctx.out / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
    out << content;
    ctx.files.push_back(p.string());
    if (ctx.verbose) ctx.err << "wrote " << p.string() << "\n";
}

CurveRecord record_of(double B, const MulticastSolution& sol) {
    CurveRecord r;
    r.constraints = {B};
    r.value = sol.value;
    r.optimizer.assign(sol.optimizer.probs().begin(), sol.optimizer.probs().end());
    r.per_channel_mi = sol.per_channel_mi;
    r.active_set = sol.active_set;
    r.converged = sol.converged;
    return r;
}

void run_pp(RunContext& ctx) {
    const MulticastProblem probe = build_problem(ctx.spec, {0.0});
    const Dmc& ch = probe.channels()[0];
    const EnergyFunctional& b = probe.energies()[0];
    const std::vector<double> grid = ctx.spec.constraints.grid_points();
    const CapacityCurve curve = capacity_curve(ch, b, grid, ctx.opts, ctx.threads);

    std::vector<CurveRecord> records;
    for (const CapacityPoint& p : curve.points) {
        CurveRecord r;
        r.constraints = {p.constraint};
        r.value = p.value;
        r.optimizer.assign(p.optimizer.probs().begin(), p.optimizer.probs().end());
        r.per_channel_mi = {p.value};
        r.active_set = {0};
        r.converged = p.converged;
        records.push_back(std::move(r));
        ctx.total_iterations += p.iterations;
        if (!p.converged) ctx.exit_code = 1;
    }
    write_file(ctx, "curve.tsv", emit_curve_records(records, true));
    write_file(ctx, "plot.tsv", emit_plot_data(records));
}

void run_multicast(RunContext& ctx) {
    const std::vector<double> zeros(ctx.spec.channels.size(), 0.0);
    const MulticastProblem base = build_problem(ctx.spec, zeros);

    std::vector<CurveRecord> records;
    bool common = ctx.spec.constraints.kind != ConstraintSpec::Kind::Vector;
    if (common) {
        const std::vector<double> grid = ctx.spec.constraints.grid_points();
        const double bmax = b_max_multicast(base.channels(), base.energies());
        if (grid.back() > bmax + 1e-12) {
            throw InfeasibleError("constraint grid reaches B=" + format_g12(grid.back()) +
                                      " beyond the feasible B_max=" + format_g12(bmax),
                                  {}, bmax);
        }
        const auto curve = per_channel_curves(base.channels(), base.energies(), grid, ctx.opts, ctx.threads);
        for (const MulticastCurvePoint& p : curve) {
            records.push_back(record_of(p.constraint, p.solution));
            ctx.total_iterations += p.solution.iterations;
            if (!p.solution.converged) ctx.exit_code = 1;
        }
    } else {
        const MulticastProblem prob = base.with_constraints(ctx.spec.constraints.values);
        const MulticastSolution sol = multicast_capacity(prob, ctx.opts);
        CurveRecord r = record_of(0.0, sol);
        r.constraints = ctx.spec.constraints.values;
        records.push_back(std::move(r));
        ctx.total_iterations += sol.iterations;
        if (!sol.converged) ctx.exit_code = 1;
    }
    write_file(ctx, "curve.tsv", emit_curve_records(records, common));
    if (common) write_file(ctx, "plot.tsv", emit_plot_data(records));
}

void run_gaussian(RunContext& ctx) {
    const std::vector<double> grid = ctx.spec.constraints.grid_points();
    {
        const GaussianMulticast probe(ctx.spec.sigmas, ctx.spec.peak, 0.0);
        const auto [lmin, lmax] = reduce_channels(probe);
        const double cap = ctx.spec.peak * ctx.spec.peak + probe.sigmas[lmin] * probe.sigmas[lmin];
        if (grid.back() > cap + 1e-12) {
            throw InfeasibleError("constraint grid reaches B=" + format_g12(grid.back()) +
                                      " beyond the feasible P^2+sigma_min^2=" + format_g12(cap),
                                  {lmin}, cap);
        }
    }

    std::vector<GaussianSolution> solutions(grid.size());
    parallel_for(static_cast<int>(grid.size()), ctx.threads, [&](int i) {
        const GaussianMulticast gm(ctx.spec.sigmas, ctx.spec.peak, grid[i]);
        solutions[i] = gaussian_capacity_energy(gm, ctx.spec.grid_size, ctx.opts);
    });

    std::string curve = "B\tC\tE_x2\tlambda\tkkt_violation\tkkt_passed\tconverged\n";
    std::string inputs = "B\tx\tmass\n";
    std::string plot = "B\tC\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        const GaussianSolution& s = solutions[i];
        curve += format_g12(grid[i]) + '\t' + format_g12(s.value) + '\t' +
                 format_g12(s.input.second_moment()) + '\t' + format_g12(s.kkt.lambda) + '\t' +
                 format_g12(s.kkt.max_violation) + (s.kkt.passed ? "\t1" : "\t0") +
                 (s.converged ? "\t1\n" : "\t0\n");
        plot += format_g12(grid[i]) + '\t' + format_g12(s.value) + '\n';
        for (size_t k = 0; k < s.input.support.size(); ++k) {
            if (s.input.masses[k] > 1e-12) {
                inputs += format_g12(grid[i]) + '\t' + format_g12(s.input.support[k]) + '\t' +
                          format_g12(s.input.masses[k]) + '\n';
            }
        }
        ctx.total_iterations += s.iterations;
        if (!s.converged || !s.kkt.passed) ctx.exit_code = 1;
    }
    write_file(ctx, "curve.tsv", curve);
    write_file(ctx, "inputs.tsv", inputs);
    write_file(ctx, "plot.tsv", plot);
}

void run_segment(RunContext& ctx) {
    const std::vector<double> zeros(ctx.spec.channels.size(), 0.0);
    const MulticastProblem base = build_problem(ctx.spec, zeros);
    const int L = base.num_receivers();
    const bool minimize_loss = ctx.spec.objective == "loss";

    std::vector<std::vector<double>> points;
    if (ctx.spec.constraints.kind == ConstraintSpec::Kind::Vector) {
        points.push_back(ctx.spec.constraints.values);
    } else {
        for (double B : ctx.spec.constraints.grid_points()) points.emplace_back(L, B);
    }

    const std::vector<Segmentation> partitions = enumerate_partitions(L, ctx.spec.num_groups);
    std::string table = "B\tpartition\tper_group_capacity\tc_q\tper_group_loss\tmax_loss\twinner\n";
    int feasible_points = 0;
    for (const std::vector<double>& Bvec : points) {
        const MulticastProblem prob = base.with_constraints(Bvec);
        GroupScoreCache cache;
        std::vector<SegmentationScore> scores;
        std::vector<bool> valid;
        int winner = -1;
        double winner_key = 0.0;
        for (size_t p = 0; p < partitions.size(); ++p) {
            try {
                SegmentationScore s = score_segmentation(partitions[p], prob, ctx.opts, &cache);
                const double key = minimize_loss ? s.max_loss : s.c_q;
                if (winner < 0 || (minimize_loss ? key < winner_key - 1e-9 : key > winner_key + 1e-9)) {
                    winner = static_cast<int>(p);
                    winner_key = key;
                }
                scores.push_back(std::move(s));
                valid.push_back(true);
            } catch (const InfeasibleError&) {
                scores.emplace_back();
                valid.push_back(false);
            }
        }
        if (winner >= 0) ++feasible_points;
        std::string bcol;
        for (size_t l = 0; l < Bvec.size(); ++l) {
            if (l > 0) bcol += ';';
            bcol += format_g12(Bvec[l]);
        }
        for (size_t p = 0; p < partitions.size(); ++p) {
            table += bcol + '\t' + partitions[p].to_string();
            if (!valid[p]) {
                table += "\tinfeasible\tnan\tinfeasible\tnan\t0\n";
                continue;
            }
            std::string caps, losses;
            for (size_t g = 0; g < scores[p].per_group_capacity.size(); ++g) {
                if (g > 0) {
                    caps += ';';
                    losses += ';';
                }
                caps += format_g12(scores[p].per_group_capacity[g]);
                losses += format_g12(scores[p].per_group_loss[g]);
            }
            table += '\t' + caps + '\t' + format_g12(scores[p].c_q) + '\t' + losses + '\t' +
                     format_g12(scores[p].max_loss) + (static_cast<int>(p) == winner ? "\t1\n" : "\t0\n");
        }
    }
    if (feasible_points == 0) {
        throw InfeasibleError("every partition has an infeasible group at every constraint point", {},
                              std::numeric_limits<double>::quiet_NaN());
    }
    write_file(ctx, "segmentation.tsv", table);
}

void run_verify(RunContext& ctx) {
    const std::vector<double> zeros(ctx.spec.channels.size(), 0.0);
    const MulticastProblem base = build_problem(ctx.spec, zeros);
    const int L = base.num_receivers();
    const int d = base.input_size();

    std::vector<std::vector<double>> points;
    bool common = ctx.spec.constraints.kind != ConstraintSpec::Kind::Vector;
    if (common) {
        for (double B : ctx.spec.constraints.grid_points()) points.emplace_back(L, B);
    } else {
        points.push_back(ctx.spec.constraints.values);
    }

    std::ostringstream rep;
    bool all_pass = true;
    auto emit = [&](bool pass, const std::string& name, const std::string& detail) {
        rep << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        if (!pass) all_pass = false;
    };

    // Solve every point once.
    std::vector<MulticastSolution> sols(points.size());
    parallel_for(static_cast<int>(points.size()), ctx.threads, [&](int i) {
        sols[i] = multicast_capacity(base.with_constraints(points[i]), ctx.opts);
    });
    for (const auto& s : sols) ctx.total_iterations += s.iterations;

    // 1. grid-oracle agreement on up to 11 evenly spaced points
    if (d > 4) {
        rep << "SKIP oracle-agreement: input alphabet larger than the oracle's grid guard\n";
    } else {
        const double step = ctx.spec.oracle_step > 0.0
                                ? ctx.spec.oracle_step
                                : (d == 2 ? 1e-4 : (d == 3 ? 1e-2 : 0.025));
        double tol;
        if (d == 2 && step <= 1e-4 + 1e-15) {
            tol = 1e-4;
        } else if (d == 3 && step <= 1e-2 + 1e-15) {
            tol = 1e-3;
        } else {
            tol = 0.0;  // fall back to the Lipschitz slack below
        }
        double worst = 0.0;
        const size_t count = std::min<size_t>(points.size(), 11);
        for (size_t k = 0; k < count; ++k) {
            const size_t i = count == 1 ? 0 : k * (points.size() - 1) / (count - 1);
            const GridResult oracle = grid_capacity_energy(base.with_constraints(points[i]), GridSpec(step, d));
            if (tol == 0.0) tol = oracle.slack;
            worst = std::max(worst, std::abs(sols[i].value - oracle.value));
        }
        emit(worst <= tol, "oracle-agreement",
             "max |solver - oracle| = " + format_g12(worst) + " (allowed " + format_g12(tol) +
                 ", step " + format_g12(step) + ")");
    }

    // 2. concavity along a common-B curve
    if (common && points.size() >= 3) {
        std::vector<double> bs, cs;
        for (size_t i = 0; i < points.size(); ++i) {
            bs.push_back(points[i][0]);
            cs.push_back(sols[i].value);
        }
        const double viol = concavity_violation(bs, cs);
        emit(viol <= 1e-6, "concavity", "worst chord violation = " + format_g12(viol) + " (allowed 1e-06)");
    } else {
        rep << "SKIP concavity: needs a common-B grid with at least 3 points\n";
    }

    // 3. compound upper bound
    {
        double worst = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < points.size(); ++i) {
            const double bound = upper_bound_min_individual(base.with_constraints(points[i]));
            worst = std::max(worst, sols[i].value - bound);
        }
        emit(worst <= 1e-6, "upper-bound",
             "max (multicast - min individual) = " + format_g12(worst) + " (allowed 1e-06)");
    }

    // 4. monotonicity along the grid
    if (common && points.size() >= 2) {
        double worst = 0.0;
        for (size_t i = 1; i < points.size(); ++i) {
            worst = std::max(worst, sols[i].value - sols[i - 1].value);
        }
        emit(worst <= 1e-6, "monotonicity", "max increase along B = " + format_g12(worst) + " (allowed 1e-06)");
    } else {
        rep << "SKIP monotonicity: needs a common-B grid with at least 2 points\n";
    }

    // 5. domain convexity
    {
        const bool ok = domain_convexity_probe(base.with_constraints(points.front()), ctx.spec.convexity_trials);
        emit(ok, "domain-convexity",
             std::to_string(ctx.spec.convexity_trials) + " random constraint pairs stayed feasible");
    }

    ctx.report = rep.str();
    write_file(ctx, "verify_report.txt", ctx.report);
    if (!all_pass) ctx.exit_code = 1;
}

}  // namespace

RunOutcome run_task(const ProblemSpecFile& spec, const std::string& out_dir, int threads, bool verbose,
                    std::ostream* diag) {
    std::ostream& err = diag != nullptr ? *diag : std::cerr;
    const auto t0 = std::chrono::steady_clock::now();

    RunContext ctx{spec, fs::path(out_dir), std::max(1, threads), verbose, err,
                   spec.solver.apply(spec.task == "multicast" || spec.task == "segment"
                                         ? SolveOptions::multicast_defaults()
                                         : SolveOptions::pp_defaults()),
                   {}, 0, 0, ""};
    fs::create_directories(ctx.out);

    try {
        if (spec.task == "pp") {
            run_pp(ctx);
        } else if (spec.task == "multicast") {
            run_multicast(ctx);
        } else if (spec.task == "gaussian") {
            run_gaussian(ctx);
        } else if (spec.task == "segment") {
            run_segment(ctx);
        } else if (spec.task == "verify") {
            run_verify(ctx);
        } else {
            throw SpecError("unknown task '" + spec.task + "'", "task");
        }
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return {2, ctx.files, ""};
    } catch (const QuadratureError& e) {
        err << "quadrature failure: " << e.what() << "\n";
        return {1, ctx.files, ""};
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta;
    meta["task"] = spec.task;
    meta["tool_version"] = kToolVersion;
    meta["spec_hash"] = [&] {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(emit_spec(spec))));
        return std::string(buf);
    }();
    meta["gap_tolerance"] = ctx.opts.gap_tolerance;
    meta["max_iterations"] = ctx.opts.max_iterations;
    meta["total_iterations"] = ctx.total_iterations;
    meta["threads"] = ctx.threads;
    meta["wall_time_seconds"] = wall;
    write_file(ctx, "run_meta.json", meta.dump(2) + "\n");

    if (ctx.exit_code == 1) err << "solver did not certify convergence on every point\n";
    return {ctx.exit_code, ctx.files, ctx.report};
}

}  // namespace siet
