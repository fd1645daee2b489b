#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "siet/errors.hpp"
#include "siet/spec_io.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string default_out_dir() {
    const char* env = std::getenv("SIET_OUT_DIR");
    return env != nullptr && *env != '\0' ? env : "siet-out";
}

int execute(const std::string& spec_path, const std::string& out_dir, int threads, bool verbose,
            bool force_verify) {
    std::vector<std::string> warnings;
    siet::ProblemSpecFile spec = siet::parse_spec(read_file(spec_path), &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    if (force_verify) {
        if (spec.task == "gaussian") {
            throw siet::SpecError("verify runs on DMC problems; gaussian specs are checked by their KKT report",
                                  "task");
        }
        spec.task = "verify";
    }
    const siet::RunOutcome outcome = siet::run_task(spec, out_dir, threads, verbose, &std::cerr);
    if (!outcome.report.empty()) std::cout << outcome.report;
    if (verbose) {
        for (const std::string& f : outcome.files) std::cerr << "output: " << f << "\n";
    }
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity-energy functions for simultaneous information and energy transmission"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir = default_out_dir();
    int threads = 1;
    bool verbose = false;

    CLI::App* run = app.add_subcommand("run", "solve the task described by a spec file");
    run->add_option("spec", spec_path, "problem spec file (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (default: $SIET_OUT_DIR or ./siet-out)");
    run->add_option("--threads", threads, "worker threads for grid sweeps")->check(CLI::PositiveNumber);
    run->add_flag("--verbose", verbose, "report written files and progress");

    CLI::App* verify = app.add_subcommand("verify", "run the brute-force oracle probes on a spec's problem");
    verify->add_option("spec", spec_path, "problem spec file (JSON)")->required();
    verify->add_option("--out", out_dir, "output directory (default: $SIET_OUT_DIR or ./siet-out)");
    verify->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    verify->add_flag("--verbose", verbose, "report written files and progress");

    CLI11_PARSE(app, argc, argv);

    try {
        return execute(spec_path, out_dir, threads, verbose, verify->parsed());
    } catch (const siet::SpecError& e) {
        std::cerr << "spec error";
        if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
        std::cerr << ": " << e.what() << "\n";
        return 3;
    } catch (const siet::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
