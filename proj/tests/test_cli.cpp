#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_binary() {
    const char* env = std::getenv("SIET_CLI_BIN");
    return env != nullptr ? env : "./siet";
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("run is byte-stable across invocations") {
    const fs::path work = fresh_dir("siet_cli_run");
    const fs::path spec = work / "bsc_z.json";
    write(spec, R"({
  "task": "multicast",
  "channels": [{"kind": "bsc", "eps": 0.12}, {"kind": "z", "eps0": 0.3}],
  "energy": "hamming",
  "constraints": {"start": 0.0, "stop": 0.7, "steps": 6}
})");
    const fs::path out1 = work / "out1";
    const fs::path out2 = work / "out2";
    CHECK(run_command(cli_binary() + " run " + spec.string() + " --out " + out1.string() +
                      " 2>/dev/null") == 0);
    CHECK(run_command(cli_binary() + " run " + spec.string() + " --out " + out2.string() +
                      " 2>/dev/null") == 0);
    CHECK(slurp(out1 / "curve.tsv") == slurp(out2 / "curve.tsv"));
    CHECK(slurp(out1 / "plot.tsv") == slurp(out2 / "plot.tsv"));
    CHECK(fs::exists(out1 / "run_meta.json"));
    CHECK(slurp(out1 / "run_meta.json").find("spec_hash") != std::string::npos);
}

TEST_CASE("verify subcommand reports oracle probes") {
    const fs::path work = fresh_dir("siet_cli_verify");
    const fs::path spec = work / "inst.json";
    write(spec, R"({
  "task": "multicast",
  "channels": [{"kind": "bsc", "eps": 0.3}, {"kind": "z", "eps0": 0.6}],
  "energy": "hamming",
  "constraints": {"start": 0.0, "stop": 0.3, "steps": 4}
})");
    const fs::path out = work / "out";
    const fs::path log = work / "report.txt";
    CHECK(run_command(cli_binary() + " verify " + spec.string() + " --out " + out.string() + " > " +
                      log.string() + " 2>/dev/null") == 0);
    const std::string report = slurp(log);
    CHECK(report.find("PASS oracle-agreement") != std::string::npos);
    CHECK(report.find("FAIL") == std::string::npos);
    CHECK(fs::exists(out / "verify_report.txt"));
}

TEST_CASE("run reproduces the golden reference outputs") {
#ifndef SIET_GOLDEN_DIR
    FAIL("golden directory not configured");
#else
    const fs::path work = fresh_dir("siet_cli_golden");
    const fs::path spec = work / "golden.json";
    write(spec, R"({
  "task": "multicast",
  "channels": [{"kind": "bsc", "eps": 0.12}, {"kind": "z", "eps0": 0.3}],
  "energy": "hamming",
  "constraints": {"start": 0.0, "stop": 0.7, "steps": 8}
})");
    const fs::path out = work / "out";
    REQUIRE(run_command(cli_binary() + " run " + spec.string() + " --out " + out.string() +
                        " 2>/dev/null") == 0);

    // cell-wise comparison: identical layout, values within 1e-9
    for (const char* name : {"curve.tsv", "plot.tsv"}) {
        const std::string fresh = slurp(out / name);
        const std::string golden =
            slurp(fs::path(SIET_GOLDEN_DIR) / (std::string("multicast_bsc_z.") + name));
        std::istringstream fin(fresh), gin(golden);
        std::string fline, gline;
        bool header = true;
        while (std::getline(gin, gline)) {
            REQUIRE(std::getline(fin, fline));
            if (header) {
                CHECK(fline == gline);
                header = false;
                continue;
            }
            std::istringstream fcells(fline), gcells(gline);
            std::string fc, gc;
            while (std::getline(gcells, gc, '\t')) {
                REQUIRE(std::getline(fcells, fc, '\t'));
                char* endf = nullptr;
                char* endg = nullptr;
                const double fv = std::strtod(fc.c_str(), &endf);
                const double gv = std::strtod(gc.c_str(), &endg);
                if (*endg == '\0' && *endf == '\0') {
                    CHECK(std::abs(fv - gv) <= 1e-9 * std::max(1.0, std::abs(gv)));
                } else {
                    CHECK(fc == gc);  // non-numeric columns match exactly
                }
            }
            CHECK_FALSE(std::getline(fcells, fc, '\t'));
        }
        CHECK_FALSE(std::getline(fin, fline));
    }
#endif
}

TEST_CASE("exit codes for infeasible and malformed specs") {
    const fs::path work = fresh_dir("siet_cli_codes");
    const fs::path infeasible = work / "infeasible.json";
    write(infeasible, R"({
  "task": "multicast",
  "channels": [{"kind": "bsc", "eps": 0.12}, {"kind": "z", "eps0": 0.3}],
  "energy": "hamming",
  "constraints": 0.8
})");
    CHECK(run_command(cli_binary() + " run " + infeasible.string() + " --out " +
                      (work / "o1").string() + " 2>/dev/null") == 2);

    const fs::path broken = work / "broken.json";
    write(broken, "{ not json");
    CHECK(run_command(cli_binary() + " run " + broken.string() + " --out " + (work / "o2").string() +
                      " 2>/dev/null") == 3);

    CHECK(run_command(cli_binary() + " run " + (work / "missing.json").string() + " --out " +
                      (work / "o3").string() + " 2>/dev/null") == 3);
}

TEST_SUITE_END();
