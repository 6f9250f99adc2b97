#include "doctest.h"

#include "sustain/cli.hpp"
#include "sustain/io.hpp"
#include "sustain/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace sustain;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SCENARIO_DIR;

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

// In-process invocation.
Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "sustain");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// Out-of-process invocation of the installed binary.
int exe(const std::string& args) {
    const std::string cmd = std::string(SUSTAIN_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("sustain_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("run writes outputs and exits 0") {
    const auto dir = scratch("run");
    const auto r = invoke({"--out", dir.string(), "run", (kScenarios / "crime-ode.json").string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(fs::exists(dir / "trajectory.csv"));
    CHECK(fs::exists(dir / "run.json"));
    CHECK(fs::exists(dir / "scenario.json"));
    fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte identical") {
    const auto a = scratch("rep_a");
    const auto b = scratch("rep_b");
    const auto file = (kScenarios / "eco-generalized.json").string();
    REQUIRE(exe("--quiet --out " + a.string() + " run " + file) == 0);
    REQUIRE(exe("--quiet --out " + b.string() + " run " + file) == 0);
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv") continue;
        CHECK(io::read_file(e.path()) == io::read_file(b / e.path().filename()));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("exit codes") {
    CHECK(exe("--version") == 0);
    CHECK(exe("run " + (kScenarios / "missing.json").string()) == 1);
    CHECK(exe("bogus") == 1);
    CHECK(exe("--quiet --set parameters.sigma=-1 --out " + scratch("bad").string() + " run " +
              (kScenarios / "lorenz.json").string()) == 1);
    const auto inf = scratch("infeasible");
    CHECK(exe("--quiet --out " + inf.string() + " run " + (kScenarios / "abatement-infeasible.json").string()) == 2);
    fs::remove_all(inf);
}

TEST_CASE("validation errors name the field") {
    const auto r = invoke({"--set", "parameters.rhoo=2", "run", (kScenarios / "lorenz.json").string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("parameters.rhoo") != std::string::npos);
    CHECK(r.err.find("did you mean 'rho'") != std::string::npos);
}

TEST_CASE("seed flag overrides the scenario seed") {
    const auto dir = scratch("seed");
    REQUIRE(invoke({"--quiet", "--seed", "5", "--out", dir.string(), "run", (kScenarios / "eco-generalized.json").string()})
                .code == 0);
    const auto rec = scenario::run_record_from_json(scenario::json::parse(io::read_file(dir / "run.json")));
    CHECK(rec.seed == 5u);
    CHECK(invoke({"--seed", "5", "run", (kScenarios / "lorenz.json").string()}).code == cli::kExitUsage);
    fs::remove_all(dir);
}

TEST_CASE("sweep subcommand") {
    const auto dir = scratch("sweep");
    const auto file = (kScenarios / "lorenz-stable.json").string();
    CHECK(invoke({"--quiet", "--out", dir.string(), "sweep", file, "rho:0.5:1.5:11"}).code == 0);
    const auto tr = io::parse_csv(io::read_file(dir / "transitions.csv"));
    REQUIRE(tr.rows.size() == 1);
    CHECK(tr.rows[0][0] <= 1.0);
    CHECK(tr.rows[0][1] >= 1.0);
    CHECK(invoke({"sweep", file, "rho:0.5:1.5"}).code == cli::kExitUsage);
    CHECK(invoke({"sweep", file, "rho:0.5:1.5:1"}).code == cli::kExitUsage);
    fs::remove_all(dir);
}

TEST_CASE("optimize only accepts optimisation models") {
    const auto dir = scratch("opt");
    CHECK(invoke({"--quiet", "--out", dir.string(), "optimize", (kScenarios / "abatement.json").string()}).code == 0);
    CHECK(fs::exists(dir / "allocations.csv"));
    CHECK(invoke({"optimize", (kScenarios / "lorenz.json").string()}).code == cli::kExitUsage);
    fs::remove_all(dir);
}

TEST_CASE("plotdata exports gnuplot files") {
    const auto dir = scratch("plot");
    REQUIRE(invoke({"--quiet", "--out", dir.string(), "run", (kScenarios / "crime-ode.json").string()}).code == 0);
    const auto r = invoke({"--quiet", "plotdata", dir.string(), "--series", "t,x"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "trajectory_t_x.dat"));
    CHECK(fs::exists(dir / "trajectory_t_x.gp"));
    const auto missing = invoke({"plotdata", dir.string(), "--series", "t,nope"});
    CHECK(missing.code == cli::kExitUsage);
    CHECK(missing.err.find("available") != std::string::npos);
    CHECK(invoke({"plotdata", dir.string()}).code == cli::kExitUsage);
    fs::remove_all(dir);
}
