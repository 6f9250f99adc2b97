#include "doctest.h"

#include "sustain/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace sustain;
using namespace sustain::scenario;
namespace fs = std::filesystem;

namespace {

json lorenz_doc() {
    return json::parse(R"({
      "schema_version": 1, "name": "l", "model": "lorenz",
      "time": {"t1": 1, "step": 0.01},
      "parameters": {"sigma": 10, "rho": 28, "beta": 2.5, "initial": [1, 1, 1]},
      "units": {"time": "s", "sigma": "1", "rho": "1", "beta": "1"}
    })");
}

std::vector<Issue> issues_of(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ScenarioError& e) {
        return e.issues();
    }
    return {};
}

bool has_issue(const std::vector<Issue>& issues, std::string_view path, std::string_view fragment = "") {
    return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) {
        return i.path == path && i.message.find(fragment) != std::string::npos;
    });
}

std::vector<fs::path> scenario_files() {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(SCENARIO_DIR)) {
        if (e.path().extension() == ".json") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("every bundled scenario parses and round-trips") {
    const auto files = scenario_files();
    CHECK(files.size() >= 10);
    for (const auto& f : files) {
        CAPTURE(f.string());
        const auto s = parse_scenario(std::string_view(io::read_file(f)));
        const auto again = parse_scenario(std::string_view(serialize(s)));
        CHECK(again == s);
        CHECK(serialize(again) == serialize(s));
        CHECK(digest(again) == digest(s));
        CHECK(digest(s).size() == 64);
    }
}

TEST_CASE("defaults are filled in") {
    const auto s = parse_scenario(lorenz_doc());
    CHECK(s.name == "l");
    CHECK(s.time->t0 == 0.0);
    CHECK(s.outputs.series == std::vector<std::string>{"trajectory"});
    CHECK(!s.seed);
    auto doc = lorenz_doc();
    doc.erase("name");
    CHECK(parse_scenario(doc).name == "lorenz");
}

TEST_CASE("digest ignores key order and whitespace") {
    const std::string a = R"({"schema_version":1,"model":"crime-ode","time":{"t1":1,"step":0.1},
      "parameters":{"a":-1,"b":0,"c":0,"d":0,"x0":1},"units":{"time":"y","a":"1/y","crime":"n"}})";
    const std::string b = R"({ "units": {"crime":"n","a":"1/y","time":"y"},
      "parameters": {"x0":1,"d":0,"c":0,"b":0,"a":-1}, "time": {"step":0.1,"t1":1},
      "model": "crime-ode", "schema_version": 1 })";
    CHECK(digest(parse_scenario(std::string_view(a))) == digest(parse_scenario(std::string_view(b))));
}

TEST_CASE("unknown keys get a suggestion") {
    auto doc = lorenz_doc();
    doc["parameters"]["sigmaa"] = 3;
    doc["tme"] = 1;
    const auto issues = issues_of(doc);
    CHECK(has_issue(issues, "parameters.sigmaa", "did you mean 'sigma'"));
    CHECK(has_issue(issues, "tme", "did you mean 'time'"));
}

TEST_CASE("every violation is reported") {
    auto doc = lorenz_doc();
    doc["parameters"]["sigma"] = -1;
    doc["parameters"]["beta"] = "x";
    doc["time"]["step"] = 0;
    doc["units"].erase("rho");
    const auto issues = issues_of(doc);
    CHECK(has_issue(issues, "parameters.sigma"));
    CHECK(has_issue(issues, "parameters.beta", "number"));
    CHECK(has_issue(issues, "time.step"));
    CHECK(has_issue(issues, "units.rho", "missing unit"));
    CHECK(issues.size() >= 4);
}

TEST_CASE("model and schema checks") {
    auto doc = lorenz_doc();
    doc["model"] = "lorenzz";
    CHECK(has_issue(issues_of(doc), "model", "lorenz"));
    doc = lorenz_doc();
    doc["schema_version"] = 2;
    CHECK(has_issue(issues_of(doc), "schema_version"));
    CHECK_THROWS_AS(parse_scenario(std::string_view("{ not json")), ScenarioError);
}

TEST_CASE("seed is required exactly for stochastic models") {
    auto doc = lorenz_doc();
    doc["seed"] = 4;
    CHECK(has_issue(issues_of(doc), "seed", "only allowed"));

    auto eco = json::parse(io::read_file(fs::path(SCENARIO_DIR) / "eco-generalized.json"));
    eco.erase("seed");
    CHECK(has_issue(issues_of(eco), "seed", "required"));
}

TEST_CASE("unstable transport steps are rejected at time.step") {
    auto doc = json::parse(io::read_file(fs::path(SCENARIO_DIR) / "transport.json"));
    doc["time"]["step"] = 0.01;
    CHECK(has_issue(issues_of(doc), "time.step"));
}

TEST_CASE("field specs are realised on the grid") {
    const SpatialGrid1D g{0.0, 1.0, 10, Boundary::zero_flux};
    const auto c = realize(ConstantField{2.0}, g);
    CHECK(c == std::vector<double>(10, 2.0));

    const auto d = realize(DeltaField{0.5, 3.0}, g);
    double mass = 0.0, moment = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        mass += d[i] * g.dx();
        moment += d[i] * g.dx() * g.center(i);
    }
    CHECK(mass == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(moment / mass == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(d[4] == d[5]);

    const auto edge = realize(DeltaField{0.01, 1.0}, g);
    CHECK(edge[0] * g.dx() == doctest::Approx(1.0));

    const auto gauss = realize(GaussianField{0.5, 0.1, 2.0}, g);
    CHECK(*std::max_element(gauss.begin(), gauss.end()) < 2.0);
    CHECK(gauss[4] == doctest::Approx(gauss[5]));
}

TEST_CASE("input series interpolate and hold") {
    const InputSeries s{{0, 10}, {1, 3}};
    CHECK(s(-1) == 1);
    CHECK(s(5) == 2);
    CHECK(s(20) == 3);
    CHECK(InputSeries::constant(4)(7) == 4);
}

TEST_CASE("overrides edit dotted paths") {
    auto doc = lorenz_doc();
    apply_override(doc, "parameters.rho=0.5");
    apply_override(doc, "parameters.initial.1=7");
    apply_override(doc, "name=changed");
    const auto s = parse_scenario(doc);
    const auto& p = std::get<LorenzSpec>(s.parameters);
    CHECK(p.params.rho == 0.5);
    CHECK(p.initial[1] == 7);
    CHECK(s.name == "changed");
    CHECK_THROWS_AS(apply_override(doc, "noequals"), ValidationError);
}

TEST_CASE("make_sweep builds a sweep over one parameter") {
    const auto s = make_sweep(lorenz_doc(), "rho", 0.5, 1.5, 11);
    CHECK(s.model == Model::sweep);
    const auto& sw = std::get<SweepSpec>(s.parameters);
    CHECK(sw.parameter == "rho");
    CHECK(sw.samples == 11);
    CHECK(make_sweep(lorenz_doc(), "parameters.rho", 0.5, 1.5, 3).model == Model::sweep);
    CHECK_THROWS_AS(make_sweep(lorenz_doc(), "rh", 0.5, 1.5, 3), ScenarioError);
}

TEST_CASE("outputs are deterministic for a fixed seed") {
    const auto s = parse_scenario(std::string_view(io::read_file(fs::path(SCENARIO_DIR) / "eco-generalized.json")));
    const auto a = compute_outputs(s);
    const auto b = compute_outputs(s);
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
        CHECK(io::to_csv(a.tables[i].table) == io::to_csv(b.tables[i].table));
    }
    auto other = s;
    other.seed = *s.seed + 1;
    CHECK(io::to_csv(compute_outputs(other).tables[0].table) != io::to_csv(a.tables[0].table));
}

TEST_CASE("run_scenario writes tables and a matching record") {
    const auto dir = fs::temp_directory_path() / "sustain_scenario_run";
    fs::remove_all(dir);
    const auto s = parse_scenario(std::string_view(io::read_file(fs::path(SCENARIO_DIR) / "crime-ode.json")));
    const auto rec = run_scenario(s, dir);
    CHECK(rec.status == "ok");
    CHECK(rec.scenario_digest == digest(s));
    CHECK(!rec.seed);
    REQUIRE(!rec.outputs.empty());
    for (const auto& o : rec.outputs) {
        CHECK(io::sha256_hex(io::read_file(dir / o.file)) == o.sha256);
    }
    const auto back = run_record_from_json(json::parse(io::read_file(dir / kRunRecordFile)));
    CHECK(back.outputs.size() == rec.outputs.size());
    CHECK(parse_scenario(std::string_view(io::read_file(dir / "scenario.json"))) == s);
    fs::remove_all(dir);
}

TEST_CASE("failed runs leave a failed record") {
    const auto dir = fs::temp_directory_path() / "sustain_scenario_fail";
    fs::remove_all(dir);
    const auto s =
        parse_scenario(std::string_view(io::read_file(fs::path(SCENARIO_DIR) / "abatement-infeasible.json")));
    CHECK_THROWS_AS(run_scenario(s, dir), InfeasibleError);
    const auto rec = run_record_from_json(json::parse(io::read_file(dir / kRunRecordFile)));
    CHECK(rec.status == "failed");
    CHECK(!rec.error.empty());
    fs::remove_all(dir);
}
