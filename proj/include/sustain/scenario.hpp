#pragma once

#include "sustain/climate.hpp"
#include "sustain/ecosystem.hpp"
#include "sustain/energy.hpp"
#include "sustain/error.hpp"
#include "sustain/io.hpp"
#include "sustain/numerics.hpp"
#include "sustain/pollution.hpp"
#include "sustain/socio.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Declarative run descriptions: parsing, validation, serialization and
// execution. The document format is described in docs/scenario-format.md.
namespace sustain::scenario {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Model {
    lorenz,
    eco_simple,
    eco_generalized,
    transport,
    abatement,
    eroei,
    crime_ode,
    crime_control,
    sweep,
    indicators,
};

std::string_view to_string(Model m);
std::optional<Model> parse_model(std::string_view name);
bool is_stochastic_model(Model m);

struct Issue {
    std::string path;
    std::string message;
    bool operator==(const Issue&) const = default;
};

// Every problem found in a document, not just the first.
class ScenarioError : public ValidationError {
public:
    explicit ScenarioError(std::vector<Issue> issues);
    const std::vector<Issue>& issues() const noexcept { return issues_; }

private:
    std::vector<Issue> issues_;
};

// Spatial field descriptions, realised on a grid at run time.
struct ConstantField {
    double value = 0.0;
    bool operator==(const ConstantField&) const = default;
};
struct GaussianField {
    double center = 0.0;
    double width = 1.0;
    double amplitude = 1.0;
    bool operator==(const GaussianField&) const = default;
};
// Total mass `weight` shared between the two cells whose centres bracket `position`.
struct DeltaField {
    double position = 0.0;
    double weight = 1.0;
    bool operator==(const DeltaField&) const = default;
};
struct ValuesField {
    std::vector<double> values;
    bool operator==(const ValuesField&) const = default;
};
using FieldSpec = std::variant<ConstantField, GaussianField, DeltaField, ValuesField>;

std::vector<double> realize(const FieldSpec& spec, const SpatialGrid1D& grid);

// Scalar time input: a constant or a piecewise-linear table held flat outside its range.
struct InputSeries {
    std::vector<double> times;   // empty for a constant
    std::vector<double> values;  // one entry for a constant

    static InputSeries constant(double v) { return {{}, {v}}; }
    double operator()(double t) const;
    bool operator==(const InputSeries&) const = default;
};

struct LyapunovSpec {
    double step = 0.001;
    double renormalization_interval = 0.1;
    double total_time = 200.0;
    std::optional<double> transient;
    bool operator==(const LyapunovSpec&) const = default;
};

struct LorenzSpec {
    climate::LorenzParams params;
    std::array<double, 3> initial{};
    std::optional<std::array<double, 3>> perturbation;
    std::optional<LyapunovSpec> lyapunov;
    bool operator==(const LorenzSpec&) const = default;
};

struct EcoSimpleSpec {
    ecosystem::SimpleEcoParams params;
    std::array<double, 2> initial{};
    bool operator==(const EcoSimpleSpec&) const = default;
};

struct PredationSpec {
    std::string type = "mass-action";  // or "holling2"
    double a = 0.0;
    double handling = 0.0;
    bool operator==(const PredationSpec&) const = default;
};

struct ResourceSpec {
    double K = 0.0;
    double S = 0.0;
    std::string depletion = "prey-proportional";  // or "linear"
    double e = 0.0;
    double initial = 0.0;
    bool operator==(const ResourceSpec&) const = default;
};

struct EcoGeneralizedSpec {
    double r_x = 0.0;
    double delta = 0.0;
    double m = 0.0;
    PredationSpec predation;
    std::vector<ResourceSpec> resources;
    double noise_x = 0.0;
    double noise_y = 0.0;
    std::array<double, 2> initial{};
    bool operator==(const EcoGeneralizedSpec&) const = default;

    ecosystem::GeneralizedEcoParams build() const;
    ecosystem::GeneralizedEcoState initial_state() const;
};

struct TransportSpec {
    double velocity = 0.0;
    double diffusivity = 0.0;
    FieldSpec source = ConstantField{0.0};
    FieldSpec removal = ConstantField{0.0};
    std::string reaction = "none";  // or "linear-decay": Q = -k C
    double decay_rate = 0.0;
    FieldSpec initial = ConstantField{0.0};
    bool operator==(const TransportSpec&) const = default;

    pollution::TransportConfig build(const SpatialGrid1D& grid) const;
};

struct AbatementSourceSpec {
    double E = 0.0;
    double c = 0.0;
    double x_max = 0.0;
    bool operator==(const AbatementSourceSpec&) const = default;
};

struct AbatementSpec {
    std::vector<AbatementSourceSpec> sources;
    double E_limit = 0.0;
    bool operator==(const AbatementSpec&) const = default;

    pollution::AbatementProblem build() const;
};

struct EroeiSpec {
    energy::EroeiParams params;
    double R0 = 0.0;
    bool operator==(const EroeiSpec&) const = default;
};

struct CrimeOdeSpec {
    socio::CrimeOdeParams params;
    double x0 = 0.0;
    InputSeries u1 = InputSeries::constant(0.0);
    InputSeries u2 = InputSeries::constant(0.0);
    InputSeries trust = InputSeries::constant(0.0);
    bool operator==(const CrimeOdeSpec&) const = default;

    socio::CrimeInputs inputs() const;
};

struct CrimeControlSpec {
    double D = 0.0;
    double r = 0.0;
    double K = 1.0;
    double alpha = 1.0;
    double P_max = 1.0;
    FieldSpec initial = ConstantField{0.0};
    double initial_control = 0.0;
    std::size_t iterations = 200;
    double initial_step = 1.0;
    bool operator==(const CrimeControlSpec&) const = default;

    socio::ControlProblem build(const TimeGrid& time, const SpatialGrid1D& space) const;
};

// Parameter records a sweep can be based on.
using SweepBase = std::variant<LorenzSpec, EcoSimpleSpec, CrimeOdeSpec>;

struct SweepSpec {
    Model family = Model::lorenz;
    SweepBase base;
    std::string parameter;
    double from = 0.0;
    double to = 1.0;
    std::size_t samples = 2;
    std::vector<std::vector<double>> seeds;
    double attractor_horizon = 20.0;
    bool parallel = false;
    bool operator==(const SweepSpec&) const = default;
};

struct Scenario;

struct IndicatorsSpec {
    // Exactly one element: the scenario whose trajectory is analysed.
    std::vector<Scenario> source;
    std::string component;
    std::size_t window = 0;
    bool operator==(const IndicatorsSpec& other) const;
};

using Parameters = std::variant<LorenzSpec, EcoSimpleSpec, EcoGeneralizedSpec, TransportSpec, AbatementSpec,
                                EroeiSpec, CrimeOdeSpec, CrimeControlSpec, SweepSpec, IndicatorsSpec>;

struct OutputSpec {
    std::vector<std::string> series;
    std::size_t snapshot_every = 1;
    bool operator==(const OutputSpec&) const = default;
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::string name;
    Model model = Model::lorenz;
    Parameters parameters;
    std::optional<TimeGrid> time;
    std::optional<SpatialGrid1D> space;
    std::optional<std::uint64_t> seed;
    OutputSpec outputs;
    std::map<std::string, std::string> units;
    bool operator==(const Scenario&) const = default;
};

// Parses and fully validates a document; throws ScenarioError listing
// every violation with its field path.
Scenario parse_scenario(std::string_view text);
Scenario parse_scenario(const json& document);

json to_json(const Scenario& s);
std::string serialize(const Scenario& s);  // pretty-printed, sorted keys

// SHA-256 of the canonical serialization; independent of key order in the source file.
std::string digest(const Scenario& s);

// Sets a dotted path ("parameters.rho", "parameters.initial.0") to a value
// given as JSON text, or as a plain string when it is not valid JSON.
void apply_override(json& document, std::string_view assignment);

// Output series a model can produce and the default selection.
std::vector<std::string> available_series(const Scenario& s);

struct NamedTable {
    std::string file;
    std::string kind;  // "table" or "snapshots" (long format grouped by the first column)
    io::OutputTable table;
};

struct RunOutputs {
    std::vector<NamedTable> tables;
    std::map<std::string, std::size_t> clamp_events;
};

// Runs the model and returns its tables without touching the filesystem.
RunOutputs compute_outputs(const Scenario& s);

struct OutputFile {
    std::string file;
    std::string kind;
    std::vector<std::string> columns;
    std::size_t rows = 0;
    std::string sha256;
};

struct RunRecord {
    std::string scenario_name;
    std::string model;
    std::string scenario_digest;
    std::string toolkit_version;
    std::optional<std::uint64_t> seed;
    std::string started;
    std::string finished;
    std::string status;  // "ok" or "failed"
    std::string error;
    std::vector<OutputFile> outputs;
    std::map<std::string, std::size_t> clamp_events;
};

json to_json(const RunRecord& r);
RunRecord run_record_from_json(const json& j);

inline constexpr std::string_view kRunRecordFile = "run.json";

// Writes every table plus run.json into out_dir. On a model failure the
// record is written with status "failed" and the error is rethrown.
RunRecord run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

// Scenario for sweeping one numeric parameter of a lorenz, eco-simple or
// crime-ode scenario. Throws ScenarioError for unsupported models or fields.
Scenario make_sweep(const json& base_document, std::string_view parameter, double from, double to,
                    std::size_t samples);

} // namespace sustain::scenario
