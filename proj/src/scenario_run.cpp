#include "sustain/scenario.hpp"

#include "sustain/indicators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>

namespace sustain::scenario {

std::vector<double> realize(const FieldSpec& spec, const SpatialGrid1D& grid) {
    grid.validate();
    std::vector<double> out(grid.cells, 0.0);
    if (const auto* c = std::get_if<ConstantField>(&spec)) {
        std::fill(out.begin(), out.end(), c->value);
    } else if (const auto* g = std::get_if<GaussianField>(&spec)) {
        for (std::size_t i = 0; i < grid.cells; ++i) {
            const double z = (grid.center(i) - g->center) / g->width;
            out[i] = g->amplitude * std::exp(-0.5 * z * z);
        }
    } else if (const auto* d = std::get_if<DeltaField>(&spec)) {
        if (d->position < grid.x0 || d->position > grid.x1) {
            throw ValidationError("delta position " + io::format_number(d->position) + " lies outside the domain");
        }
        // Split between the two nearest cell centres so mass and centre of mass are both kept.
        const double u = (d->position - grid.x0) / grid.dx() - 0.5;
        if (u <= 0.0) {
            out.front() = d->weight / grid.dx();
        } else if (u >= static_cast<double>(grid.cells - 1)) {
            out.back() = d->weight / grid.dx();
        } else {
            const auto left = static_cast<std::size_t>(u);
            const double frac = u - static_cast<double>(left);
            out[left] = (1.0 - frac) * d->weight / grid.dx();
            out[left + 1] = frac * d->weight / grid.dx();
        }
    } else if (const auto* v = std::get_if<ValuesField>(&spec)) {
        if (v->values.size() != grid.cells) {
            throw ValidationError("field has " + std::to_string(v->values.size()) + " values; the grid has " +
                                  std::to_string(grid.cells) + " cells");
        }
        out = v->values;
    }
    return out;
}

double InputSeries::operator()(double t) const {
    if (times.empty()) return values.front();
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

ecosystem::GeneralizedEcoParams EcoGeneralizedSpec::build() const {
    ecosystem::GeneralizedEcoParams p;
    p.growth = r_x;
    p.efficiency = delta;
    p.mortality = m;
    p.predation = predation.type == "holling2" ? ecosystem::holling_type2_predation(predation.a, predation.handling)
                                               : ecosystem::mass_action_predation(predation.a);
    for (const auto& r : resources) {
        ecosystem::Resource res;
        res.capacity = r.K;
        res.supply = r.S;
        res.depletion = r.depletion == "linear" ? ecosystem::linear_depletion(r.e)
                                                : ecosystem::prey_proportional_depletion(r.e, r.K);
        p.resources.push_back(std::move(res));
    }
    p.noise_prey = noise_x;
    p.noise_predator = noise_y;
    return p;
}

ecosystem::GeneralizedEcoState EcoGeneralizedSpec::initial_state() const {
    ecosystem::GeneralizedEcoState s;
    s.prey = initial[0];
    s.predator = initial[1];
    for (const auto& r : resources) s.resources.push_back(r.initial);
    return s;
}

pollution::TransportConfig TransportSpec::build(const SpatialGrid1D& grid) const {
    pollution::TransportConfig c;
    c.velocity = velocity;
    c.diffusivity = diffusivity;
    c.source = realize(source, grid);
    c.removal = realize(removal, grid);
    if (reaction == "linear-decay") {
        const double k = decay_rate;
        c.reaction = [k](double conc) { return -k * conc; };
    }
    c.grid = grid;
    return c;
}

pollution::AbatementProblem AbatementSpec::build() const {
    std::vector<double> e, c, x;
    for (const auto& s : sources) {
        e.push_back(s.E);
        c.push_back(s.c);
        x.push_back(s.x_max);
    }
    return pollution::AbatementProblem::quadratic(e, c, x, E_limit);
}

socio::CrimeInputs CrimeOdeSpec::inputs() const {
    return {[s = u1](double t) { return s(t); }, [s = u2](double t) { return s(t); },
            [s = trust](double t) { return s(t); }};
}

socio::ControlProblem CrimeControlSpec::build(const TimeGrid& time, const SpatialGrid1D& space) const {
    socio::ControlProblem p;
    p.diffusivity = D;
    p.growth = socio::logistic_growth(r, K);
    p.alpha = alpha;
    p.horizon = time;
    p.domain = space;
    p.initial = realize(initial, space);
    return p;
}

namespace {

using io::OutputTable;

bool wants(const Scenario& s, std::string_view series) {
    return std::find(s.outputs.series.begin(), s.outputs.series.end(), series) != s.outputs.series.end();
}

OutputTable trajectory_table(const Trajectory& traj, std::vector<std::string> columns) {
    OutputTable t;
    t.columns = std::move(columns);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<double> row{traj.times[k]};
        row.insert(row.end(), traj.states[k].begin(), traj.states[k].end());
        t.add_row(std::move(row));
    }
    return t;
}

struct TrajectoryRun {
    OutputTable table;
    std::size_t clamp_events = 0;
};

TrajectoryRun run_trajectory(const Scenario& s, std::optional<std::uint64_t> seed) {
    const TimeGrid& grid = *s.time;
    switch (s.model) {
    case Model::lorenz: {
        const auto& l = std::get<LorenzSpec>(s.parameters);
        const auto traj = climate::simulate_lorenz(l.params, {l.initial[0], l.initial[1], l.initial[2]}, grid);
        return {trajectory_table(traj, {"t", "x", "y", "z"}), traj.clamp_events};
    }
    case Model::eco_simple: {
        const auto& e = std::get<EcoSimpleSpec>(s.parameters);
        const auto traj = ecosystem::simulate_simple(e.params, {e.initial[0], e.initial[1]}, grid);
        OutputTable t;
        t.columns = {"t", "N1", "N2", "V"};
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const ecosystem::EcoState st{traj.states[k][0], traj.states[k][1]};
            const double v = st.prey > 0.0 && st.predator > 0.0 ? ecosystem::lv_conserved(st, e.params)
                                                                 : std::numeric_limits<double>::quiet_NaN();
            t.add_row({traj.times[k], st.prey, st.predator, v});
        }
        return {std::move(t), traj.clamp_events};
    }
    case Model::eco_generalized: {
        const auto& e = std::get<EcoGeneralizedSpec>(s.parameters);
        if (!seed) throw ValidationError("stochastic run needs a seed");
        const auto traj = ecosystem::simulate_generalized(e.build(), e.initial_state(), grid, *seed);
        std::vector<std::string> cols{"t", "x", "y"};
        for (std::size_t i = 0; i < e.resources.size(); ++i) cols.push_back("R" + std::to_string(i + 1));
        return {trajectory_table(traj, cols), traj.clamp_events};
    }
    case Model::eroei: {
        const auto& e = std::get<EroeiSpec>(s.parameters);
        const auto traj = energy::simulate_depletion(e.params, e.R0, grid);
        OutputTable t;
        t.columns = {"t", "R", "E_o", "E_i", "eroei"};
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            t.add_row({traj.times[k], traj.resource[k], traj.output[k], traj.investment[k], traj.eroei[k]});
        }
        return {std::move(t), traj.clamp_events};
    }
    case Model::crime_ode: {
        const auto& c = std::get<CrimeOdeSpec>(s.parameters);
        const auto traj = socio::simulate_crime_ode(c.params, c.inputs(), c.x0, grid);
        return {trajectory_table(traj, {"t", "x"}), traj.clamp_events};
    }
    default:
        throw ValidationError(std::string(to_string(s.model)) + " does not produce a trajectory");
    }
}

OutputTable field_table(const std::vector<double>& times, const std::vector<std::vector<double>>& fields,
                        const SpatialGrid1D& grid, const char* name) {
    OutputTable t;
    t.columns = {"t", "x", name};
    for (std::size_t k = 0; k < fields.size(); ++k) {
        for (std::size_t i = 0; i < grid.cells; ++i) t.add_row({times[k], grid.center(i), fields[k][i]});
    }
    return t;
}

OutputTable history_table(const std::vector<double>& history) {
    OutputTable t;
    t.columns = {"iteration", "objective"};
    for (std::size_t i = 0; i < history.size(); ++i) t.add_row({static_cast<double>(i), history[i]});
    return t;
}

indicators::ParameterFamily sweep_family(const SweepSpec& s) {
    indicators::ParameterFamily f;
    const std::string name = s.parameter;
    switch (s.family) {
    case Model::lorenz: {
        const auto base = std::get<LorenzSpec>(s.base);
        f.dim = 3;
        f.rhs = [base, name](double value, std::span<const double> y, std::span<double> dydt) {
            climate::LorenzParams p = base.params;
            if (name == "sigma") p.sigma = value;
            else if (name == "rho") p.rho = value;
            else p.beta = value;
            const auto d = climate::lorenz_rhs({y[0], y[1], y[2]}, p);
            dydt[0] = d.x;
            dydt[1] = d.y;
            dydt[2] = d.z;
        };
        if (s.seeds.empty()) {
            f.seeds.push_back({base.initial[0], base.initial[1], base.initial[2]});
            f.seeds.push_back({-base.initial[0], -base.initial[1], base.initial[2]});
            // Points on the curve x = y, z = x^2 / beta that the symmetric pair follows as rho grows.
            for (double a : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
                const double z = a * a / base.params.beta;
                f.seeds.push_back({a, a, z});
                f.seeds.push_back({-a, -a, z});
            }
        }
        break;
    }
    case Model::eco_simple: {
        const auto base = std::get<EcoSimpleSpec>(s.base);
        f.dim = 2;
        f.rhs = [base, name](double value, std::span<const double> y, std::span<double> dydt) {
            ecosystem::SimpleEcoParams p = base.params;
            if (name == "r") p.r = value;
            else if (name == "c") p.c = value;
            else if (name == "b") p.b = value;
            else p.m = value;
            const auto d = ecosystem::simple_rhs({y[0], y[1]}, p);
            dydt[0] = d.prey;
            dydt[1] = d.predator;
        };
        if (s.seeds.empty()) f.seeds.push_back({base.initial[0], base.initial[1]});
        break;
    }
    default: {
        const auto base = std::get<CrimeOdeSpec>(s.base);
        // Inputs are frozen at t = 0 so each sample is an autonomous system.
        const double u1 = base.u1(0.0), u2 = base.u2(0.0), trust = base.trust(0.0);
        const auto inputs = socio::CrimeInputs::constant(u1, u2, trust);
        f.dim = 1;
        f.rhs = [base, name, inputs](double value, std::span<const double> y, std::span<double> dydt) {
            socio::CrimeOdeParams p = base.params;
            if (name == "a") p.a = value;
            else if (name == "b") p.b = value;
            else if (name == "c") p.c = value;
            else p.d = value;
            dydt[0] = socio::crime_ode_rhs(y[0], 0.0, p, inputs);
        };
        if (s.seeds.empty()) f.seeds.push_back({base.x0});
        break;
    }
    }
    for (const auto& seed : s.seeds) f.seeds.push_back(seed);
    return f;
}

std::string has(const std::string& reason, const char* what) {
    return reason.find(what) != std::string::npos ? "1" : "0";
}

} // namespace

RunOutputs compute_outputs(const Scenario& s) {
    RunOutputs out;
    auto add = [&out, &s](std::string series, std::string kind, OutputTable table) {
        if (!wants(s, series)) return;
        out.tables.push_back({series + ".csv", std::move(kind), std::move(table)});
    };

    switch (s.model) {
    case Model::lorenz: {
        const auto& l = std::get<LorenzSpec>(s.parameters);
        const climate::LorenzState y0{l.initial[0], l.initial[1], l.initial[2]};
        if (wants(s, "trajectory")) {
            auto run = run_trajectory(s, s.seed);
            out.clamp_events["trajectory"] = run.clamp_events;
            add("trajectory", "table", std::move(run.table));
        }
        if (wants(s, "divergence") && l.perturbation) {
            const auto& d = *l.perturbation;
            const auto sep = climate::divergence_experiment(l.params, y0, {d[0], d[1], d[2]}, *s.time);
            OutputTable t;
            t.columns = {"t", "separation"};
            for (std::size_t k = 0; k < sep.times.size(); ++k) t.add_row({sep.times[k], sep.separation[k]});
            add("divergence", "table", std::move(t));
        }
        if (wants(s, "lyapunov")) {
            climate::LyapunovSettings settings;
            if (l.lyapunov) {
                settings.step = l.lyapunov->step;
                settings.renormalization_interval = l.lyapunov->renormalization_interval;
                settings.total_time = l.lyapunov->total_time;
                settings.transient = l.lyapunov->transient;
            }
            const double lambda = climate::max_lyapunov(l.params, y0, settings);
            OutputTable t;
            t.columns = {"step", "renormalization_interval", "total_time", "transient", "lyapunov"};
            t.add_row({settings.step, settings.renormalization_interval, settings.total_time,
                       settings.transient_time(), lambda});
            add("lyapunov", "table", std::move(t));
        }
        break;
    }
    case Model::eco_simple:
    case Model::eco_generalized:
    case Model::eroei:
    case Model::crime_ode: {
        auto run = run_trajectory(s, s.seed);
        out.clamp_events["trajectory"] = run.clamp_events;
        add("trajectory", "table", std::move(run.table));
        break;
    }
    case Model::transport: {
        const auto& t = std::get<TransportSpec>(s.parameters);
        const auto config = t.build(*s.space);
        pollution::ConcentrationField init{realize(t.initial, *s.space), *s.space, s.time->t0, 0};
        const auto snaps = pollution::simulate_transport(config, init, *s.time, s.outputs.snapshot_every);
        std::vector<double> times;
        std::vector<std::vector<double>> fields;
        OutputTable mass;
        mass.columns = {"t", "mass"};
        for (const auto& f : snaps) {
            times.push_back(f.time);
            fields.push_back(f.values);
            mass.add_row({f.time, pollution::total_mass(f)});
        }
        out.clamp_events["snapshots"] = snaps.back().clamp_events;
        add("snapshots", "snapshots", field_table(times, fields, *s.space, "C"));
        add("mass", "table", std::move(mass));
        break;
    }
    case Model::abatement: {
        const auto& a = std::get<AbatementSpec>(s.parameters);
        const auto problem = a.build();
        const auto sol = pollution::optimize_abatement(problem);
        OutputTable alloc;
        alloc.columns = {"source", "baseline", "reduction", "emission", "marginal_cost", "cost"};
        double emission = 0.0;
        for (std::size_t i = 0; i < problem.sources.size(); ++i) {
            const auto& src = problem.sources[i];
            const double x = sol.reductions[i];
            emission += src.baseline - x;
            alloc.add_row({static_cast<double>(i + 1), src.baseline, x, src.baseline - x, src.cost.marginal(x),
                           src.cost.cost(x)});
        }
        OutputTable summary;
        summary.columns = {"total_cost", "multiplier", "total_emission", "cap"};
        summary.add_row({sol.total_cost, sol.multiplier, emission, problem.cap});
        add("allocations", "table", std::move(alloc));
        add("summary", "table", std::move(summary));
        add("objective_history", "table", history_table(sol.cost_history));
        break;
    }
    case Model::crime_control: {
        const auto& c = std::get<CrimeControlSpec>(s.parameters);
        const auto problem = c.build(*s.time, *s.space);
        auto initial = socio::ControlField::zeros(problem, c.P_max);
        std::fill(initial.values().begin(), initial.values().end(), c.initial_control);
        socio::PgdSettings settings;
        settings.iterations = c.iterations;
        settings.initial_step = c.initial_step;
        const auto result = socio::optimize_police(problem, initial, settings);
        const auto crime = socio::forward_crime_pde(problem, result.control);
        std::vector<double> times;
        std::vector<std::vector<double>> controls;
        for (std::size_t k = 0; k < problem.nodes(); ++k) {
            times.push_back(problem.horizon.node(k));
            const auto row = result.control.row(k);
            controls.emplace_back(row.begin(), row.end());
        }
        out.clamp_events["crime"] = crime.clamp_events;
        add("control", "snapshots", field_table(times, controls, *s.space, "P"));
        add("crime", "snapshots", field_table(times, crime.fields, *s.space, "C"));
        add("objective_history", "table", history_table(result.objective_history));
        break;
    }
    case Model::sweep: {
        const auto& sw = std::get<SweepSpec>(s.parameters);
        indicators::SweepSettings settings;
        settings.attractor_horizon = sw.attractor_horizon;
        settings.parallel = sw.parallel;
        const auto result = indicators::bifurcation_sweep(sweep_family(sw), sw.from, sw.to, sw.samples, settings);
        OutputTable samples;
        samples.columns = {"parameter", "equilibria", "leading_sign", "leading_real_part", "attractor_bound",
                           "newton_failures"};
        for (const auto& r : result.samples) {
            samples.add_row({r.parameter, static_cast<double>(r.equilibria_count), static_cast<double>(r.leading_sign),
                             r.leading_real_part, r.attractor_bound, static_cast<double>(r.newton_failures)});
        }
        OutputTable transitions;
        transitions.columns = {"lower", "upper", "equilibria_changed", "stability_changed"};
        for (const auto& t : result.transitions) {
            transitions.add_row({t.lower, t.upper, std::stod(has(t.reason, "equilibria")),
                                 std::stod(has(t.reason, "stability"))});
        }
        add("sweep", "table", std::move(samples));
        add("transitions", "table", std::move(transitions));
        break;
    }
    case Model::indicators: {
        const auto& ind = std::get<IndicatorsSpec>(s.parameters);
        const Scenario& src = ind.source.front();
        auto run = run_trajectory(src, s.seed);
        out.clamp_events["source"] = run.clamp_events;
        const auto& table = run.table;
        const std::size_t col = table.column_index(ind.component);
        std::vector<double> times, values;
        for (const auto& row : table.rows) {
            times.push_back(row[0]);
            values.push_back(row[col]);
        }
        if (ind.window > values.size()) {
            throw ValidationError("window of " + std::to_string(ind.window) + " exceeds the " +
                                  std::to_string(values.size()) + "-sample source trajectory");
        }
        const auto var = indicators::rolling_variance(times, values, ind.window);
        const auto ac = indicators::lag1_autocorrelation(times, values, ind.window);
        OutputTable t;
        t.columns = {"t", "value", "variance", "autocorrelation"};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < values.size(); ++k) {
            const bool full = k + 1 >= ind.window;
            t.add_row({times[k], values[k], full ? var.values[k + 1 - ind.window] : nan,
                       full ? ac.values[k + 1 - ind.window] : nan});
        }
        add("indicators", "table", std::move(t));
        break;
    }
    }
    return out;
}

namespace {

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t secs = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

} // namespace

json to_json(const RunRecord& r) {
    json outputs = json::array();
    for (const auto& o : r.outputs) {
        outputs.push_back(
            {{"file", o.file}, {"kind", o.kind}, {"columns", o.columns}, {"rows", o.rows}, {"sha256", o.sha256}});
    }
    json j{{"scenario_name", r.scenario_name},
           {"model", r.model},
           {"scenario_digest", r.scenario_digest},
           {"toolkit_version", r.toolkit_version},
           {"started", r.started},
           {"finished", r.finished},
           {"status", r.status},
           {"error", r.error},
           {"outputs", outputs},
           {"clamp_events", r.clamp_events}};
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    return j;
}

RunRecord run_record_from_json(const json& j) {
    try {
        RunRecord r;
        r.scenario_name = j.at("scenario_name").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.scenario_digest = j.at("scenario_digest").get<std::string>();
        r.toolkit_version = j.at("toolkit_version").get<std::string>();
        if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
        r.started = j.at("started").get<std::string>();
        r.finished = j.at("finished").get<std::string>();
        r.status = j.at("status").get<std::string>();
        r.error = j.at("error").get<std::string>();
        for (const auto& o : j.at("outputs")) {
            r.outputs.push_back({o.at("file").get<std::string>(), o.at("kind").get<std::string>(),
                                 o.at("columns").get<std::vector<std::string>>(), o.at("rows").get<std::size_t>(),
                                 o.at("sha256").get<std::string>()});
        }
        r.clamp_events = j.at("clamp_events").get<std::map<std::string, std::size_t>>();
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed run record: ") + e.what());
    }
}

RunRecord run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
    RunRecord rec;
    rec.scenario_name = s.name;
    rec.model = std::string(to_string(s.model));
    rec.scenario_digest = digest(s);
    rec.toolkit_version = SUSTAIN_VERSION;
    rec.seed = s.seed;
    rec.started = timestamp();

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    io::write_file(out_dir / "scenario.json", serialize(s));

    auto write_record = [&] {
        rec.finished = timestamp();
        io::write_file(out_dir / std::string(kRunRecordFile), to_json(rec).dump(2) + "\n");
    };

    try {
        auto outputs = compute_outputs(s);
        for (const auto& t : outputs.tables) {
            const std::string csv = io::to_csv(t.table);
            io::write_file(out_dir / t.file, csv);
            rec.outputs.push_back({t.file, t.kind, t.table.columns, t.table.rows.size(), io::sha256_hex(csv)});
        }
        rec.clamp_events = std::move(outputs.clamp_events);
        rec.status = "ok";
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.error = e.what();
        rec.outputs.clear();
        write_record();
        throw;
    }
    write_record();
    return rec;
}

} // namespace sustain::scenario
