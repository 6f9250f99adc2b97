#include "sustain/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace sustain::scenario {

namespace {

constexpr std::array<std::pair<Model, std::string_view>, 10> kModelNames{{
    {Model::lorenz, "lorenz"},
    {Model::eco_simple, "eco-simple"},
    {Model::eco_generalized, "eco-generalized"},
    {Model::transport, "transport"},
    {Model::abatement, "abatement"},
    {Model::eroei, "eroei"},
    {Model::crime_ode, "crime-ode"},
    {Model::crime_control, "crime-control"},
    {Model::sweep, "sweep"},
    {Model::indicators, "indicators"},
}};

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest(std::string_view key, const std::vector<std::string>& candidates) {
    std::string best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (const auto& c : candidates) {
        const std::size_t d = edit_distance(key, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::string fmt(double v) { return io::format_number(v); }

enum class Check { any, positive, non_negative, unit_interval };

const char* describe(Check c) {
    switch (c) {
    case Check::any: return "must be a finite number";
    case Check::positive: return "must be positive";
    case Check::non_negative: return "must be non-negative";
    case Check::unit_interval: return "must lie in (0, 1]";
    }
    return "";
}

bool passes(double v, Check c) {
    if (!std::isfinite(v)) return false;
    switch (c) {
    case Check::any: return true;
    case Check::positive: return v > 0.0;
    case Check::non_negative: return v >= 0.0;
    case Check::unit_interval: return v > 0.0 && v <= 1.0;
    }
    return false;
}

// Typed access to one JSON object that records every problem and every key
// it was asked about, so unread keys can be reported as unknown.
class Reader {
public:
    Reader(const json* node, std::string path, std::vector<Issue>& issues)
        : node_(node), path_(std::move(path)), issues_(&issues) {
        if (node_ && !node_->is_object()) {
            issue_here("must be an object");
            node_ = nullptr;
        }
    }

    bool valid() const { return node_ != nullptr; }
    const std::string& path() const { return path_; }

    std::string path_of(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    void issue(std::string_view key, std::string message) { issues_->push_back({path_of(key), std::move(message)}); }
    void issue_here(std::string message) { issues_->push_back({path_, std::move(message)}); }

    const json* raw(std::string_view key) {
        known_.emplace_back(key);
        if (!node_) return nullptr;
        const auto it = node_->find(std::string(key));
        return it == node_->end() ? nullptr : &*it;
    }

    bool has(std::string_view key) {
        return raw(key) != nullptr;
    }

    double number(std::string_view key, Check check = Check::any, std::optional<double> fallback = std::nullopt) {
        const json* j = raw(key);
        if (!j) {
            if (fallback) return *fallback;
            if (node_) issue(key, "is required");
            return 0.0;
        }
        if (!j->is_number()) {
            issue(key, "must be a number");
            return fallback.value_or(0.0);
        }
        const double v = j->get<double>();
        if (!passes(v, check)) issue(key, std::string(describe(check)) + " (got " + fmt(v) + ")");
        return v;
    }

    std::optional<double> optional_number(std::string_view key, Check check = Check::any) {
        if (!has(key)) return std::nullopt;
        return number(key, check);
    }

    std::size_t count(std::string_view key, std::size_t minimum, std::optional<std::size_t> fallback = std::nullopt) {
        const json* j = raw(key);
        if (!j) {
            if (fallback) return *fallback;
            if (node_) issue(key, "is required");
            return minimum;
        }
        if (!j->is_number_integer() || j->get<long long>() < 0) {
            issue(key, "must be a non-negative integer");
            return fallback.value_or(minimum);
        }
        const auto v = j->get<std::size_t>();
        if (v < minimum) issue(key, "must be at least " + std::to_string(minimum) + " (got " + std::to_string(v) + ")");
        return v;
    }

    bool flag(std::string_view key, bool fallback) {
        const json* j = raw(key);
        if (!j) return fallback;
        if (!j->is_boolean()) {
            issue(key, "must be true or false");
            return fallback;
        }
        return j->get<bool>();
    }

    std::string text(std::string_view key, const std::vector<std::string>& choices = {},
                     std::optional<std::string> fallback = std::nullopt) {
        const json* j = raw(key);
        if (!j) {
            if (fallback) return *fallback;
            if (node_) issue(key, "is required");
            return choices.empty() ? std::string() : choices.front();
        }
        if (!j->is_string()) {
            issue(key, "must be a string");
            return fallback.value_or(choices.empty() ? std::string() : choices.front());
        }
        std::string v = j->get<std::string>();
        if (!choices.empty() && std::find(choices.begin(), choices.end(), v) == choices.end()) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
            issue(key, "'" + v + "' is not one of: " + list + " (did you mean '" + nearest(v, choices) + "'?)");
        }
        return v;
    }

    std::vector<double> numbers(std::string_view key, std::size_t exact, Check check, bool required = true) {
        const json* j = raw(key);
        if (!j) {
            if (required && node_) issue(key, "is required");
            return std::vector<double>(exact, 0.0);
        }
        return numbers_from(*j, path_of(key), exact, check);
    }

    std::vector<double> numbers_from(const json& j, const std::string& where, std::size_t exact, Check check) {
        if (!j.is_array()) {
            issues_->push_back({where, "must be an array of numbers"});
            return std::vector<double>(exact, 0.0);
        }
        if (exact != 0 && j.size() != exact) {
            issues_->push_back({where, "must have exactly " + std::to_string(exact) + " entries (got " +
                                           std::to_string(j.size()) + ")"});
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) {
            const std::string at = where + "[" + std::to_string(i) + "]";
            if (!j[i].is_number()) {
                issues_->push_back({at, "must be a number"});
                out.push_back(0.0);
                continue;
            }
            const double v = j[i].get<double>();
            if (!passes(v, check)) issues_->push_back({at, std::string(describe(check)) + " (got " + fmt(v) + ")"});
            out.push_back(v);
        }
        if (exact != 0) out.resize(exact, 0.0);
        return out;
    }

    Reader child(std::string_view key, bool required) {
        const json* j = raw(key);
        if (!j && required && node_) issue(key, "is required");
        return Reader(j, path_of(key), *issues_);
    }

    std::vector<Reader> children(std::string_view key, std::size_t minimum) {
        const json* j = raw(key);
        std::vector<Reader> out;
        if (!j) {
            if (node_ && minimum > 0) issue(key, "is required");
            return out;
        }
        if (!j->is_array()) {
            issue(key, "must be an array");
            return out;
        }
        if (j->size() < minimum) issue(key, "needs at least " + std::to_string(minimum) + " entries");
        for (std::size_t i = 0; i < j->size(); ++i) {
            out.emplace_back(&(*j)[i], path_of(key) + "[" + std::to_string(i) + "]", *issues_);
        }
        return out;
    }

    // Reports keys that were never asked for.
    void finish() {
        if (!node_) return;
        for (const auto& [key, value] : node_->items()) {
            if (std::find(known_.begin(), known_.end(), key) != known_.end()) continue;
            std::string msg = "unknown field";
            if (!known_.empty()) msg += "; did you mean '" + nearest(key, known_) + "'?";
            issue(key, msg);
        }
    }

    std::vector<Issue>& issues() { return *issues_; }

private:
    const json* node_;
    std::string path_;
    std::vector<Issue>* issues_;
    std::vector<std::string> known_;
};

FieldSpec parse_field(Reader r, bool nonnegative) {
    const Check check = nonnegative ? Check::non_negative : Check::any;
    const std::string type = r.text("type", {"constant", "gaussian", "delta", "values"});
    FieldSpec out;
    if (type == "gaussian") {
        const double center = r.number("center");
        const double width = r.number("width", Check::positive);
        const double amplitude = r.number("amplitude", check);
        out = GaussianField{center, width, amplitude};
    } else if (type == "delta") {
        const double position = r.number("position");
        const double weight = r.number("weight", check);
        out = DeltaField{position, weight};
    } else if (type == "values") {
        out = ValuesField{r.numbers("values", 0, check)};
    } else {
        out = ConstantField{r.number("value", check)};
    }
    r.finish();
    return out;
}

InputSeries parse_input(Reader& parent, std::string_view key) {
    const json* j = parent.raw(key);
    if (!j) return InputSeries::constant(0.0);
    if (j->is_number()) {
        const double v = j->get<double>();
        if (!passes(v, Check::non_negative)) parent.issue(key, "must be non-negative (got " + fmt(v) + ")");
        return InputSeries::constant(v);
    }
    Reader r(j, parent.path_of(key), parent.issues());
    InputSeries s;
    s.times = r.numbers("times", 0, Check::any);
    s.values = r.numbers("values", 0, Check::non_negative);
    if (r.valid()) {
        if (s.times.empty()) r.issue("times", "needs at least one entry");
        if (s.times.size() != s.values.size()) r.issue("values", "must have as many entries as times");
        for (std::size_t i = 1; i < s.times.size(); ++i) {
            if (!(s.times[i] > s.times[i - 1])) {
                r.issue("times", "must be strictly increasing");
                break;
            }
        }
    }
    r.finish();
    if (s.values.empty()) return InputSeries::constant(0.0);
    return s;
}

std::array<double, 3> to3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }
std::array<double, 2> to2(const std::vector<double>& v) { return {v[0], v[1]}; }

LorenzSpec parse_lorenz(Reader& p) {
    LorenzSpec s;
    s.params.sigma = p.number("sigma", Check::positive);
    s.params.rho = p.number("rho", Check::positive);
    s.params.beta = p.number("beta", Check::positive);
    s.initial = to3(p.numbers("initial", 3, Check::any));
    if (p.has("perturbation")) {
        const auto v = p.numbers("perturbation", 3, Check::any);
        if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) p.issue("perturbation", "must be non-zero");
        s.perturbation = to3(v);
    }
    if (p.has("lyapunov")) {
        Reader l = p.child("lyapunov", false);
        LyapunovSpec ls;
        ls.step = l.number("step", Check::positive, 0.001);
        ls.renormalization_interval = l.number("renormalization_interval", Check::positive, 0.1);
        ls.total_time = l.number("total_time", Check::positive, 200.0);
        ls.transient = l.optional_number("transient", Check::non_negative);
        if (ls.renormalization_interval < ls.step) {
            l.issue("renormalization_interval", "must be at least one step");
        }
        if (ls.transient && *ls.transient >= ls.total_time) l.issue("transient", "must be shorter than total_time");
        l.finish();
        s.lyapunov = ls;
    }
    return s;
}

EcoSimpleSpec parse_eco_simple(Reader& p) {
    EcoSimpleSpec s;
    s.params.r = p.number("r", Check::positive);
    s.params.c = p.number("c", Check::positive);
    s.params.b = p.number("b", Check::positive);
    s.params.m = p.number("m", Check::positive);
    s.initial = to2(p.numbers("initial", 2, Check::non_negative));
    return s;
}

EcoGeneralizedSpec parse_eco_generalized(Reader& p) {
    EcoGeneralizedSpec s;
    s.r_x = p.number("r_x", Check::positive);
    s.delta = p.number("delta", Check::unit_interval);
    s.m = p.number("m", Check::positive);
    {
        Reader g = p.child("predation", true);
        s.predation.type = g.text("type", {"mass-action", "holling2"}, "mass-action");
        s.predation.a = g.number("a", Check::non_negative);
        if (s.predation.type == "holling2") s.predation.handling = g.number("handling", Check::non_negative);
        g.finish();
    }
    for (Reader& r : p.children("resources", 1)) {
        ResourceSpec rs;
        rs.K = r.number("K", Check::positive);
        rs.S = r.number("S", Check::non_negative);
        rs.depletion = r.text("depletion", {"prey-proportional", "linear"}, "prey-proportional");
        rs.e = r.number("e", Check::non_negative);
        rs.initial = r.number("initial", Check::non_negative);
        r.finish();
        s.resources.push_back(rs);
    }
    s.noise_x = p.number("noise_x", Check::non_negative, 0.0);
    s.noise_y = p.number("noise_y", Check::non_negative, 0.0);
    s.initial = to2(p.numbers("initial", 2, Check::non_negative));
    return s;
}

TransportSpec parse_transport(Reader& p) {
    TransportSpec s;
    s.velocity = p.number("velocity", Check::any, 0.0);
    s.diffusivity = p.number("diffusivity", Check::non_negative, 0.0);
    if (p.has("source")) s.source = parse_field(p.child("source", false), true);
    if (p.has("removal")) s.removal = parse_field(p.child("removal", false), true);
    if (p.has("reaction")) {
        Reader q = p.child("reaction", false);
        s.reaction = q.text("type", {"none", "linear-decay"}, "none");
        if (s.reaction == "linear-decay") s.decay_rate = q.number("k", Check::non_negative);
        q.finish();
    }
    s.initial = parse_field(p.child("initial", true), true);
    return s;
}

AbatementSpec parse_abatement(Reader& p) {
    AbatementSpec s;
    for (Reader& r : p.children("sources", 1)) {
        AbatementSourceSpec src;
        src.E = r.number("E", Check::non_negative);
        src.c = r.number("c", Check::positive);
        src.x_max = r.number("x_max", Check::non_negative, src.E);
        if (src.x_max > src.E) r.issue("x_max", "must not exceed E (" + fmt(src.E) + ")");
        r.finish();
        s.sources.push_back(src);
    }
    s.E_limit = p.number("E_limit", Check::non_negative);
    return s;
}

EroeiSpec parse_eroei(Reader& p) {
    EroeiSpec s;
    s.params.eta = p.number("eta", Check::positive);
    s.params.kappa = p.number("kappa", Check::positive);
    s.params.n = p.number("n", Check::positive);
    s.params.beta = p.number("beta", Check::non_negative);
    s.params.E_i0 = p.number("E_i0", Check::positive);
    s.params.R_max = p.number("R_max", Check::positive);
    s.R0 = p.number("R0", Check::positive);
    if (s.R0 > s.params.R_max) p.issue("R0", "must not exceed R_max (" + fmt(s.params.R_max) + ")");
    return s;
}

CrimeOdeSpec parse_crime_ode(Reader& p) {
    CrimeOdeSpec s;
    s.params.a = p.number("a", Check::any);
    s.params.b = p.number("b", Check::non_negative);
    s.params.c = p.number("c", Check::non_negative);
    s.params.d = p.number("d", Check::non_negative);
    s.x0 = p.number("x0", Check::non_negative);
    s.u1 = parse_input(p, "u1");
    s.u2 = parse_input(p, "u2");
    s.trust = parse_input(p, "trust");
    return s;
}

CrimeControlSpec parse_crime_control(Reader& p) {
    CrimeControlSpec s;
    s.D = p.number("D", Check::non_negative);
    s.r = p.number("r", Check::any);
    s.K = p.number("K", Check::positive);
    s.alpha = p.number("alpha", Check::positive);
    s.P_max = p.number("P_max", Check::positive);
    s.initial = parse_field(p.child("initial", true), true);
    s.initial_control = p.number("initial_control", Check::non_negative, 0.0);
    s.iterations = p.count("iterations", 1, 200);
    s.initial_step = p.number("initial_step", Check::positive, 1.0);
    return s;
}

const std::vector<std::string>& sweepable(Model family) {
    static const std::vector<std::string> lorenz{"sigma", "rho", "beta"};
    static const std::vector<std::string> eco{"r", "c", "b", "m"};
    static const std::vector<std::string> crime{"a", "b", "c", "d"};
    static const std::vector<std::string> none;
    switch (family) {
    case Model::lorenz: return lorenz;
    case Model::eco_simple: return eco;
    case Model::crime_ode: return crime;
    default: return none;
    }
}

std::size_t family_dim(Model family) {
    switch (family) {
    case Model::lorenz: return 3;
    case Model::eco_simple: return 2;
    default: return 1;
    }
}

SweepSpec parse_sweep(Reader& p) {
    SweepSpec s;
    const std::string family = p.text("family", {"lorenz", "eco-simple", "crime-ode"});
    s.family = parse_model(family).value_or(Model::lorenz);
    {
        Reader b = p.child("base", true);
        switch (s.family) {
        case Model::eco_simple: s.base = parse_eco_simple(b); break;
        case Model::crime_ode: s.base = parse_crime_ode(b); break;
        default: s.base = parse_lorenz(b); break;
        }
        b.finish();
    }
    s.parameter = p.text("parameter", sweepable(s.family));
    s.from = p.number("from");
    s.to = p.number("to");
    s.samples = p.count("samples", 2);
    if (s.from == s.to) p.issue("to", "must differ from 'from'");
    // The swept parameter keeps its own invariant over the whole range.
    const bool must_be_positive = s.family != Model::crime_ode;
    const bool must_be_nonneg = s.family == Model::crime_ode && s.parameter != "a";
    if (must_be_positive && (s.from <= 0.0 || s.to <= 0.0)) {
        p.issue("from", "sweep range for '" + s.parameter + "' must stay positive");
    }
    if (must_be_nonneg && (s.from < 0.0 || s.to < 0.0)) {
        p.issue("from", "sweep range for '" + s.parameter + "' must stay non-negative");
    }
    if (const json* seeds = p.raw("seeds")) {
        if (!seeds->is_array()) {
            p.issue("seeds", "must be an array of states");
        } else {
            for (std::size_t i = 0; i < seeds->size(); ++i) {
                s.seeds.push_back(p.numbers_from((*seeds)[i], p.path_of("seeds") + "[" + std::to_string(i) + "]",
                                                 family_dim(s.family), Check::any));
            }
        }
    }
    s.attractor_horizon = p.number("attractor_horizon", Check::non_negative, 20.0);
    s.parallel = p.flag("parallel", false);
    return s;
}

std::optional<TimeGrid> parse_time(Reader& root, bool wanted) {
    if (!wanted) {
        if (root.has("time")) root.issue("time", "is not used by this model");
        return std::nullopt;
    }
    Reader t = root.child("time", true);
    if (!t.valid()) return std::nullopt;
    TimeGrid g;
    g.t0 = t.number("t0", Check::any, 0.0);
    g.t1 = t.number("t1", Check::any);
    g.step = t.number("step", Check::positive);
    t.finish();
    if (!(g.t1 > g.t0)) t.issue("t1", "must exceed t0");
    else if (g.step > 0.0 && std::isfinite(g.step) && (g.t1 - g.t0) / g.step > static_cast<double>(kMaxSteps)) {
        t.issue("step", "gives more than " + std::to_string(kMaxSteps) + " steps");
    }
    return g;
}

std::optional<SpatialGrid1D> parse_space(Reader& root, bool wanted) {
    if (!wanted) {
        if (root.has("space")) root.issue("space", "is not used by this model");
        return std::nullopt;
    }
    Reader s = root.child("space", true);
    if (!s.valid()) return std::nullopt;
    SpatialGrid1D g;
    g.x0 = s.number("x0", Check::any, 0.0);
    g.x1 = s.number("x1", Check::any);
    g.cells = s.count("cells", 3);
    const std::string b = s.text("boundary", {"zero-flux", "periodic", "absorbing"}, "zero-flux");
    try {
        g.boundary = parse_boundary(b);
    } catch (const ValidationError&) {
        // already reported by text()
    }
    s.finish();
    if (!(g.x1 > g.x0)) s.issue("x1", "must exceed x0");
    return g;
}

bool needs_time(Model m) {
    return m != Model::abatement && m != Model::sweep && m != Model::indicators;
}

bool needs_space(Model m) { return m == Model::transport || m == Model::crime_control; }

bool produces_trajectory(Model m) {
    return m == Model::lorenz || m == Model::eco_simple || m == Model::eco_generalized || m == Model::eroei ||
           m == Model::crime_ode;
}

std::vector<std::string> unit_keys(const Scenario& s) {
    std::vector<std::string> keys;
    if (s.time) keys.push_back("time");
    if (s.space) keys.push_back("length");
    auto add = [&keys](std::initializer_list<const char*> more) { keys.insert(keys.end(), more.begin(), more.end()); };
    Model m = s.model;
    if (m == Model::sweep) m = std::get<SweepSpec>(s.parameters).family;
    switch (m) {
    case Model::lorenz: add({"sigma", "rho", "beta"}); break;
    case Model::eco_simple: add({"r", "c", "b", "m", "population"}); break;
    case Model::eco_generalized: add({"r_x", "m", "population", "resource"}); break;
    case Model::transport: add({"velocity", "diffusivity", "concentration"}); break;
    case Model::abatement: add({"emission", "cost"}); break;
    case Model::eroei: add({"energy", "eta", "kappa"}); break;
    case Model::crime_ode: add({"a", "crime"}); break;
    case Model::crime_control: add({"D", "crime", "alpha"}); break;
    default: break;
    }
    return keys;
}

std::vector<std::string> series_for(const Scenario& s) {
    switch (s.model) {
    case Model::lorenz: return {"trajectory", "divergence", "lyapunov"};
    case Model::transport: return {"snapshots", "mass"};
    case Model::abatement: return {"allocations", "summary", "objective_history"};
    case Model::crime_control: return {"control", "crime", "objective_history"};
    case Model::sweep: return {"sweep", "transitions"};
    case Model::indicators: return {"indicators"};
    default: return {"trajectory"};
    }
}

std::vector<std::string> default_series(const Scenario& s) {
    if (s.model == Model::lorenz) {
        const auto& l = std::get<LorenzSpec>(s.parameters);
        std::vector<std::string> out{"trajectory"};
        if (l.perturbation) out.push_back("divergence");
        if (l.lyapunov) out.push_back("lyapunov");
        return out;
    }
    return series_for(s);
}

std::size_t field_length(const FieldSpec& f) {
    if (const auto* v = std::get_if<ValuesField>(&f)) return v->values.size();
    return 0;
}

void check_field_fits(Reader& r, const char* key, const FieldSpec& f, const std::optional<SpatialGrid1D>& space) {
    const std::size_t n = field_length(f);
    if (n != 0 && space && n != space->cells) {
        r.issue(std::string(key) + ".values", "has " + std::to_string(n) + " entries; the grid has " +
                                                  std::to_string(space->cells) + " cells");
    }
}

// Parses model, parameters, grids and units; shared by top-level documents and indicator sources.
Scenario parse_body(Reader& root, bool nested);

std::vector<std::string> trajectory_columns(const Scenario& s);

Scenario parse_body(Reader& root, bool nested) {
    Scenario s;
    std::vector<std::string> model_names;
    for (const auto& [m, n] : kModelNames) model_names.emplace_back(n);
    const std::string model_name = root.text("model", model_names);
    s.model = parse_model(model_name).value_or(Model::lorenz);
    const bool model_ok = parse_model(model_name).has_value();

    s.time = parse_time(root, needs_time(s.model));
    s.space = parse_space(root, needs_space(s.model));

    Reader p = root.child("parameters", true);
    switch (s.model) {
    case Model::lorenz: s.parameters = parse_lorenz(p); break;
    case Model::eco_simple: s.parameters = parse_eco_simple(p); break;
    case Model::eco_generalized: s.parameters = parse_eco_generalized(p); break;
    case Model::transport: {
        auto t = parse_transport(p);
        check_field_fits(p, "initial", t.initial, s.space);
        check_field_fits(p, "source", t.source, s.space);
        check_field_fits(p, "removal", t.removal, s.space);
        s.parameters = std::move(t);
        break;
    }
    case Model::abatement: s.parameters = parse_abatement(p); break;
    case Model::eroei: s.parameters = parse_eroei(p); break;
    case Model::crime_ode: s.parameters = parse_crime_ode(p); break;
    case Model::crime_control: {
        auto c = parse_crime_control(p);
        check_field_fits(p, "initial", c.initial, s.space);
        if (s.space && c.initial_control * s.space->length() > c.P_max) {
            p.issue("initial_control", "uniform deployment over the domain exceeds P_max");
        }
        s.parameters = std::move(c);
        break;
    }
    case Model::sweep: s.parameters = parse_sweep(p); break;
    case Model::indicators: {
        if (nested) {
            root.issue("model", "indicator sources must produce a trajectory");
            s.parameters = IndicatorsSpec{};
            break;
        }
        IndicatorsSpec ind;
        Reader src = p.child("source", true);
        if (src.valid()) {
            Scenario inner = parse_body(src, true);
            if (!produces_trajectory(inner.model)) {
                src.issue("model", "must be a trajectory model (lorenz, eco-simple, eco-generalized, eroei, crime-ode)");
            } else {
                const auto cols = trajectory_columns(inner);
                ind.component = p.text("component", cols);
            }
            ind.source.push_back(std::move(inner));
        }
        if (ind.component.empty()) ind.component = p.text("component");
        ind.window = p.count("window", 3);
        s.parameters = std::move(ind);
        break;
    }
    }
    if (model_ok) p.finish();

    // The explicit schemes need a stable step; report it against time.step.
    if (model_ok && s.time && s.space && (s.model == Model::transport || s.model == Model::crime_control)) {
        try {
            if (s.model == Model::transport) {
                const auto report =
                    pollution::cfl_check(std::get<TransportSpec>(s.parameters).build(*s.space), s.time->step);
                if (!report.ok) {
                    root.issue("time.step", "exceeds the stable step " + fmt(report.max_dt) + " (" + report.binding +
                                                " limit)");
                }
            } else {
                std::get<CrimeControlSpec>(s.parameters).build(*s.time, *s.space).validate();
            }
        } catch (const CflViolation& e) {
            root.issue("time.step", e.what());
        } catch (const Error&) {
            // Other problems are already reported field by field.
        }
    }

    // Units: presence only.
    {
        const auto keys = model_ok ? unit_keys(s) : std::vector<std::string>{};
        Reader u = root.child("units", !keys.empty());
        if (u.valid() && model_ok) {
            for (const auto& key : keys) {
                const json* j = u.raw(key);
                if (!j) {
                    u.issue(key, "missing unit annotation");
                } else if (!j->is_string() || j->get<std::string>().empty()) {
                    u.issue(key, "must be a non-empty string");
                } else {
                    s.units[key] = j->get<std::string>();
                }
            }
            u.finish();
        }
    }
    return s;
}

} // namespace

std::string_view to_string(Model m) {
    for (const auto& [model, name] : kModelNames) {
        if (model == m) return name;
    }
    return "unknown";
}

std::optional<Model> parse_model(std::string_view name) {
    for (const auto& [model, n] : kModelNames) {
        if (n == name) return model;
    }
    return std::nullopt;
}

bool is_stochastic_model(Model m) { return m == Model::eco_generalized; }

namespace {

bool is_stochastic(const Scenario& s) {
    if (s.model == Model::indicators) {
        const auto& ind = std::get<IndicatorsSpec>(s.parameters);
        return !ind.source.empty() && is_stochastic_model(ind.source.front().model);
    }
    return is_stochastic_model(s.model);
}

std::string join_issues(const std::vector<Issue>& issues) {
    std::ostringstream out;
    out << "invalid scenario (" << issues.size() << (issues.size() == 1 ? " problem" : " problems") << ")";
    for (const auto& i : issues) out << "\n  " << (i.path.empty() ? "<document>" : i.path) << ": " << i.message;
    return out.str();
}

std::vector<std::string> trajectory_columns(const Scenario& s) {
    switch (s.model) {
    case Model::lorenz: return {"t", "x", "y", "z"};
    case Model::eco_simple: return {"t", "N1", "N2", "V"};
    case Model::eco_generalized: {
        std::vector<std::string> c{"t", "x", "y"};
        const auto& g = std::get<EcoGeneralizedSpec>(s.parameters);
        for (std::size_t i = 0; i < g.resources.size(); ++i) c.push_back("R" + std::to_string(i + 1));
        return c;
    }
    case Model::eroei: return {"t", "R", "E_o", "E_i", "eroei"};
    case Model::crime_ode: return {"t", "x"};
    default: return {};
    }
}

} // namespace

ScenarioError::ScenarioError(std::vector<Issue> issues)
    : ValidationError(join_issues(issues)), issues_(std::move(issues)) {}

bool IndicatorsSpec::operator==(const IndicatorsSpec& other) const {
    return source == other.source && component == other.component && window == other.window;
}

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports a byte offset; convert it to line and column.
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioError({{"", "syntax error at line " + std::to_string(line) + ", column " +
                                      std::to_string(col) + ": " + e.what()}});
    }
    return parse_scenario(doc);
}

Scenario parse_scenario(const json& document) {
    std::vector<Issue> issues;
    Reader root(&document, "", issues);
    if (!root.valid()) throw ScenarioError(issues);

    const json* version = root.raw("schema_version");
    if (!version) {
        root.issue("schema_version", "is required");
    } else if (!version->is_number_integer() || version->get<long long>() != kSchemaVersion) {
        root.issue("schema_version", "must be " + std::to_string(kSchemaVersion));
    }

    Scenario s = parse_body(root, false);
    s.schema_version = kSchemaVersion;
    s.name = root.text("name", {}, std::string(to_string(s.model)));
    if (s.name.empty()) root.issue("name", "must not be empty");

    if (const json* seed = root.raw("seed")) {
        if (!seed->is_number_integer() || (!seed->is_number_unsigned() && seed->get<long long>() < 0)) {
            root.issue("seed", "must be a non-negative integer");
        } else {
            s.seed = seed->get<std::uint64_t>();
        }
    }
    const bool model_ok = document.contains("model") && document["model"].is_string() &&
                          parse_model(document["model"].get<std::string>()).has_value();
    if (model_ok) {
        if (is_stochastic(s) && !s.seed) root.issue("seed", "is required for stochastic models");
        if (!is_stochastic(s) && s.seed) root.issue("seed", "is only allowed for stochastic models");
    }

    {
        Reader o = root.child("outputs", false);
        const auto valid = series_for(s);
        if (const json* series = o.raw("series")) {
            if (!series->is_array() || series->empty()) {
                o.issue("series", "must be a non-empty array of names");
            } else {
                for (std::size_t i = 0; i < series->size(); ++i) {
                    const std::string at = o.path_of("series") + "[" + std::to_string(i) + "]";
                    if (!(*series)[i].is_string()) {
                        issues.push_back({at, "must be a string"});
                        continue;
                    }
                    const auto name = (*series)[i].get<std::string>();
                    if (model_ok && std::find(valid.begin(), valid.end(), name) == valid.end()) {
                        issues.push_back({at, "'" + name + "' is not produced by " + std::string(to_string(s.model)) +
                                                  " (did you mean '" + nearest(name, valid) + "'?)"});
                    }
                    if (std::find(s.outputs.series.begin(), s.outputs.series.end(), name) == s.outputs.series.end()) {
                        s.outputs.series.push_back(name);
                    }
                }
            }
        } else if (model_ok) {
            s.outputs.series = default_series(s);
        }
        s.outputs.snapshot_every = o.count("snapshot_every", 1, 1);
        o.finish();
        if (model_ok && s.model == Model::lorenz) {
            const auto& l = std::get<LorenzSpec>(s.parameters);
            const auto& ser = s.outputs.series;
            if (!l.perturbation && std::find(ser.begin(), ser.end(), "divergence") != ser.end()) {
                issues.push_back({"outputs.series", "'divergence' needs parameters.perturbation"});
            }
        }
    }
    root.finish();
    if (!issues.empty()) throw ScenarioError(std::move(issues));
    return s;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json field_json(const FieldSpec& f) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantField>) return {{"type", "constant"}, {"value", v.value}};
            if constexpr (std::is_same_v<T, GaussianField>) {
                return {{"type", "gaussian"}, {"center", v.center}, {"width", v.width}, {"amplitude", v.amplitude}};
            }
            if constexpr (std::is_same_v<T, DeltaField>) {
                return {{"type", "delta"}, {"position", v.position}, {"weight", v.weight}};
            }
            if constexpr (std::is_same_v<T, ValuesField>) return {{"type", "values"}, {"values", v.values}};
        },
        f);
}

json input_json(const InputSeries& s) {
    if (s.times.empty()) return s.values.front();
    return {{"times", s.times}, {"values", s.values}};
}

json params_json(const LorenzSpec& l) {
    json j{{"sigma", l.params.sigma}, {"rho", l.params.rho}, {"beta", l.params.beta}, {"initial", l.initial}};
    if (l.perturbation) j["perturbation"] = *l.perturbation;
    if (l.lyapunov) {
        json ly{{"step", l.lyapunov->step},
                {"renormalization_interval", l.lyapunov->renormalization_interval},
                {"total_time", l.lyapunov->total_time}};
        if (l.lyapunov->transient) ly["transient"] = *l.lyapunov->transient;
        j["lyapunov"] = ly;
    }
    return j;
}

json params_json(const EcoSimpleSpec& e) {
    return {{"r", e.params.r}, {"c", e.params.c}, {"b", e.params.b}, {"m", e.params.m}, {"initial", e.initial}};
}

json params_json(const EcoGeneralizedSpec& e) {
    json pred{{"type", e.predation.type}, {"a", e.predation.a}};
    if (e.predation.type == "holling2") pred["handling"] = e.predation.handling;
    json res = json::array();
    for (const auto& r : e.resources) {
        res.push_back({{"K", r.K}, {"S", r.S}, {"depletion", r.depletion}, {"e", r.e}, {"initial", r.initial}});
    }
    return {{"r_x", e.r_x}, {"delta", e.delta}, {"m", e.m}, {"predation", pred}, {"resources", res},
            {"noise_x", e.noise_x}, {"noise_y", e.noise_y}, {"initial", e.initial}};
}

json params_json(const TransportSpec& t) {
    json reaction{{"type", t.reaction}};
    if (t.reaction == "linear-decay") reaction["k"] = t.decay_rate;
    return {{"velocity", t.velocity}, {"diffusivity", t.diffusivity}, {"source", field_json(t.source)},
            {"removal", field_json(t.removal)}, {"reaction", reaction}, {"initial", field_json(t.initial)}};
}

json params_json(const AbatementSpec& a) {
    json src = json::array();
    for (const auto& s : a.sources) src.push_back({{"E", s.E}, {"c", s.c}, {"x_max", s.x_max}});
    return {{"sources", src}, {"E_limit", a.E_limit}};
}

json params_json(const EroeiSpec& e) {
    return {{"eta", e.params.eta},   {"kappa", e.params.kappa}, {"n", e.params.n}, {"beta", e.params.beta},
            {"E_i0", e.params.E_i0}, {"R_max", e.params.R_max}, {"R0", e.R0}};
}

json params_json(const CrimeOdeSpec& c) {
    return {{"a", c.params.a},       {"b", c.params.b},       {"c", c.params.c},
            {"d", c.params.d},       {"x0", c.x0},            {"u1", input_json(c.u1)},
            {"u2", input_json(c.u2)}, {"trust", input_json(c.trust)}};
}

json params_json(const CrimeControlSpec& c) {
    return {{"D", c.D},
            {"r", c.r},
            {"K", c.K},
            {"alpha", c.alpha},
            {"P_max", c.P_max},
            {"initial", field_json(c.initial)},
            {"initial_control", c.initial_control},
            {"iterations", c.iterations},
            {"initial_step", c.initial_step}};
}

json params_json(const SweepSpec& s) {
    json j{{"family", std::string(to_string(s.family))},
           {"base", std::visit([](const auto& b) { return params_json(b); }, s.base)},
           {"parameter", s.parameter},
           {"from", s.from},
           {"to", s.to},
           {"samples", s.samples},
           {"attractor_horizon", s.attractor_horizon},
           {"parallel", s.parallel}};
    if (!s.seeds.empty()) j["seeds"] = s.seeds;
    return j;
}

json body_json(const Scenario& s);

json params_json(const IndicatorsSpec& i) {
    json j{{"component", i.component}, {"window", i.window}};
    if (!i.source.empty()) j["source"] = body_json(i.source.front());
    return j;
}

json body_json(const Scenario& s) {
    json j;
    j["model"] = std::string(to_string(s.model));
    j["parameters"] = std::visit([](const auto& p) { return params_json(p); }, s.parameters);
    if (s.time) j["time"] = {{"t0", s.time->t0}, {"t1", s.time->t1}, {"step", s.time->step}};
    if (s.space) {
        j["space"] = {{"x0", s.space->x0},
                      {"x1", s.space->x1},
                      {"cells", s.space->cells},
                      {"boundary", std::string(to_string(s.space->boundary))}};
    }
    j["units"] = s.units;
    return j;
}

} // namespace

json to_json(const Scenario& s) {
    json j = body_json(s);
    j["schema_version"] = s.schema_version;
    j["name"] = s.name;
    if (s.seed) j["seed"] = *s.seed;
    j["outputs"] = {{"series", s.outputs.series}, {"snapshot_every", s.outputs.snapshot_every}};
    return j;
}

std::string serialize(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

std::string digest(const Scenario& s) { return io::sha256_hex(to_json(s).dump()); }

void apply_override(json& document, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ScenarioError({{std::string(assignment), "override must look like path=value"}});
    }
    const std::string path(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }

    json* node = &document;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) throw ScenarioError({{path, "override path has an empty segment"}});
        json* next = nullptr;
        if (node->is_array()) {
            std::size_t idx = 0;
            const auto res = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
            if (res.ec != std::errc() || res.ptr != seg.data() + seg.size() || idx >= node->size()) {
                throw ScenarioError({{path, "'" + seg + "' is not a valid index"}});
            }
            next = &(*node)[idx];
        } else if (node->is_object()) {
            next = &(*node)[seg];
        } else {
            throw ScenarioError({{path, "cannot descend into a non-object value at '" + seg + "'"}});
        }
        if (dot == std::string::npos) {
            *next = value;
            return;
        }
        if (next->is_null()) *next = json::object();
        node = next;
        start = dot + 1;
    }
}

std::vector<std::string> available_series(const Scenario& s) { return series_for(s); }

Scenario make_sweep(const json& base_document, std::string_view parameter, double from, double to,
                    std::size_t samples) {
    const Scenario base = parse_scenario(base_document);
    std::string name(parameter);
    if (name.rfind("parameters.", 0) == 0) name = name.substr(std::string("parameters.").size());
    const auto& allowed = sweepable(base.model);
    if (allowed.empty()) {
        throw ScenarioError({{"model", "sweeps support lorenz, eco-simple and crime-ode scenarios, not " +
                                           std::string(to_string(base.model))}});
    }
    const json& params = base_document.at("parameters");
    if (!params.contains(name)) {
        throw ScenarioError({{"parameters." + name, "no such parameter (did you mean '" + nearest(name, allowed) + "'?)"}});
    }
    if (!params.at(name).is_number() || std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw ScenarioError({{"parameters." + name, "is not a sweepable numeric parameter"}});
    }

    json doc{{"schema_version", kSchemaVersion},
             {"name", base.name + "-sweep-" + name},
             {"model", "sweep"},
             {"parameters",
              {{"family", std::string(to_string(base.model))},
               {"base", params},
               {"parameter", name},
               {"from", from},
               {"to", to},
               {"samples", samples}}}};
    json units = json::object();
    for (const auto& [k, v] : base.units) {
        if (k != "time" && k != "length") units[k] = v;
    }
    doc["units"] = units;
    return parse_scenario(doc);
}

} // namespace sustain::scenario
