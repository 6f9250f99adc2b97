#include "sustain/cli.hpp"

#include "sustain/scenario.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sustain::cli {

namespace {

namespace fs = std::filesystem;
using scenario::json;

struct Globals {
    std::string out;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

json load_document(const std::string& path, const Globals& g) {
    if (!fs::exists(path)) throw ValidationError("scenario file not found: " + path);
    const std::string text = io::read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error&) {
        scenario::parse_scenario(std::string_view(text));  // throws with line and column
        throw;
    }
    for (const auto& s : g.sets) scenario::apply_override(doc, s);
    if (g.seed && doc.is_object()) doc["seed"] = *g.seed;
    return doc;
}

fs::path output_dir(const Globals& g, const scenario::Scenario& s) {
    return g.out.empty() ? fs::path("sustain-out") / s.name : fs::path(g.out);
}

int execute(const scenario::Scenario& s, const Globals& g, std::ostream& out) {
    const fs::path dir = output_dir(g, s);
    const auto rec = scenario::run_scenario(s, dir);
    if (!g.quiet) {
        out << s.name << ": wrote " << rec.outputs.size() << " table(s) to " << dir.string() << "\n";
        for (const auto& o : rec.outputs) out << "  " << o.file << " (" << o.rows << " rows)\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& path, const Globals& g, std::ostream& out) {
    return execute(scenario::parse_scenario(load_document(path, g)), g, out);
}

struct SweepRange {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

SweepRange parse_range(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 4 || parts[0].empty()) {
        throw ValidationError("sweep range must look like name:lo:hi:count (got '" + spec + "')");
    }
    auto num = [&spec](const std::string& s, auto& v) {
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw ValidationError("cannot read '" + s + "' in sweep range '" + spec + "'");
        }
    };
    SweepRange r;
    r.name = parts[0];
    num(parts[1], r.lo);
    num(parts[2], r.hi);
    long long count = 0;
    num(parts[3], count);
    if (count < 2) throw ValidationError("sweep count must be at least 2 (got " + parts[3] + ")");
    r.count = static_cast<std::size_t>(count);
    return r;
}

int cmd_sweep(const std::string& path, const std::string& range, const Globals& g, std::ostream& out) {
    const SweepRange r = parse_range(range);
    const json doc = load_document(path, g);
    return execute(scenario::make_sweep(doc, r.name, r.lo, r.hi, r.count), g, out);
}

int cmd_optimize(const std::string& path, const Globals& g, std::ostream& out) {
    const auto s = scenario::parse_scenario(load_document(path, g));
    if (s.model != scenario::Model::abatement && s.model != scenario::Model::crime_control) {
        throw ValidationError("optimize needs an abatement or crime-control scenario, not " +
                              std::string(scenario::to_string(s.model)));
    }
    return execute(s, g, out);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
        p.erase(0, p.find_first_not_of(" \t"));
        p.erase(p.find_last_not_of(" \t") + 1);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

int cmd_plotdata(const std::string& run_dir, const std::string& selection, const std::string& table_name,
                 const Globals& g, std::ostream& out) {
    const fs::path dir(run_dir);
    const fs::path record_path = dir / std::string(scenario::kRunRecordFile);
    if (!fs::exists(record_path)) throw ValidationError("no run record in " + dir.string());
    const auto rec = scenario::run_record_from_json(json::parse(io::read_file(record_path)));
    if (rec.status != "ok") throw ValidationError("run in " + dir.string() + " failed: " + rec.error);

    const auto series = split_list(selection);
    std::vector<std::string> available;
    for (const auto& o : rec.outputs) {
        for (const auto& c : o.columns) {
            if (std::find(available.begin(), available.end(), c) == available.end()) available.push_back(c);
        }
    }
    auto listing = [&] {
        std::string s;
        for (const auto& o : rec.outputs) {
            s += "\n  " + o.file + ":";
            for (const auto& c : o.columns) s += " " + c;
        }
        return s;
    };
    if (series.empty()) throw ValidationError("no series selected; available:" + listing());

    const scenario::OutputFile* chosen = nullptr;
    for (const auto& o : rec.outputs) {
        if (!table_name.empty() && o.file != table_name && o.file != table_name + ".csv") continue;
        const bool all = std::all_of(series.begin(), series.end(), [&o](const std::string& s) {
            return std::find(o.columns.begin(), o.columns.end(), s) != o.columns.end();
        });
        if (all) {
            chosen = &o;
            break;
        }
    }
    if (!chosen) {
        throw ValidationError("no output table has all of the series '" + selection + "'; available:" + listing());
    }

    const auto table = io::parse_csv(io::read_file(dir / chosen->file));
    std::vector<std::size_t> cols;
    for (const auto& s : series) cols.push_back(table.column_index(s));

    std::string stem = fs::path(chosen->file).stem().string();
    for (const auto& s : series) stem += "_" + s;
    const fs::path target = g.out.empty() ? dir : fs::path(g.out);
    fs::create_directories(target);

    std::ostringstream data;
    data << "#";
    for (const auto& s : series) data << " " << s;
    data << "\n";
    std::size_t blocks = 1;
    const bool blocked = chosen->kind == "snapshots";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (blocked && (r == 0 || row[0] != table.rows[r - 1][0])) {
            if (r != 0) {
                data << "\n\n";
                ++blocks;
            }
            data << "# " << table.columns[0] << " = " << io::format_number(row[0]) << "\n";
        }
        for (std::size_t i = 0; i < cols.size(); ++i) data << (i ? " " : "") << io::format_number(row[cols[i]]);
        data << "\n";
    }
    const std::string dat = stem + ".dat";
    io::write_file(target / dat, data.str());

    std::ostringstream gp;
    gp << "# gnuplot script for " << dat << "\n";
    std::string using_spec;
    std::string cmd = "plot";
    if (series.size() == 1) {
        gp << "set xlabel \"row\"\nset ylabel " << quoted(series[0]) << "\n";
        using_spec = "0:1";
    } else if (series.size() == 3 && !blocked) {
        gp << "set xlabel " << quoted(series[0]) << "\nset ylabel " << quoted(series[1]) << "\nset zlabel "
           << quoted(series[2]) << "\n";
        cmd = "splot";
        using_spec = "1:2:3";
    } else {
        gp << "set xlabel " << quoted(series[0]) << "\nset ylabel " << quoted(series[1]) << "\n";
        using_spec = "1:2";
    }
    if (blocked) {
        gp << cmd << " for [i=0:" << blocks - 1 << "] " << quoted(dat) << " index i using " << using_spec
           << " with lines notitle\n";
    } else if (series.size() > 3) {
        gp << "plot for [c=2:" << series.size() << "] " << quoted(dat) << " using 1:c with lines title columnhead(c)\n";
    } else {
        gp << cmd << " " << quoted(dat) << " using " << using_spec << " with lines notitle\n";
    }
    io::write_file(target / (stem + ".gp"), gp.str());
    if (!g.quiet) out << "wrote " << (target / dat).string() << " and " << (target / (stem + ".gp")).string() << "\n";
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sustainability model toolkit: simulate, sweep, optimize and export plot data."};
    app.set_version_flag("--version", SUSTAIN_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--set", g.sets, "Override a scenario field, e.g. parameters.rho=0.5 (repeatable)")
        ->allow_extra_args(false);
    auto* seed_opt = app.add_option("--seed", seed, "Random seed for stochastic models");
    app.add_flag("--quiet", g.quiet, "Suppress progress messages");

    std::string scenario_path, range, run_dir, selection, table;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its tables");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter and flag transitions");
    sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    sweep_cmd->add_option("range", range, "name:lo:hi:count")->required();

    auto* opt_cmd = app.add_subcommand("optimize", "Solve an abatement or crime-control scenario");
    opt_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

    auto* plot_cmd = app.add_subcommand("plotdata", "Export gnuplot data and script from a run directory");
    plot_cmd->add_option("run_dir", run_dir, "Directory holding run.json")->required();
    plot_cmd->add_option("--series", selection, "Comma-separated column names");
    plot_cmd->add_option("--table", table, "Restrict to one output table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) g.seed = seed;

    try {
        if (*run_cmd) return cmd_run(scenario_path, g, out);
        if (*sweep_cmd) return cmd_sweep(scenario_path, range, g, out);
        if (*opt_cmd) return cmd_optimize(scenario_path, g, out);
        return cmd_plotdata(run_dir, selection, table, g, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace sustain::cli
