#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: simulate | equilibrium | sweep | design.
 *
 * Exit codes: 0 ok, 2 configuration error, 3 numeric failure. Output files
 * are assembled in memory and written only once the command has succeeded.
 */

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "design.hpp"
#include "dmap.hpp"
#include "dynamics.hpp"
#include "equilibria.hpp"
#include "errors.hpp"
#include "io.hpp"

namespace latchem::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericFailure = 3 };

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Initial state with every component uniform in [0, s_in].
inline State random_initial_state(std::mt19937_64& rng, double s_in) {
    State y;
    y.s1 = s_in * unit_uniform(rng);
    y.x1 = s_in * unit_uniform(rng);
    y.s2 = s_in * unit_uniform(rng);
    y.x2 = s_in * unit_uniform(rng);
    return y;
}

/// n points from lo to hi; geometric when lo > 0, arithmetic otherwise.
inline std::vector<double> spaced_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        g[i] = lo > 0.0 ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    if (n > 1) g.back() = hi;
    return g;
}

/// Command-line overrides applied to the JSON document before validation.
struct Overrides {
    std::optional<double> V1, V2, Q, s_in, d;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::optional<double> horizon;
    bool random_initial = false;
    bool stop_at_steady = false;
    std::optional<std::size_t> points;
    std::optional<double> d_min, d_max;
    std::optional<double> fixed_d;
    bool free_d = false;
    std::optional<double> s_ref;
    bool curve = false;
    std::optional<std::size_t> curve_points;
};

inline void apply_overrides(json& doc, const Overrides& o) {
    if (!doc.is_object()) return;
    auto set = [&](const char* section, const char* key, const auto& v) {
        if (v) doc[section][key] = *v;
    };
    set("chemostat", "V1", o.V1);
    set("chemostat", "V2", o.V2);
    set("chemostat", "Q", o.Q);
    set("chemostat", "s_in", o.s_in);
    set("chemostat", "d", o.d);
    set("output", "dir", o.out);
    if (o.seed) doc["seed"] = *o.seed;
    if (o.jobs) doc["jobs"] = *o.jobs;
    set("simulate", "horizon", o.horizon);
    if (o.random_initial) {
        doc["simulate"]["random_initial"] = true;
        doc["simulate"].erase("initial");
    }
    if (o.stop_at_steady) doc["simulate"]["stop_at_steady_state"] = true;
    set("sweep", "points", o.points);
    set("sweep", "d_min", o.d_min);
    set("sweep", "d_max", o.d_max);
    set("design", "s_ref", o.s_ref);
    set("design", "d", o.fixed_d);
    if (o.free_d && doc.contains("design")) doc["design"].erase("d");
    if (o.curve_points) doc["design"]["curve"]["points"] = *o.curve_points;
}

using Files = std::map<std::string, std::string>;

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json config_echo(const ChemostatConfig& c) {
    json g;
    if (const auto* m = c.growth.as_monod()) {
        g = {{"kind", "monod"}, {"mu_max", m->mu_max}, {"K", m->K}};
    } else {
        const auto* t = c.growth.as_tabulated();
        g = {{"kind", "tabulated"}, {"s", t->s()}, {"mu", t->mu()}};
    }
    return {{"V1", c.V1}, {"V2", c.V2}, {"Q", c.Q}, {"s_in", c.s_in}, {"d", c.d}, {"growth", g}};
}

inline void require_d(const config::RunConfig& rc, const char* cmd) {
    if (!rc.has_d) throw ValidationError(std::string(cmd) + ": /chemostat/d is required");
}

/// Distance used to match a state to an equilibrium; tank 2 is ignored when disconnected.
inline double equilibrium_distance(const ChemostatConfig& c, const State& y, const State& e) {
    const double d1 = std::max(std::abs(y.s1 - e.s1), std::abs(y.x1 - e.x1));
    if (topology(c) == Topology::SingleChemostat && c.V2 > 0.0) return d1;
    return std::max({d1, std::abs(y.s2 - e.s2), std::abs(y.x2 - e.x2)});
}

inline Files cmd_simulate(const config::RunConfig& rc) {
    require_d(rc, "simulate");
    const auto& c = rc.chemostat;
    const auto& s = rc.simulate;
    std::mt19937_64 rng(rc.seed);
    State y0 = s.initial.value_or(State{c.s_in, 0.1 * c.s_in, c.s_in, 0.1 * c.s_in});
    if (s.random_initial) y0 = random_initial_state(rng, c.s_in);
    const double horizon = s.horizon.value_or(1000.0 * c.total_volume() / c.Q);

    SimulationOptions opts;
    opts.rtol = s.rtol;
    opts.atol = s.atol;
    opts.stop_at_steady_state = s.stop_at_steady_state;
    opts.record_every = static_cast<int>(s.record_every);
    const auto res = simulate(c, y0, horizon, opts);
    const auto rep = analyze_equilibria(c);

    const State& yT = res.trajectory.states.back();
    json detected = nullptr;
    double best = std::numeric_limits<double>::infinity();
    std::vector<const Equilibrium*> candidates{&rep.washout};
    if (rep.positive) candidates.push_back(&*rep.positive);
    for (const auto* e : candidates) {
        const double dist = equilibrium_distance(c, yT, e->state);
        if (dist < best) {
            best = dist;
            if (dist <= 1e-4) detected = {{"kind", to_string(e->kind)}, {"distance", dist}};
        }
    }

    json summary = {{"config", config_echo(c)},
                    {"topology", to_string(topology(c))},
                    {"seed", rc.seed},
                    {"initial_state", io::to_json(y0)},
                    {"horizon", horizon},
                    {"t_final", res.trajectory.times.back()},
                    {"terminal_state", io::to_json(yT)},
                    {"reached_steady_state", res.reached_steady_state},
                    {"accepted_steps", res.accepted_steps},
                    {"rejected_steps", res.rejected_steps},
                    {"washout_condition_holds", rep.washout_unique},
                    {"expected_attractor", to_string(rep.attractor().kind)},
                    {"detected_equilibrium", detected}};
    std::ostringstream csv;
    io::write_trajectory_csv(csv, res.trajectory);
    return {{"trajectory.csv", csv.str()}, {"simulate_summary.json", dump(summary)}};
}

inline Files cmd_equilibrium(const config::RunConfig& rc) {
    require_d(rc, "equilibrium");
    const auto rep = analyze_equilibria(rc.chemostat);
    json j = io::to_json(rc.chemostat, rep);
    j["config"] = config_echo(rc.chemostat);
    return {{"equilibrium.json", dump(j)}};
}

inline Files cmd_sweep(const config::RunConfig& rc) {
    const auto& c = rc.chemostat;
    if (!(c.V1 > 0.0) || !(c.V2 > 0.0)) throw ValidationError("sweep: requires V1 > 0 and V2 > 0");
    const auto& s = rc.sweep;
    const auto grid = s.d_min ? spaced_grid(*s.d_min, *s.d_max, s.points)
                              : default_d_grid(c, s.points, s.stop_fraction);
    const auto prof = sweep(c, grid, SweepOptions{rc.jobs});
    json side = io::to_json(prof);
    side["config"] = config_echo(c);
    std::ostringstream csv;
    io::write_sweep_csv(csv, prof);
    return {{"sweep.csv", csv.str()}, {"sweep.json", dump(side)}};
}

inline Files cmd_design(const config::RunConfig& rc, bool curve) {
    const auto& c = rc.chemostat;
    if (!rc.design.s_ref) throw ValidationError("design: /design/s_ref is required (or --sref)");
    DesignSpec spec{c.Q, c.s_in, *rc.design.s_ref, c.growth, rc.design.d};
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    const auto r = spec.d ? design_fixed_d(spec) : design_free_d(spec);
    json j = io::to_json(r);
    j["mode"] = spec.d ? "fixed_d" : "free_d";
    j["s_ref"] = spec.s_ref;
    j["s_hat"] = s_hat(spec.growth, spec.s_in);
    j["optimal_d"] = io::optional_number(optimal_diffusion(spec));
    Files files{{"design.json", dump(j)}};
    if (curve) {
        const auto& cv = rc.design.curve;
        const double lo = cv.d_min.value_or(1e-2 * c.Q);
        const double hi = cv.d_max.value_or(1e2 * c.Q);
        if (!(lo < hi)) throw ValidationError("design: curve range is empty");
        std::ostringstream csv;
        io::write_volume_curve_csv(csv, volume_curve(spec, spaced_grid(lo, hi, cv.points), rc.jobs));
        files["volume_curve.csv"] = csv.str();
    }
    return files;
}

inline void write_files(const std::string& dir, const Files& files) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
        const auto path = std::filesystem::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    }
}

/// Parses `args` (without the program name), runs the command and writes its files.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-tank chemostat with a diffusively coupled lateral tank"};
    app.require_subcommand(1);
    std::string config_path;
    Overrides o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--jobs", o.jobs, "worker threads for sweeps and curves");
        sub->add_option("--seed", o.seed, "seed for random initial conditions");
        sub->add_option("--V1", o.V1);
        sub->add_option("--V2", o.V2);
        sub->add_option("--Q", o.Q);
        sub->add_option("--s-in", o.s_in);
        sub->add_option("--d", o.d);
    };
    auto* sim = app.add_subcommand("simulate", "integrate the model; writes trajectory.csv, simulate_summary.json");
    add_common(sim);
    sim->add_option("--horizon", o.horizon);
    sim->add_flag("--random-initial", o.random_initial);
    sim->add_flag("--stop-at-steady", o.stop_at_steady);

    auto* eq = app.add_subcommand("equilibrium", "steady states and stability; writes equilibrium.json");
    add_common(eq);

    auto* sw = app.add_subcommand("sweep", "d-response map; writes sweep.csv, sweep.json");
    add_common(sw);
    sw->add_option("--points", o.points);
    sw->add_option("--d-min", o.d_min);
    sw->add_option("--d-max", o.d_max);

    auto* de = app.add_subcommand("design", "minimal-volume design; writes design.json [, volume_curve.csv]");
    add_common(de);
    auto* fixed = de->add_option("--fixed-d", o.fixed_d);
    auto* freed = de->add_flag("--free-d", o.free_d);
    fixed->excludes(freed);
    de->add_option("--sref", o.s_ref);
    de->add_flag("--curve", o.curve);
    de->add_option("--curve-points", o.curve_points);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    config::RunConfig rc;
    try {
        auto doc = config::read_json_file(config_path);
        apply_overrides(doc, o);
        rc = config::parse_run_config(doc);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    Files files;
    try {
        if (sim->parsed()) files = cmd_simulate(rc);
        else if (eq->parsed()) files = cmd_equilibrium(rc);
        else if (sw->parsed()) files = cmd_sweep(rc);
        else files = cmd_design(rc, o.curve);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericFailure;
    }

    try {
        write_files(rc.output_dir, files);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericFailure;
    }
    for (const auto& [name, content] : files) out << (std::filesystem::path(rc.output_dir) / name).string() << "\n";
    return kOk;
}

}  // namespace latchem::cli
