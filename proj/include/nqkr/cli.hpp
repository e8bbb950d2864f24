#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nqkr/error.hpp"
#include "nqkr/io.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/params.hpp"
#include "nqkr/spectrum.hpp"
#include "nqkr/sweep.hpp"
#include "nqkr/wavefunction.hpp"

namespace nqkr::cli {

enum class Command { evolve, echo, spectrum, fidelity, sweep_p2, sweep_ipr };
enum class OutputFormat { csv, json };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::evolve: return "evolve";
        case Command::echo: return "echo";
        case Command::spectrum: return "spectrum";
        case Command::fidelity: return "fidelity";
        case Command::sweep_p2: return "sweep-p2";
        case Command::sweep_ipr: return "sweep-ipr";
    }
    return "";
}

inline const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

struct GridConfig {
    double k_min = 0.0;
    double k_max = 10.0;
    int k_count = 41;
    double lambda_min = -0.01;
    double lambda_max = 0.01;
    int lambda_count = 41;
    int workers = 1;

    bool operator==(const GridConfig&) const = default;
};

struct RunConfig {
    Command command = Command::evolve;
    ModelParams params;  // defaults: hbar 0.25, dim 1024, epsilon 1e-3, sigma 10
    int steps = 1000;
    int packets = 50;
    std::optional<GridConfig> grid;  // present exactly for the sweep commands
    std::string output_path;         // empty: <command>.<format> in the working directory
    OutputFormat output_format = OutputFormat::csv;

    bool operator==(const RunConfig&) const = default;

    std::string resolved_output() const {
        if (!output_path.empty()) return output_path;
        return std::string(to_string(command)) + "." + to_string(output_format);
    }
};

/// --help was requested; carries the help text.
struct HelpRequested {
    std::string text;
};

namespace detail {

struct Parser {
    CLI::App app{"Non-Hermitian quantum kicked rotor simulator", "nqkr"};
    RunConfig cfg;
    GridConfig grid;
    std::string format = "csv";
    bool csv = false;
    bool json = false;
    std::vector<std::pair<CLI::App*, Command>> commands;

    Parser() {
        app.require_subcommand(1);
        app.fallthrough();
        app.set_config("--config", "", "TOML/INI file with option values");
        auto& p = cfg.params;
        app.add_option("--K", p.K, "real kick strength");
        app.add_option("--lambda", p.lambda, "imaginary kick strength");
        app.add_option("--hbar", p.hbar, "effective Planck constant");
        app.add_option("--dim", p.dim, "momentum basis size (even, >= 4)");
        app.add_option("--epsilon", p.epsilon, "echo perturbation of K");
        app.add_option("--sigma", p.sigma, "Gaussian packet width parameter");
        app.add_option("--output,-o", cfg.output_path, "output file");
        auto* fmt = app.add_option("--format", format, "csv or json")
                        ->check(CLI::IsMember({"csv", "json"}));
        auto* fcsv = app.add_flag("--csv", csv, "same as --format csv");
        auto* fjson = app.add_flag("--json", json, "same as --format json");
        fcsv->excludes(fjson);
        fmt->excludes(fcsv)->excludes(fjson);

        auto* evolve = app.add_subcommand("evolve", "<p^2>(t) from the ground state");
        evolve->add_option("--steps", cfg.steps, "number of kicks");
        auto* echo = app.add_subcommand("echo", "packet-averaged Loschmidt echo");
        echo->add_option("--steps", cfg.steps, "number of kicks");
        echo->add_option("--packets", cfg.packets, "number of Gaussian packets");
        auto* spectrum = app.add_subcommand("spectrum", "quasienergies and IPR of the Floquet matrix");
        auto* fidelity = app.add_subcommand("fidelity", "overlap of the evolved state with every quasieigenstate");
        fidelity->add_option("--steps", cfg.steps, "number of kicks");
        auto* sp2 = app.add_subcommand("sweep-p2", "time-averaged <p^2> over a (K, lambda) grid");
        auto* sipr = app.add_subcommand("sweep-ipr", "mean IPR of growing modes over a (K, lambda) grid");
        for (auto* s : {sp2, sipr}) {
            s->add_option("--steps", cfg.steps, "number of kicks (sweep-p2)");
            s->add_option("--k-min", grid.k_min);
            s->add_option("--k-max", grid.k_max);
            s->add_option("--k-count", grid.k_count);
            s->add_option("--lambda-min", grid.lambda_min);
            s->add_option("--lambda-max", grid.lambda_max);
            s->add_option("--lambda-count", grid.lambda_count);
            s->add_option("--workers", grid.workers, "worker threads");
        }
        commands = {{evolve, Command::evolve},     {echo, Command::echo},
                    {spectrum, Command::spectrum}, {fidelity, Command::fidelity},
                    {sp2, Command::sweep_p2},      {sipr, Command::sweep_ipr}};
    }

    RunConfig finish() {
        for (auto& [sub, cmd] : commands) {
            if (sub->parsed()) cfg.command = cmd;
        }
        cfg.output_format = (json || (!csv && format == "json")) ? OutputFormat::json : OutputFormat::csv;
        bool sweep = cfg.command == Command::sweep_p2 || cfg.command == Command::sweep_ipr;
        if (sweep) {
            cfg.grid = grid;
        } else {
            cfg.grid.reset();
        }
        validate(cfg.params);
        if (cfg.steps < 0) throw ConfigError("--steps must be non-negative");
        if (cfg.packets < 1) throw ConfigError("--packets must be at least 1");
        if (cfg.command == Command::sweep_p2 && cfg.steps < 1) {
            throw ConfigError("sweep-p2 needs --steps >= 1");
        }
        if (sweep) {
            if (grid.k_count < 1 || grid.lambda_count < 1) throw ConfigError("grid counts must be >= 1");
            if (grid.workers < 1) throw ConfigError("--workers must be >= 1");
            if ((grid.k_count > 1 && !(grid.k_max > grid.k_min)) ||
                (grid.lambda_count > 1 && !(grid.lambda_max > grid.lambda_min))) {
                throw ConfigError("grid ranges must be ascending");
            }
        }
        return cfg;
    }
};

inline std::string first_line(const std::string& s) {
    auto pos = s.find('\n');
    return pos == std::string::npos ? s : s.substr(0, pos);
}

}  // namespace detail

inline std::string usage() {
    detail::Parser parser;
    return parser.app.help();
}

/// Parse command-line arguments (without the program name). Flags override
/// config-file values, which override defaults. Throws ConfigError on bad
/// input and HelpRequested for --help.
inline RunConfig parse_config(std::vector<std::string> args) {
    if (args.empty()) throw ConfigError("no command given\n" + usage());
    detail::Parser parser;
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    try {
        parser.app.parse(args);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{parser.app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{parser.app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(detail::first_line(e.what()));
    }
    return parser.finish();
}

/// Arguments that parse_config maps back to `config`.
inline std::vector<std::string> render(const RunConfig& config) {
    using io::format_number;
    const auto& p = config.params;
    std::vector<std::string> a = {
        "--K",       format_number(p.K),       "--lambda",  format_number(p.lambda),
        "--hbar",    format_number(p.hbar),    "--dim",     std::to_string(p.dim),
        "--epsilon", format_number(p.epsilon), "--sigma",   format_number(p.sigma),
        "--format",  to_string(config.output_format)};
    if (!config.output_path.empty()) {
        a.push_back("--output");
        a.push_back(config.output_path);
    }
    a.push_back(to_string(config.command));
    if (config.command != Command::spectrum) {
        a.push_back("--steps");
        a.push_back(std::to_string(config.steps));
    }
    if (config.command == Command::echo) {
        a.push_back("--packets");
        a.push_back(std::to_string(config.packets));
    }
    if (config.grid) {
        const auto& g = *config.grid;
        for (auto [flag, value] : {std::pair{"--k-min", g.k_min}, {"--k-max", g.k_max},
                                   {"--lambda-min", g.lambda_min}, {"--lambda-max", g.lambda_max}}) {
            a.push_back(flag);
            a.push_back(format_number(value));
        }
        for (auto [flag, value] : {std::pair{"--k-count", g.k_count}, {"--lambda-count", g.lambda_count},
                                   {"--workers", g.workers}}) {
            a.push_back(flag);
            a.push_back(std::to_string(value));
        }
    }
    return a;
}

inline nlohmann::ordered_json meta_json(const RunConfig& c) {
    nlohmann::ordered_json m;
    m["version"] = io::version;
    m["command"] = to_string(c.command);
    m["params"] = io::params_json(c.params);
    m["steps"] = c.steps;
    if (c.command == Command::echo) m["packets"] = c.packets;
    if (c.grid) {
        const auto& g = *c.grid;
        m["grid"] = {{"k_min", g.k_min},           {"k_max", g.k_max},
                     {"k_count", g.k_count},       {"lambda_min", g.lambda_min},
                     {"lambda_max", g.lambda_max}, {"lambda_count", g.lambda_count}};
    }
    return m;
}

namespace detail {

// Writes `table` to `path` in the configured format.
inline void emit(const RunConfig& c, const std::string& path, const io::Table& table,
                 nlohmann::ordered_json meta) {
    auto os = io::open_output(path);
    if (c.output_format == OutputFormat::csv) {
        io::write_csv(os, meta, table);
    } else {
        io::write_json(os, meta, table);
    }
}

// <stem>.<suffix>.<ext> next to the main output.
inline std::string sibling_path(const RunConfig& c, const std::string& suffix) {
    std::filesystem::path main(c.resolved_output());
    std::filesystem::path sib = main;
    sib.replace_filename(main.stem().string() + "." + suffix + main.extension().string());
    return sib.string();
}

inline io::Table distribution_table(std::span<const double> prob, const ModelParams& p) {
    io::Table t{{"n", "p", "prob"}, {}};
    for (int i = 0; i < static_cast<int>(prob.size()); ++i) {
        t.rows.push_back({std::int64_t{p.n_at(i)}, p.momentum_at(i), prob[static_cast<std::size_t>(i)]});
    }
    return t;
}

inline std::string xi_text(std::span<const double> prob, const ModelParams& p) {
    try {
        return io::format_number(localization_length(fit_localization_length(prob, p)));
    } catch (const FitError&) {
        return "n/a";
    }
}

inline int run_evolve(const RunConfig& c, std::ostream& out) {
    EvolutionRecord rec = record_evolution(c.params, ground_state(c.params), c.steps);
    io::Table t{{"t", "p2", "log_norm"}, {}};
    for (std::size_t i = 0; i < rec.p2.size(); ++i) {
        t.rows.push_back({static_cast<std::int64_t>(rec.p2.times[i]), rec.p2.values[i], rec.log_norm.values[i]});
    }
    auto meta = meta_json(c);
    emit(c, c.resolved_output(), t, meta);
    auto prob = probabilities(rec.final_state);
    emit(c, sibling_path(c, "distribution"), distribution_table(prob, c.params), meta);

    out << "evolve: final <p^2> = "
        << io::format_number(rec.p2.size() ? rec.p2.values.back() : mean_p2(rec.final_state, c.params));
    if (rec.p2.size()) out << ", time-averaged <p^2> = " << io::format_number(time_averaged_p2(rec.p2, rec.p2.size()));
    out << ", xi = " << xi_text(prob, c.params)
        << ", max edge probability = " << io::format_number(rec.max_edge_probability) << '\n';
    return 0;
}

inline int run_echo(const RunConfig& c, std::ostream& out) {
    TimeSeries echo = averaged_echo(c.params, c.steps, c.packets);
    io::Table t{{"t", "L_mean"}, {}};
    for (std::size_t i = 0; i < echo.size(); ++i) {
        t.rows.push_back({static_cast<std::int64_t>(echo.times[i]), echo.values[i]});
    }
    emit(c, c.resolved_output(), t, meta_json(c));
    out << "echo: final L = " << io::format_number(echo.values.back());
    try {
        out << ", decay rate = " << io::format_number(decay_rate(fit_decay_rate(echo)));
    } catch (const FitError&) {
        out << ", decay rate = none (non-decaying)";
    }
    if (c.params.K > 2.0) out << ", ln(K/2) = " << io::format_number(lyapunov_reference(c.params.K));
    out << '\n';
    return 0;
}

inline int run_spectrum(const RunConfig& c, std::ostream& out) {
    QuasiSpectrum s = quasi_spectrum(c.params);
    io::Table t{{"index", "eps_r", "eps_i", "ipr"}, {}};
    double max_abs = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto& m = s.modes[k];
        t.rows.push_back({static_cast<std::int64_t>(k), m.eps_r, m.eps_i, m.ipr});
        max_abs = std::max(max_abs, std::abs(m.eps_i));
    }
    emit(c, c.resolved_output(), t, meta_json(c));
    out << "spectrum: top eps_i = " << io::format_number(s.modes.front().eps_i)
        << ", max |eps_i| = " << io::format_number(max_abs) << ", mean IPR = ";
    try {
        out << io::format_number(mean_ipr(s));
    } catch (const FitError&) {
        out << "n/a (no growing modes)";
    }
    out << '\n';
    return 0;
}

inline int run_fidelity(const RunConfig& c, std::ostream& out) {
    WaveFunction psi = ground_state(c.params);
    Propagator(c.params).evolve(psi, c.steps);
    QuasiSpectrum s = quasi_spectrum(c.params);
    auto profile = fidelity_profile(psi, s);
    io::Table t{{"index", "eps_i", "F"}, {}};
    for (const auto& e : profile) {
        t.rows.push_back({static_cast<std::int64_t>(e.index), e.eps_i, e.fidelity});
    }
    auto meta = meta_json(c);
    emit(c, c.resolved_output(), t, meta);
    std::size_t best = argmax_fidelity(profile);
    auto psi_prob = probabilities(psi);
    auto mode_prob = mode_probabilities(s.modes[best]);
    emit(c, sibling_path(c, "state_distribution"), distribution_table(psi_prob, c.params), meta);
    emit(c, sibling_path(c, "mode_distribution"), distribution_table(mode_prob, c.params), meta);
    // Modes are sorted by eps_i descending, so the index is the eps_i rank.
    out << "fidelity: argmax F at mode " << best << " (eps_i rank " << best + 1
        << "), eps_i = " << io::format_number(s.modes[best].eps_i)
        << ", F = " << io::format_number(profile[best].fidelity)
        << ", top eps_i = " << io::format_number(s.modes.front().eps_i)
        << ", xi(state) = " << xi_text(psi_prob, c.params)
        << ", xi(mode) = " << xi_text(mode_prob, c.params) << '\n';
    return 0;
}

inline int run_sweep(const RunConfig& c, std::ostream& out) {
    const GridConfig& g = *c.grid;
    SweepSpec spec;
    spec.k_values = linspace(g.k_min, g.k_max, g.k_count);
    spec.lambda_values = linspace(g.lambda_min, g.lambda_max, g.lambda_count);
    spec.common = c.params;
    spec.steps = c.steps;
    spec.workers = g.workers;
    SweepGrid grid = c.command == Command::sweep_p2 ? sweep_p2(spec) : sweep_ipr(spec);
    io::Table t{{"K", "lambda", "value", "status"}, {}};
    std::size_t ok = 0;
    for (std::size_t ik = 0; ik < grid.k_values.size(); ++ik) {
        for (std::size_t il = 0; il < grid.lambda_values.size(); ++il) {
            const auto& cell = grid.at(ik, il);
            t.rows.push_back({grid.k_values[ik], grid.lambda_values[il], cell.value,
                              std::string(to_string(cell.status))});
            if (cell.status == CellStatus::ok) ++ok;
        }
    }
    emit(c, c.resolved_output(), t, meta_json(c));
    out << to_string(c.command) << ": " << ok << " of " << grid.cells.size() << " cells ok\n";
    return 0;
}

}  // namespace detail

/// Execute a validated configuration; returns the process exit code.
inline int run(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        switch (config.command) {
            case Command::evolve: return detail::run_evolve(config, out);
            case Command::echo: return detail::run_echo(config, out);
            case Command::spectrum: return detail::run_spectrum(config, out);
            case Command::fidelity: return detail::run_fidelity(config, out);
            case Command::sweep_p2:
            case Command::sweep_ipr: return detail::run_sweep(config, out);
        }
    } catch (const Error& e) {
        err << "nqkr: " << e.what() << '\n';
        return static_cast<int>(e.code());
    }
    return static_cast<int>(ExitCode::config);
}

/// Full front end: parse argv, run, map every failure to an exit code.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        err << usage();
        return static_cast<int>(ExitCode::config);
    }
    RunConfig config;
    try {
        config = parse_config(args);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const ConfigError& e) {
        err << "nqkr: " << detail::first_line(e.what()) << '\n';
        return static_cast<int>(ExitCode::config);
    }
    return run(config, out, err);
}

}  // namespace nqkr::cli
