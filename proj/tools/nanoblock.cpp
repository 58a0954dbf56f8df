#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>

#include "nanoblock/nanoblock.hpp"

#ifndef NANOBLOCK_CONFIG_DIR
#define NANOBLOCK_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace nanoblock;

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel g_log_level = LogLevel::info;

LogLevel log_level_from_env() {
    const char* v = std::getenv("NANOBLOCK_LOG_LEVEL");
    if (!v) return LogLevel::info;
    const std::string s(v);
    if (s == "quiet" || s == "error" || s == "0") return LogLevel::quiet;
    if (s == "debug" || s == "2") return LogLevel::debug;
    return LogLevel::info;
}

void log(LogLevel level, const std::string& msg) {
    if (level <= g_log_level) std::cerr << "[nanoblock] " << msg << '\n';
}

unsigned workers_from(int flag) {
    if (flag > 0) return static_cast<unsigned>(flag);
    if (const char* v = std::getenv("NANOBLOCK_WORKERS")) {
        try {
            const int n = std::stoi(v);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("NANOBLOCK_WORKERS must be a positive integer, got '") + v + "'");
    }
    return default_workers();
}

struct Options {
    int cutoff = 0;
    std::string solver;
    std::string nth_convention;
    int workers = 0;
    std::string out_dir = ".";
    std::string config;
};

CliOverrides overrides_from(const Options& o) {
    CliOverrides c;
    if (o.cutoff > 0) c.cutoff = o.cutoff;
    if (!o.solver.empty()) c.solver = parse_solver_method(o.solver);
    if (!o.nth_convention.empty()) c.nth_convention = parse_nth_convention(o.nth_convention);
    return c;
}

fs::path log_path_for(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".log");
    return p;
}

/// Writes CSV and per-solve log; true if at least one point converged.
bool write_dataset(const SweepSpec& spec, const std::vector<SweepRow>& rows, const Options& o) {
    const fs::path csv = fs::path(o.out_dir) / spec.output_path;
    if (!csv.parent_path().empty()) fs::create_directories(csv.parent_path());
    const auto names = spec.axis_names();
    emit_csv(rows, names, csv.string(), sweep_header_comments(spec));

    const fs::path logp = log_path_for(csv);
    std::ofstream lg(logp, std::ios::trunc);
    if (!lg) throw IoError(logp.string(), "cannot open for writing");
    for (const auto& c : sweep_header_comments(spec)) lg << "# " << c << '\n';
    std::size_t failed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lg << diagnostics_line(i, names, rows[i]) << '\n';
        if (!rows[i].converged) ++failed;
    }
    if (!lg) throw IoError(logp.string(), "write failed");

    log(LogLevel::info, spec.label + ": wrote " + csv.string() + " (" + std::to_string(failed) +
                            " non-converged of " + std::to_string(rows.size()) + ")");
    if (all_failed(rows)) {
        log(LogLevel::quiet, spec.label + ": every grid point failed to converge");
        return false;
    }
    return true;
}

ProgressCallback progress_logger(const SweepSpec& spec) {
    auto done = std::make_shared<std::size_t>(0);
    return [done, names = spec.axis_names(), total = spec.size()](std::size_t i, const SweepRow& r) {
        ++*done;
        log(LogLevel::debug, "[" + std::to_string(*done) + "/" + std::to_string(total) + "] " +
                                 diagnostics_line(i, names, r));
    };
}

bool run_dataset(SweepSpec spec, const Options& o, unsigned workers) {
    overrides_from(o).apply(spec);
    spec.validate();
    if (auto w = spec.base.rwa_warning()) log(LogLevel::info, spec.label + ": " + *w);
    log(LogLevel::info, spec.label + ": " + std::to_string(spec.size()) + " points, n_max=" +
                            std::to_string(spec.cutoff.n_max()) + ", solver=" + to_string(spec.solver) +
                            ", workers=" + std::to_string(workers));
    return write_dataset(spec, run_sweep(spec, workers, progress_logger(spec)), o);
}

std::string preset_path(const Options& o) {
    return o.config.empty() ? std::string(NANOBLOCK_CONFIG_DIR) + "/presets.json" : o.config;
}

int cmd_sweep(const std::string& config, const Options& o) {
    const Json j = load_json(config);
    return run_dataset(parse_sweep_spec(j, "sweep"), o, workers_from(o.workers)) ? 0 : 1;
}

int cmd_figure(const std::string& which, const Options& o) {
    const FigurePresets presets = figure_presets(load_json(preset_path(o)));
    const unsigned workers = workers_from(o.workers);
    if (which == "fig2") return run_dataset(presets.fig2, o, workers) ? 0 : 1;
    if (which == "fig3") return run_dataset(presets.fig3, o, workers) ? 0 : 1;

    const CliOverrides ov = overrides_from(o);
    SweepSpec fig4 = presets.fig4;
    ov.apply(fig4);
    OperatingPointSearch search = presets.fig4_search;
    ov.apply(search);
    log(LogLevel::info, "fig4: searching operating point at n_max=" + std::to_string(search.cutoff.n_max()));
    const TemperatureStudy st = run_temperature_study(fig4, search, workers, progress_logger(fig4));
    const std::string summary = temperature_summary(st);
    log(LogLevel::info, "fig4: operating point J=" + format_number(st.operating_point.params.J) +
                            " F1=" + format_number(st.operating_point.params.F1) +
                            " U=" + format_number(st.operating_point.params.U1));

    const bool ok = write_dataset(st.spec, st.rows, o);

    const fs::path sp = fs::path(o.out_dir) / "fig4_summary.txt";
    std::ofstream out(sp, std::ios::trunc);
    if (!out) throw IoError(sp.string(), "cannot open for writing");
    out << "# generated " << timestamp_utc() << '\n' << summary;
    std::cout << summary;
    return ok ? 0 : 1;
}

int cmd_search(const Options& o) {
    const FigurePresets presets = figure_presets(load_json(preset_path(o)));
    if (!presets.deep_search) throw ConfigError("config has no 'deep_search' section");
    OperatingPointSearch s = *presets.deep_search;
    overrides_from(o).apply(s);
    const OperatingPoint best = find_operating_point(s, workers_from(o.workers));
    std::cout << "best g2_mode1=" << format_number(best.g2) << " J=" << format_number(best.params.J)
              << " F1=" << format_number(best.params.F1) << " U1=U2=" << format_number(best.params.U1)
              << " gamma1=gamma2=" << format_number(best.params.gamma1)
              << " (n_max=" << s.cutoff.n_max() << ", " << best.evaluations << " evaluations)\n";
    return std::isfinite(best.g2) ? 0 : 1;
}

int cmd_cnt_report(const std::string& config, const Options& o) {
    const GeometryConfig g = parse_geometry(load_json(config));
    std::string report = cnt::derivation_report(g.geometry, g.report);
    if (g.mass_estimated) report += "note: mass estimated as sigma_graphene * 2 pi r L\n";
    std::cout << report;
    if (o.out_dir != ".") {
        fs::create_directories(o.out_dir);
        const fs::path p = fs::path(o.out_dir) / (fs::path(config).stem().string() + "_report.txt");
        std::ofstream out(p, std::ios::trunc);
        if (!out) throw IoError(p.string(), "cannot open for writing");
        out << report;
    }
    return 0;
}

/// Quick invariant suite; the full set lives in the test binaries.
int cmd_check() {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
        if (!ok) ++failures;
    };

    const FockCutoff c4(4);
    const OperatorMatrix a = annihilation(c4);
    report("creation is adjoint of annihilation", (creation(c4) - a.adjoint()).norm() == 0.0, "exact");

    SystemParams lin;
    lin.omega1 = lin.omega2 = 0.3;
    lin.F1 = 0.2;
    lin.gamma1 = lin.gamma2 = 1.0;
    {
        const auto r = solve_direct(build_liouvillian(lin, FockCutoff(6)));
        const double g = g2_zero(r.rho(), Mode::first, FockCutoff(6));
        report("linear control g2 = 1", std::abs(g - 1.0) <= 1e-6, "g2-1 = " + format_number(g - 1.0));
    }

    SystemParams th;
    th.omega1 = th.omega2 = 1.0;
    th.gamma1 = th.gamma2 = 1.0;
    th.temperature_ratio = 1.0 / std::log1p(1.0 / 0.1);  // n_th = 0.1
    {
        const FockCutoff c(6);
        const auto r = solve_direct(build_liouvillian(th, c));
        const double g = g2_zero(r.rho(), Mode::first, c);
        report("thermal g2 near 2", std::abs(g - 2.0) <= 1e-2, "g2 = " + format_number(g));
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_trace = 0.0, worst_td = 0.0;
    for (int k = 0; k < 3; ++k) {
        SystemParams p;
        p.omega1 = 0.5 + 0.4 * u(rng);
        p.omega2 = 0.5 + 0.4 * u(rng);
        p.F1 = 0.3 * u(rng);
        p.F2 = 0.3 * u(rng);
        p.U1 = 0.2 * u(rng);
        p.U2 = 0.2 * u(rng);
        p.J = 0.5 * u(rng);
        p.gamma1 = 1.0 + 0.5 * u(rng);
        p.gamma2 = 1.0 + 0.5 * u(rng);
        p.temperature_ratio = 0.5 * std::abs(u(rng));
        const FockCutoff c(3);
        const Liouvillian l = build_liouvillian(p, c);
        StateVector v = StateVector::Random(l.size());
        worst_trace = std::max(worst_trace, std::abs(detail::vec_trace(l.apply(v), l.state_dim())) / v.norm());
        const auto d = solve_direct(l);
        const auto n = solve_nullspace(l);
        worst_td = std::max(worst_td, trace_distance(d.rho(), n.rho()));
    }
    report("Liouvillian annihilates trace", worst_trace <= 1e-10, "max " + format_number(worst_trace));
    report("direct vs nullspace agree", worst_td <= 1e-7, "max trace distance " + format_number(worst_td));
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    g_log_level = log_level_from_env();
    CLI::App app{"Phonon antibunching in coupled nanotube resonators"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--cutoff", o.cutoff, "Fock cutoff n_max per mode")->check(CLI::PositiveNumber);
    app.add_option("--solver", o.solver, "steady-state method")
        ->check(CLI::IsMember({"direct", "nullspace", "evolve"}));
    app.add_option("--workers", o.workers, "worker threads (default: NANOBLOCK_WORKERS or hardware)")
        ->check(CLI::PositiveNumber);
    app.add_option("--nth-convention", o.nth_convention, "thermal occupation formula")
        ->check(CLI::IsMember({"physical", "paper_literal"}));
    app.add_option("--config", o.config, "preset file for fig2/fig3/fig4/search");
    app.add_option("--out", o.out_dir, "output directory");

    std::string config;
    auto* sweep = app.add_subcommand("sweep", "run the 'sweep' section of a config");
    sweep->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", o.out_dir, "output directory");
    std::string figure;
    for (const char* name : {"fig2", "fig3", "fig4"}) {
        auto* sc = app.add_subcommand(name, std::string("figure preset ") + name);
        sc->add_option("--out", o.out_dir, "output directory");
        sc->add_option("--config", o.config, "preset file");
        sc->callback([&figure, name] { figure = name; });
    }
    auto* search = app.add_subcommand("search", "deep T=0 operating point search (deep_search preset)");
    search->add_option("--config", o.config, "preset file");
    auto* report = app.add_subcommand("cnt-report", "nanotube parameter derivation report");
    report->add_option("config", config, "geometry config")->required()->check(CLI::ExistingFile);
    report->add_option("--out", o.out_dir, "directory for the report file");
    auto* check = app.add_subcommand("check", "quick invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(config, o);
        if (!figure.empty()) return cmd_figure(figure, o);
        if (search->parsed()) return cmd_search(o);
        if (report->parsed()) return cmd_cnt_report(config, o);
        if (check->parsed()) return cmd_check();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
