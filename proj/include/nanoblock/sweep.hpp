#pragma once

// Parameter grids over SystemParams, solved point by point on a worker
// pool, and their CSV datasets.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "nanoblock/model.hpp"
#include "nanoblock/observables.hpp"
#include "nanoblock/steady_state.hpp"

namespace nanoblock {

inline constexpr std::array<std::string_view, 10> kParameterNames = {
    "omega1", "omega2", "F1", "F2", "U1", "U2", "J", "gamma1", "gamma2", "temperature_ratio"};

inline bool is_parameter_name(std::string_view name) {
    return std::find(kParameterNames.begin(), kParameterNames.end(), name) != kParameterNames.end();
}

template <class Params>
auto& parameter_field(Params& p, std::string_view name) {
    if (name == "omega1") return p.omega1;
    if (name == "omega2") return p.omega2;
    if (name == "F1") return p.F1;
    if (name == "F2") return p.F2;
    if (name == "U1") return p.U1;
    if (name == "U2") return p.U2;
    if (name == "J") return p.J;
    if (name == "gamma1") return p.gamma1;
    if (name == "gamma2") return p.gamma2;
    if (name == "temperature_ratio") return p.temperature_ratio;
    throw ConfigError("unknown parameter name '" + std::string(name) + "'");
}

inline double& parameter_ref(SystemParams& p, std::string_view name) { return parameter_field(p, name); }

inline double parameter_value(const SystemParams& p, std::string_view name) {
    return parameter_field(p, name);
}

/// Rates in configs and datasets are multiples of gamma_ref.
struct UnitSystem {
    double omega1_hz = 37e9;          ///< absolute mode-1 frequency
    double gamma_over_omega1 = 1.0;   ///< gamma_ref / omega1

    double omega1_rad_s() const { return 2.0 * std::numbers::pi * omega1_hz; }
    double gamma_ref() const { return gamma_over_omega1 * omega1_rad_s(); }

    /// Converts a gamma-unit parameter set to rad/s.
    SystemParams to_physical(const SystemParams& reduced) const {
        const double s = gamma_ref();
        SystemParams p = reduced;
        for (auto name : kParameterNames) {
            if (name != "temperature_ratio") parameter_ref(p, name) *= s;
        }
        return p;
    }

    std::string describe() const {
        std::ostringstream os;
        os << std::setprecision(12) << "rates in units of gamma_ref = " << gamma_ref()
           << " rad/s; gamma_ref/omega1 = " << gamma_over_omega1 << "; omega1/2pi = " << omega1_hz
           << " Hz; temperature_ratio = T/(hbar*omega1/k_B)";
        return os.str();
    }
};

struct Axis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    std::string label = "sweep";
    SystemParams base;  ///< gamma units
    UnitSystem units;
    Axis axis1;
    std::optional<Axis> axis2;
    FockCutoff cutoff{6};
    SolverMethod solver = SolverMethod::direct;
    std::string output_path;

    void validate() const {
        auto check_axis = [](const Axis& a) {
            if (!is_parameter_name(a.name)) {
                throw ConfigError("sweep axis: unknown parameter name '" + a.name + "'");
            }
            if (a.values.size() < 2) {
                throw ConfigError("sweep axis '" + a.name + "': grid needs at least 2 values");
            }
            for (double v : a.values) {
                if (!std::isfinite(v)) {
                    throw ConfigError("sweep axis '" + a.name + "': non-finite grid value");
                }
            }
        };
        check_axis(axis1);
        if (axis2) {
            check_axis(*axis2);
            if (axis2->name == axis1.name) throw ConfigError("sweep axes must differ");
        }
        if (!(units.gamma_over_omega1 > 0.0) || !(units.omega1_hz > 0.0)) {
            throw ConfigError("units: gamma_over_omega1 and omega1_hz must be > 0");
        }
    }

    std::size_t size() const { return axis1.values.size() * (axis2 ? axis2->values.size() : 1); }

    std::vector<std::string> axis_names() const {
        std::vector<std::string> names{axis1.name};
        if (axis2) names.push_back(axis2->name);
        return names;
    }

    /// Row-major: axis1 outer, axis2 inner.
    std::vector<double> point(std::size_t index) const {
        if (!axis2) return {axis1.values.at(index)};
        const std::size_t n2 = axis2->values.size();
        return {axis1.values.at(index / n2), axis2->values.at(index % n2)};
    }

    SystemParams reduced_params(const std::vector<double>& values) const {
        SystemParams p = base;
        const auto names = axis_names();
        for (std::size_t i = 0; i < names.size(); ++i) parameter_ref(p, names[i]) = values[i];
        return p;
    }
};

struct SweepRow {
    std::vector<double> axis_values;
    std::optional<ObservableSet> observables;  ///< empty for failed points
    double residual = std::numeric_limits<double>::quiet_NaN();
    double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    SolverMethod method = SolverMethod::direct;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Solves one reduced (gamma-unit) parameter set; never throws.
inline SweepRow solve_point(const SystemParams& reduced, const UnitSystem& units, FockCutoff cutoff,
                            SolverMethod method) {
    SweepRow row;
    row.method = method;
    try {
        reduced.validate();
        const SystemParams p = units.to_physical(reduced);
        const Liouvillian l = build_liouvillian(p, cutoff);
        const SteadyStateResult res = solve(l, method);
        row.residual = res.residual;
        row.iterations = res.iterations;
        row.min_eigenvalue = res.min_eigenvalue();
        row.message = res.message;
        row.converged = res.converged && !res.multiplicity_warning && res.state.has_value();
        if (row.converged) row.observables = compute_observables(res.rho(), cutoff);
    } catch (const std::exception& e) {
        row.converged = false;
        row.observables.reset();
        row.message = e.what();
    }
    return row;
}

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Evaluates f(i) for i in [0, count) on `workers` threads; results by index.
template <class Result, class F>
std::vector<Result> parallel_map(std::size_t count, unsigned workers, F&& f) {
    std::vector<Result> out(count);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) out[i] = f(i);
    };
    if (workers == 1) {
        work();
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();  // joins
    return out;
}

using ProgressCallback = std::function<void(std::size_t index, const SweepRow&)>;

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers = 1,
                                       const ProgressCallback& progress = {}) {
    spec.validate();
    std::mutex progress_mutex;
    return parallel_map<SweepRow>(spec.size(), workers, [&](std::size_t i) {
        const auto values = spec.point(i);
        SweepRow row = solve_point(spec.reduced_params(values), spec.units, spec.cutoff, spec.solver);
        row.axis_values = values;
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(i, row);
        }
        return row;
    });
}

// ---------------------------------------------------------------- CSV

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::vector<std::string> csv_columns(const std::vector<std::string>& axis_names) {
    std::vector<std::string> cols = axis_names;
    for (const char* c : {"g2_mode1", "g2_mode2", "log10_g2_mode1", "log10_g2_mode2", "n_mode1",
                          "n_mode2", "purity", "residual", "converged"}) {
        cols.emplace_back(c);
    }
    return cols;
}

inline std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Comment lines describing a sweep; the first one carries the timestamp.
inline std::vector<std::string> sweep_header_comments(const SweepSpec& spec) {
    std::ostringstream base;
    base << std::setprecision(12);
    for (auto name : kParameterNames) base << ' ' << name << '=' << parameter_value(spec.base, name);
    return {
        "generated " + timestamp_utc(),
        "dataset " + spec.label,
        "units: " + spec.units.describe(),
        "cutoff n_max = " + std::to_string(spec.cutoff.n_max()) + ", solver = " + to_string(spec.solver) +
            ", nth_convention = " + to_string(spec.base.nth_convention),
        "base:" + base.str(),
    };
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& axis_names,
                      const std::vector<SweepRow>& rows, const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) os << "# " << c << '\n';
    const auto cols = csv_columns(axis_names);
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.axis_values.size(); ++i) os << (i ? "," : "") << format_number(r.axis_values[i]);
        if (r.observables) {
            const auto& o = *r.observables;
            os << ',' << opt(o.g2_mode1) << ',' << opt(o.g2_mode2) << ',' << opt(o.log10_g2_mode1())
               << ',' << opt(o.log10_g2_mode2()) << ',' << format_number(o.n_mode1) << ','
               << format_number(o.n_mode2) << ',' << format_number(o.purity);
        } else {
            os << ",,,,,,,";
        }
        os << ',' << (std::isfinite(r.residual) ? format_number(r.residual) : std::string());
        os << ',' << (r.converged ? "true" : "false") << '\n';
    }
}

inline void emit_csv(const std::vector<SweepRow>& rows, const std::vector<std::string>& axis_names,
                     const std::string& path, const std::vector<std::string>& comments = {}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    write_csv(out, axis_names, rows, comments);
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

/// Parsed CSV: column names and raw cells, comments skipped.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> cells;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw ConfigError("csv: no column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
    /// Numeric cell; empty for blank or NA.
    std::optional<double> number(std::size_t row, const std::string& name) const {
        const std::string& s = cells.at(row).at(column(name));
        if (s.empty() || s == "NA") return std::nullopt;
        return std::stod(s);
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline CsvTable parse_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            t.columns = split_csv_line(line);
            header = false;
        } else {
            t.cells.push_back(split_csv_line(line));
        }
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open for reading");
    return parse_csv(in);
}

/// Per-solve diagnostics in a deterministic text form.
inline std::string diagnostics_line(std::size_t index, const std::vector<std::string>& axis_names,
                                    const SweepRow& row) {
    std::ostringstream os;
    os << "point=" << index;
    for (std::size_t i = 0; i < axis_names.size() && i < row.axis_values.size(); ++i) {
        os << ' ' << axis_names[i] << '=' << format_number(row.axis_values[i]);
    }
    os << " method=" << to_string(row.method) << " residual=" << format_number(row.residual)
       << " iterations=" << row.iterations << " min_eig=" << format_number(row.min_eigenvalue)
       << " converged=" << (row.converged ? "true" : "false");
    if (!row.message.empty()) os << " note=\"" << row.message << '"';
    return os.str();
}

inline bool all_failed(const std::vector<SweepRow>& rows) {
    return std::none_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
}

// ------------------------------------------------------ operating point

/// Coarse grid over (J, F1, U1 = U2, gamma1 = gamma2) followed by zoomed local grids.
struct OperatingPointSearch {
    SystemParams base;  ///< gamma units
    UnitSystem units;
    std::vector<double> J;
    std::vector<double> F;
    std::vector<double> U;
    std::vector<double> gamma;  ///< empty: keep base gamma1, gamma2
    int refine_rounds = 6;
    int refine_points = 5;
    FockCutoff cutoff{4};
    SolverMethod solver = SolverMethod::direct;
};

struct OperatingPoint {
    SystemParams params;  ///< gamma units
    double g2 = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

namespace detail {

inline SystemParams with_jfu(SystemParams p, double j, double f, double u) {
    p.J = j;
    p.F1 = f;
    p.U1 = u;
    p.U2 = u;
    return p;
}

/// Copies the searched coordinates of `op` onto `p`.
inline SystemParams with_operating_point(SystemParams p, const SystemParams& op) {
    p = with_jfu(p, op.J, op.F1, op.U1);
    p.gamma1 = op.gamma1;
    p.gamma2 = op.gamma2;
    return p;
}

inline std::vector<double> local_grid(double center, double half_width, double lo, double hi, int points) {
    std::vector<double> g;
    for (int i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : -1.0 + 2.0 * i / (points - 1);
        g.push_back(std::clamp(center + t * half_width, lo, hi));
    }
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

inline double neighbour_spacing(const std::vector<double>& grid, double v) {
    double best = std::numeric_limits<double>::infinity();
    for (double g : grid) {
        if (g != v) best = std::min(best, std::abs(g - v));
    }
    return std::isfinite(best) ? best : 0.0;
}

}  // namespace detail

/// Minimizes g2 of mode 1 over the search box; points with undefined g2 are skipped.
inline OperatingPoint find_operating_point(const OperatingPointSearch& s, unsigned workers = 1) {
    if (s.J.empty() || s.F.empty() || s.U.empty()) throw ConfigError("operating point search: empty grid");
    for (double g : s.gamma) {
        if (!(g > 0.0)) throw ConfigError("operating point search: gamma grid must be > 0");
    }
    using Grids = std::array<std::vector<double>, 4>;
    auto place = [&](const std::array<double, 4>& x) {
        SystemParams p = detail::with_jfu(s.base, x[0], x[1], x[2]);
        if (!s.gamma.empty()) p.gamma1 = p.gamma2 = x[3];
        return p;
    };
    const Grids coarse{s.J, s.F, s.U, s.gamma.empty() ? std::vector<double>{s.base.gamma1} : s.gamma};

    OperatingPoint best;
    std::array<double, 4> at{};
    auto evaluate = [&](const Grids& g) {
        const std::size_t total = g[0].size() * g[1].size() * g[2].size() * g[3].size();
        auto coords = [&](std::size_t i) {
            std::array<double, 4> x{};
            for (int k = 3; k >= 0; --k) {
                x[k] = g[k][i % g[k].size()];
                i /= g[k].size();
            }
            return x;
        };
        const auto rows = parallel_map<SweepRow>(total, workers, [&](std::size_t i) {
            const auto x = coords(i);
            SweepRow r = solve_point(place(x), s.units, s.cutoff, s.solver);
            r.axis_values.assign(x.begin(), x.end());
            return r;
        });
        best.evaluations += total;
        for (const auto& r : rows) {
            if (!r.converged || !r.observables || !r.observables->g2_mode1) continue;
            const double v = *r.observables->g2_mode1;
            if (v >= 0.0 && v < best.g2) {
                best.g2 = v;
                std::copy(r.axis_values.begin(), r.axis_values.end(), at.begin());
                best.params = place(at);
            }
        }
    };
    evaluate(coarse);
    if (!std::isfinite(best.g2)) return best;

    std::array<double, 4> lo{}, hi{}, h{};
    for (int k = 0; k < 4; ++k) {
        lo[k] = *std::min_element(coarse[k].begin(), coarse[k].end());
        hi[k] = *std::max_element(coarse[k].begin(), coarse[k].end());
        h[k] = detail::neighbour_spacing(coarse[k], at[k]);
    }
    const double shrink = 2.0 / std::max(2, s.refine_points - 1);
    for (int round = 0; round < s.refine_rounds; ++round) {
        Grids local;
        for (int k = 0; k < 4; ++k) local[k] = detail::local_grid(at[k], h[k], lo[k], hi[k], s.refine_points);
        evaluate(local);
        for (double& v : h) v *= shrink;
    }
    return best;
}

// ------------------------------------------------ temperature analysis

struct TemperatureShape {
    bool non_decreasing = true;
    std::optional<double> g2_at_probe;        ///< interpolated g2 at the probe ratio
    std::optional<double> largest_below;      ///< largest grid T/T0 with g2 < threshold
    std::size_t first_violation = 0;          ///< index of the first decrease, if any
};

/// Monotonicity with relative roundoff allowance, and the g2 < threshold crossover.
inline TemperatureShape analyse_temperature_rows(const std::vector<SweepRow>& rows, double probe,
                                                 double threshold = 0.5, double roundoff = 1e-9) {
    TemperatureShape shape;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.converged && r.observables && r.observables->g2_mode1) {
            pts.emplace_back(r.axis_values.at(0), *r.observables->g2_mode1);
        }
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].second < pts[i - 1].second * (1.0 - roundoff)) {
            if (shape.non_decreasing) shape.first_violation = i;
            shape.non_decreasing = false;
        }
    }
    for (const auto& [t, g] : pts) {
        if (g < threshold) shape.largest_below = t;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].first <= probe && probe <= pts[i + 1].first) {
            const double w = (probe - pts[i].first) / (pts[i + 1].first - pts[i].first);
            shape.g2_at_probe = pts[i].second + w * (pts[i + 1].second - pts[i].second);
            break;
        }
    }
    return shape;
}


/// T/T0 of 0.1 K against hbar * 2 pi * 37 GHz / k_B.
inline constexpr double kFig4ProbeRatio = 0.056;

struct TemperatureStudy {
    OperatingPoint operating_point;
    SweepSpec spec;  ///< fig4 template with J, F1, U1 = U2 from the search
    std::vector<SweepRow> rows;
    TemperatureShape shape;
};

inline TemperatureStudy run_temperature_study(const SweepSpec& fig4, const OperatingPointSearch& search,
                                              unsigned workers = 1, const ProgressCallback& progress = {}) {
    TemperatureStudy st;
    st.operating_point = find_operating_point(search, workers);
    if (!std::isfinite(st.operating_point.g2)) {
        throw ResolutionError("fig4: operating point search found no defined g2");
    }
    st.spec = fig4;
    const SystemParams& op = st.operating_point.params;
    st.spec.base = detail::with_operating_point(st.spec.base, op);
    st.rows = run_sweep(st.spec, workers, progress);
    st.shape = analyse_temperature_rows(st.rows, kFig4ProbeRatio);
    return st;
}

inline std::string temperature_summary(const TemperatureStudy& st) {
    std::ostringstream os;
    const SystemParams& p = st.operating_point.params;
    os << "operating point (gamma units): J=" << format_number(p.J) << " F1=" << format_number(p.F1)
       << " U1=U2=" << format_number(p.U1) << " gamma1=gamma2=" << format_number(p.gamma1)
       << " omega1=" << format_number(p.omega1) << '\n';
    os << "search: g2_mode1=" << format_number(st.operating_point.g2) << " after "
       << st.operating_point.evaluations << " evaluations\n";
    os << "non_decreasing=" << (st.shape.non_decreasing ? "true" : "false") << '\n';
    if (!st.shape.non_decreasing) os << "first_decrease_index=" << st.shape.first_violation << '\n';
    os << "g2_mode1_at_" << format_number(kFig4ProbeRatio) << '='
       << (st.shape.g2_at_probe ? format_number(*st.shape.g2_at_probe) : std::string("NA")) << '\n';
    os << "largest_ratio_with_g2_below_0.5="
       << (st.shape.largest_below ? format_number(*st.shape.largest_below) : std::string("NA")) << '\n';
    return os.str();
}

}  // namespace nanoblock
