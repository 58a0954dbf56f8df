#include <gtest/gtest.h>

#include <filesystem>
#include <limits>
#include <sstream>

#include "test_support.hpp"

using namespace nanoblock;

namespace {

SweepSpec small_spec() {
    SweepSpec s;
    s.label = "unit";
    s.units.gamma_over_omega1 = 2.0;
    s.base = default_reduced_params(s.units);
    s.base.U1 = s.base.U2 = 0.05;
    s.base.F1 = 0.2;
    s.axis1 = {"J", {0.0, 0.5, 1.0}};
    s.axis2 = Axis{"F1", {0.1, 0.3}};
    s.cutoff = FockCutoff(3);
    return s;
}

std::string body(const std::vector<SweepRow>& rows, const SweepSpec& s) {
    std::ostringstream os;
    write_csv(os, s.axis_names(), rows);
    return os.str();
}

Json parse(const std::string& text) { return Json::parse(text, nullptr, true, true); }

}  // namespace

TEST(SweepSpec, Validation) {
    SweepSpec s = small_spec();
    EXPECT_NO_THROW(s.validate());
    s.axis1.values = {1.0};
    EXPECT_THROW(s.validate(), ConfigError);
    s = small_spec();
    s.axis1.name = "kappa";
    EXPECT_THROW(s.validate(), ConfigError);
    s = small_spec();
    s.axis1.values[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(s.validate(), ConfigError);
    s = small_spec();
    s.axis2->name = "J";
    EXPECT_THROW(s.validate(), ConfigError);
    s = small_spec();
    s.axis1.name = "kappa";
    EXPECT_THROW(run_sweep(s), ConfigError);  // before any solve
}

TEST(SweepSpec, RowMajorOrdering) {
    const SweepSpec s = small_spec();
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s.point(0), (std::vector<double>{0.0, 0.1}));
    EXPECT_EQ(s.point(1), (std::vector<double>{0.0, 0.3}));
    EXPECT_EQ(s.point(2), (std::vector<double>{0.5, 0.1}));
    EXPECT_EQ(s.point(5), (std::vector<double>{1.0, 0.3}));
    const SystemParams p = s.reduced_params(s.point(3));
    EXPECT_EQ(p.J, 0.5);
    EXPECT_EQ(p.F1, 0.3);
    EXPECT_EQ(p.U1, 0.05);
}

TEST(Units, GammaReference) {
    UnitSystem u;
    u.omega1_hz = 37e9;
    u.gamma_over_omega1 = 2.0;
    SystemParams r = default_reduced_params(u);
    EXPECT_DOUBLE_EQ(r.omega1, 0.5);
    EXPECT_DOUBLE_EQ(r.gamma1, 1.0);
    r.temperature_ratio = 0.3;
    const SystemParams p = u.to_physical(r);
    EXPECT_NEAR(p.omega1, 2.0 * std::numbers::pi * 37e9, 1e-3);
    EXPECT_NEAR(p.gamma1, 2.0 * p.omega1, 1e-3);
    EXPECT_EQ(p.temperature_ratio, 0.3);
}

TEST(Units, ObservablesAreScaleFree) {
    // g2 depends only on ratios, so gamma units and rad/s give the same state.
    const SweepSpec s = small_spec();
    const SystemParams r = s.reduced_params(s.point(3));
    const auto a = solve_direct(build_liouvillian(r, s.cutoff));
    const auto b = solve_direct(build_liouvillian(s.units.to_physical(r), s.cutoff));
    EXPECT_LE(trace_distance(a.rho(), b.rho()), 1e-10);
}

TEST(RunSweep, DeterministicAndParallelEquivalent) {
    const SweepSpec s = small_spec();
    const auto a = run_sweep(s, 1);
    const auto b = run_sweep(s, 1);
    const auto c = run_sweep(s, 4);
    ASSERT_EQ(a.size(), s.size());
    for (const auto& r : a) EXPECT_TRUE(r.converged) << r.message;
    EXPECT_EQ(body(a, s), body(b, s));
    EXPECT_EQ(body(a, s), body(c, s));
}

TEST(RunSweep, GridPointIndependence) {
    SweepSpec full = small_spec();
    full.axis2.reset();
    SweepSpec part = full;
    part.axis1.values = {0.0, 1.0};
    const auto a = run_sweep(full);
    const auto b = run_sweep(part);
    EXPECT_EQ(body({a[0], a[2]}, full), body(b, part));
}

TEST(RunSweep, FailedPointsAreFlaggedNotFatal) {
    SweepSpec s = small_spec();
    s.axis2.reset();
    s.axis1 = {"gamma2", {1.0, 0.0}};
    s.base.J = 0.0;  // second point: mode 2 undamped and decoupled
    const auto rows = run_sweep(s);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].converged);
    EXPECT_FALSE(rows[1].converged);
    EXPECT_FALSE(rows[1].observables);
    EXPECT_FALSE(rows[1].message.empty());
    EXPECT_FALSE(all_failed(rows));
    EXPECT_TRUE(all_failed({rows[1]}));
}

TEST(Csv, HeaderOnlyForEmptyRows) {
    std::ostringstream os;
    write_csv(os, {"J", "F1"}, {});
    EXPECT_EQ(os.str(),
              "J,F1,g2_mode1,g2_mode2,log10_g2_mode1,log10_g2_mode2,n_mode1,n_mode2,purity,residual,"
              "converged\n");
}

TEST(Csv, RoundTripTwelveDigits) {
    const SweepSpec s = small_spec();
    const auto rows = run_sweep(s);
    std::stringstream ss;
    write_csv(ss, s.axis_names(), rows, {"generated now", "note"});
    const CsvTable t = parse_csv(ss);
    ASSERT_EQ(t.cells.size(), rows.size());
    EXPECT_EQ(t.columns.front(), "J");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double g = *rows[i].observables->g2_mode1;
        EXPECT_LE(std::abs(*t.number(i, "g2_mode1") - g), 5e-12 * std::abs(g));
        EXPECT_EQ(*t.number(i, "J"), rows[i].axis_values[0]);
        EXPECT_EQ(t.cells[i][t.column("converged")], "true");
    }
}

TEST(Csv, MissingValues) {
    SweepRow ok;
    ok.axis_values = {1.0};
    ok.observables = ObservableSet{};
    ok.observables->g2_mode1 = 0.5;
    ok.observables->g2_mode2 = std::nullopt;  // occupation below floor
    ok.residual = 1e-15;
    ok.converged = true;
    SweepRow failed;
    failed.axis_values = {2.0};
    std::ostringstream os;
    write_csv(os, {"J"}, {ok, failed});
    std::istringstream is(os.str());
    const CsvTable t = parse_csv(is);
    EXPECT_EQ(t.cells[0][t.column("g2_mode2")], "NA");
    EXPECT_EQ(t.cells[0][t.column("log10_g2_mode2")], "NA");
    EXPECT_EQ(t.cells[0][t.column("g2_mode1")], "0.5");
    EXPECT_EQ(t.cells[1][t.column("g2_mode1")], "");
    EXPECT_EQ(t.cells[1][t.column("converged")], "false");
    EXPECT_EQ(t.cells[1].size(), t.columns.size());
}

TEST(Csv, NaExactlyBelowOccupationFloor) {
    SweepSpec s = small_spec();
    s.axis2.reset();
    s.base.F1 = 0.0;
    s.axis1 = {"F1", {0.0, 0.2}};
    s.base.J = 0.0;
    const auto rows = run_sweep(s);
    std::ostringstream os;
    write_csv(os, s.axis_names(), rows);
    std::istringstream is(os.str());
    const CsvTable t = parse_csv(is);
    EXPECT_EQ(t.cells[0][t.column("g2_mode1")], "NA");  // undriven vacuum
    EXPECT_EQ(t.cells[0][t.column("g2_mode2")], "NA");
    EXPECT_NE(t.cells[1][t.column("g2_mode1")], "NA");
    EXPECT_EQ(t.cells[1][t.column("g2_mode2")], "NA");  // uncoupled, undriven mode 2
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& o = *rows[i].observables;
        EXPECT_EQ(!o.g2_mode1.has_value(), o.n_mode1 <= kOccupationFloor);
        EXPECT_EQ(!o.g2_mode2.has_value(), o.n_mode2 <= kOccupationFloor);
    }
}

TEST(Csv, HeaderCommentsRecordUnits) {
    const auto c = sweep_header_comments(small_spec());
    ASSERT_GE(c.size(), 3u);
    EXPECT_EQ(c[0].rfind("generated ", 0), 0u);
    EXPECT_NE(c[2].find("gamma_ref"), std::string::npos);
}

TEST(Csv, EmitReportsPath) {
    try {
        emit_csv({}, {"J"}, "/nonexistent-dir/x.csv");
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
    }
}

TEST(Config, Grids) {
    EXPECT_EQ(parse_grid(parse(R"([1, 2, 3])"), "g"), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(parse_grid(parse(R"({"start": 0, "stop": 1, "count": 3})"), "g"),
              (std::vector<double>{0, 0.5, 1}));
    const auto lg = parse_grid(parse(R"({"start": 1, "stop": 100, "count": 3, "spacing": "log"})"), "g");
    EXPECT_NEAR(lg[1], 10.0, 1e-12);
    EXPECT_EQ(lg[2], 100.0);
    EXPECT_THROW(parse_grid(parse(R"({"start": 0, "stop": 1, "count": 3, "spacing": "log"})"), "g"),
                 ConfigError);
}

TEST(Config, SweepSpecParsing) {
    const Json j = parse(R"({
        // comment allowed
        "units": {"omega1_hz": 1e9, "gamma_over_omega1": 4},
        "system": {"U1": 0.1},
        "solver": {"method": "nullspace", "cutoff": 4},
        "sweep": {"axis1": {"name": "J", "values": [0, 1]}, "output": "x.csv"}
    })");
    const SweepSpec s = parse_sweep_spec(j);
    EXPECT_EQ(s.solver, SolverMethod::nullspace);
    EXPECT_EQ(s.cutoff.n_max(), 4);
    EXPECT_DOUBLE_EQ(s.base.omega1, 0.25);
    EXPECT_DOUBLE_EQ(s.base.U1, 0.1);
    EXPECT_EQ(s.output_path, "x.csv");
    EXPECT_FALSE(s.axis2);

    EXPECT_THROW(parse_sweep_spec(parse(R"({"sweep": {"axis1": {"name": "kappa", "values": [0, 1]}}})")),
                 ConfigError);
    EXPECT_THROW(parse_sweep_spec(parse(R"({"sweep": {"axis1": {"name": "J", "values": [0]}}})")),
                 ConfigError);
    EXPECT_THROW(parse_sweep_spec(parse(R"({"system": {"Jay": 1}, "sweep": {"axis1": {"name": "J", "values": [0, 1]}}})")),
                 ConfigError);
    EXPECT_THROW(parse_sweep_spec(parse(R"({"units": {"gamma_over_omega1": 2}, "system": {"omega1": 1},
                                           "sweep": {"axis1": {"name": "J", "values": [0, 1]}}})")),
                 ConfigError);
}

TEST(Config, Overrides) {
    SweepSpec s = small_spec();
    CliOverrides o;
    o.cutoff = 5;
    o.solver = SolverMethod::evolve;
    o.nth_convention = NthConvention::paper_literal;
    o.apply(s);
    EXPECT_EQ(s.cutoff.n_max(), 5);
    EXPECT_EQ(s.solver, SolverMethod::evolve);
    EXPECT_EQ(s.base.nth_convention, NthConvention::paper_literal);
}

TEST(Config, Geometry) {
    const GeometryConfig g = parse_geometry(parse(R"({"geometry": {"radius_m": 1e-9, "length_m": 1e-7,
        "modulus_pa": 1e12, "gate_distance_m": 1e-7, "electrons": 2}})"));
    EXPECT_TRUE(g.mass_estimated);
    EXPECT_NEAR(g.geometry.ne, 2 * cnt::kElementaryCharge, 1e-30);
    EXPECT_THROW(parse_geometry(parse(R"({"geometry": {"radius_m": 1e-9, "length_m": 1e-7,
        "modulus_pa": 1e12, "gate_distance_m": 1e-7, "electrons": 2, "charge_c": 1e-19}})")),
                 ConfigError);
    try {
        parse_geometry(parse(R"({"geometry": {"radius_m": -1e-9, "length_m": 1e-7,
            "modulus_pa": 1e12, "gate_distance_m": 1e-7, "electrons": 2}})"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'r'"), std::string::npos);
    }
}

TEST(Presets, ShippedStructure) {
    const FigurePresets p = figure_presets(load_json(std::string(NANOBLOCK_CONFIG_DIR) + "/presets.json"));
    EXPECT_EQ(p.fig2.axis1.name, "J");
    ASSERT_TRUE(p.fig2.axis2);
    EXPECT_EQ(p.fig2.axis2->name, "F1");
    EXPECT_EQ(p.fig3.axis1.name, "U2");
    ASSERT_TRUE(p.fig3.axis2);
    EXPECT_EQ(p.fig3.axis2->name, "U1");
    EXPECT_EQ(p.fig4.axis1.name, "temperature_ratio");
    EXPECT_FALSE(p.fig4.axis2);
    EXPECT_EQ(p.fig2.cutoff.n_max(), 6);
    EXPECT_TRUE(p.deep_search);
    EXPECT_LE(p.fig2.base.U1, 1e-2);
    const auto& j = p.fig2.axis1.values;
    EXPECT_NE(std::find(j.begin(), j.end(), 0.0), j.end());
}

TEST(Temperature, ShapeAnalysis) {
    std::vector<SweepRow> rows;
    for (auto [t, g] : std::vector<std::pair<double, double>>{{0.0, 0.01}, {0.05, 0.2}, {0.06, 0.6}, {0.1, 1.9}}) {
        SweepRow r;
        r.axis_values = {t};
        r.observables = ObservableSet{};
        r.observables->g2_mode1 = g;
        r.converged = true;
        rows.push_back(r);
    }
    TemperatureShape s = analyse_temperature_rows(rows, 0.056);
    EXPECT_TRUE(s.non_decreasing);
    EXPECT_NEAR(*s.g2_at_probe, 0.2 + 0.6 * 0.4, 1e-12);
    EXPECT_EQ(*s.largest_below, 0.05);
    rows[2].observables->g2_mode1 = 0.1;
    s = analyse_temperature_rows(rows, 0.056);
    EXPECT_FALSE(s.non_decreasing);
    EXPECT_EQ(s.first_violation, 2u);
}

TEST(OperatingPoint, SearchImprovesOnCoarseGrid) {
    OperatingPointSearch s;
    s.units.gamma_over_omega1 = 2.0 * std::sqrt(3.0);
    s.base = default_reduced_params(s.units);
    s.J = {4.0, 6.0, 8.0};
    s.F = {0.05, 0.1};
    s.U = {0.005, 0.02};
    s.refine_rounds = 2;
    s.refine_points = 3;
    s.cutoff = FockCutoff(3);
    const OperatingPoint coarse = [&] {
        OperatingPointSearch c = s;
        c.refine_rounds = 0;
        return find_operating_point(c);
    }();
    const OperatingPoint refined = find_operating_point(s, 2);
    EXPECT_TRUE(std::isfinite(coarse.g2));
    EXPECT_LE(refined.g2, coarse.g2);
    EXPECT_GT(refined.evaluations, coarse.evaluations);
    EXPECT_EQ(refined.params.U1, refined.params.U2);
}

TEST(OperatingPoint, DampingAxis) {
    OperatingPointSearch s;
    s.units.gamma_over_omega1 = 2.0 * std::sqrt(3.0);
    s.base = default_reduced_params(s.units);
    s.J = {6.0744};
    s.F = {0.01};
    s.U = {0.010825};
    s.refine_rounds = 0;
    s.cutoff = FockCutoff(3);
    const OperatingPoint fixed = find_operating_point(s);
    EXPECT_EQ(fixed.params.gamma1, 1.0);
    EXPECT_EQ(fixed.evaluations, 1u);

    // The g2 zero at J = 6 gamma, U = 0.01069 gamma needs omega / gamma = 0.2851, i.e. gamma = 1.0124.
    s.gamma = {1.0, 1.0124};
    const OperatingPoint tuned = find_operating_point(s);
    EXPECT_EQ(tuned.evaluations, 2u);
    EXPECT_EQ(tuned.params.gamma1, 1.0124);
    EXPECT_EQ(tuned.params.gamma2, 1.0124);
    EXPECT_LT(tuned.g2, 0.1 * fixed.g2);

    s.gamma = {0.0};
    EXPECT_THROW(find_operating_point(s), ConfigError);
}
