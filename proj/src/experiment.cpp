#include "carpetlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <random>

#include "carpetlab/errors.hpp"
#include "carpetlab/estimates.hpp"
#include "carpetlab/inequalities.hpp"
#include "carpetlab/timechange.hpp"

namespace carpetlab {

namespace {

using json = nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

json fit_json(const FitReport& f) {
    json grid = json::array();
    for (const auto& [x, y] : f.grid) grid.push_back({x, y});
    return {{"exponent", f.exponent}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"grid", grid}};
}

json trend_json(const SequenceTrend& s) {
    return {{"values", s.values}, {"increments", s.increments}, {"ratios", s.ratios}, {"label", s.label}};
}

Check check_le(std::string name, double value, double bound) {
    return {std::move(name), value, "<=", bound, 0.0, value <= bound};
}
Check check_lt(std::string name, double value, double bound) {
    return {std::move(name), value, "<", bound, 0.0, value < bound};
}
Check check_ge(std::string name, double value, double bound) {
    return {std::move(name), value, ">=", bound, 0.0, value >= bound};
}
Check check_gt(std::string name, double value, double bound) {
    return {std::move(name), value, ">", bound, 0.0, value > bound};
}
Check check_in(std::string name, double value, double lo, double hi) {
    return {std::move(name), value, "in", lo, hi, value > lo && value < hi};
}
Check check_true(std::string name, bool ok) {
    return {std::move(name), ok ? 1.0 : 0.0, "==", 1.0, 0.0, ok};
}

int default_dim(const std::string& name) { return name == "scom" ? 3 : 2; }

int dim_of(const ExperimentConfig& cfg) { return cfg.dim != 0 ? cfg.dim : default_dim(cfg.experiment); }

int default_generations(const std::string& name, int dim) {
    static const std::map<std::string, std::pair<int, int>> table = {
        {"build", {2, 2}},      {"vd", {6, 3}},          {"spectrum", {4, 2}}, {"exit-times", {6, 4}},
        {"ondiag", {6, 3}},     {"dg", {5, 3}},          {"fk", {5, 3}},       {"csa", {5, 3}},
        {"cacciopoli", {4, 2}}, {"stability", {4, 2}}, {"timechange", {6, 4}}, {"scom", {5, 4}},
    };
    const auto& [d2, d3] = table.at(name);
    return dim == 2 ? d2 : d3;
}

int gen_of(const ExperimentConfig& cfg) {
    return cfg.generations != 0 ? cfg.generations : default_generations(cfg.experiment, dim_of(cfg));
}

VertexId find_cell(const CarpetGraph& g, std::vector<std::int64_t> coords) {
    coords.resize(static_cast<std::size_t>(g.dim()), 0);
    for (auto c : coords) {
        if (c < 0 || c >= g.side()) return -1;
    }
    return g.find(coords);
}

// Radii for exit-time fits: quarter powers of 3 from 27 up to a third of the
// side, or from 3 on graphs too small for that.
std::vector<double> exit_radii(std::int64_t side) {
    std::vector<double> r;
    for (double x : {27.0, 47.0, 81.0, 140.0, 243.0, 421.0, 729.0}) {
        if (x <= side / 3.0) r.push_back(x);
    }
    if (r.size() < 3) {
        r.clear();
        for (double x : {3.0, 5.0, 9.0, 16.0, 27.0}) {
            if (x <= side / 3.0) r.push_back(x);
        }
    }
    return r;
}

// Generation sweep used for the d = 3 walk dimension and the Green sums.
const std::vector<int> kSweep3 = {2, 3, 4};

const GreenColumns& reference_columns(std::int64_t budget) {
    static std::unique_ptr<GreenColumns> cols;
    if (!cols) cols = std::make_unique<GreenColumns>(green_columns(3, kSweep3, budget));
    return *cols;
}

struct WalkDim {
    double value = 2.0;
    double raw = 2.0;
    std::string method;
};

// d = 2: exit-time fit at the origin of the generation-6 carpet.
// d = 3: exit-time ratio of the last two generations of the sweep.
WalkDim reference_walk_dimension(int dim, std::int64_t budget) {
    static std::map<int, WalkDim> cache;
    if (auto it = cache.find(dim); it != cache.end()) return it->second;
    WalkDim w;
    if (dim == 3) {
        w.raw = reference_columns(budget).walk_dimension.back();
        w.method = "generation sweep of exit times, d=3, generations 2..4";
    } else {
        const CarpetGraph g = build_precarpet({dim, 6}, budget);
        w.raw = fit_walk_dimension(DirichletForm(g.graph_ptr()), g.origin(), exit_radii(g.side())).exponent;
        w.method = "exit-time fit at the origin, generation 6";
    }
    w.value = std::max(2.0, w.raw);
    cache[dim] = w;
    return w;
}

WalkDim resolve_walk_dimension(const ExperimentConfig& cfg, int dim) {
    if (cfg.walk_dimension > 0.0) return {cfg.walk_dimension, cfg.walk_dimension, "configured"};
    return reference_walk_dimension(dim, cfg.budget_cells);
}

json walk_json(const WalkDim& w) { return {{"value", w.value}, {"raw", w.raw}, {"method", w.method}}; }

void add_fit_rows(Table& t, const FitReport& f) {
    for (std::size_t i = 0; i < f.grid.size(); ++i) t.rows.push_back({f.grid[i].first, f.grid[i].second, f.residuals[i]});
}

PlotSpec loglog_plot(std::string xlabel, std::string ylabel, const FitReport& f, std::string title) {
    PlotSpec p;
    p.xlabel = std::move(xlabel);
    p.ylabel = std::move(ylabel);
    p.logx = p.logy = true;
    p.series.push_back({1, 2, "points", std::move(title)});
    p.fit_line = true;
    p.slope = f.exponent;
    p.intercept = f.intercept;
    return p;
}

double t_for_phi(const ScalingFunction& sf, double R, double target) {
    double lo = 1e-8, hi = 1e14;
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (phi(sf, R, mid) > target) lo = mid; else hi = mid;
    }
    return std::sqrt(lo * hi);
}

// ---- experiments ----

ExperimentOutcome exp_build(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    ExperimentOutcome out;
    out.claim = "the generation-n pre-carpet is a connected union of M_d^n unit cells";
    const std::int64_t expected = carpet_cell_count({dim, n});
    out.report = {{"dim", dim},
                  {"generations", n},
                  {"side", g.side()},
                  {"cells", g.size()},
                  {"expected_cells", expected},
                  {"edges", g.graph().edge_count()},
                  {"fractal_dimension", fractal_dimension(dim)}};
    out.checks.push_back({"cell count", static_cast<double>(g.size()), "==", static_cast<double>(expected), 0.0,
                          g.size() == expected});
    out.checks.push_back(check_true("connected", is_connected(g.graph())));
    for (int i = 0; i < dim; ++i) out.table.columns.push_back("x" + std::to_string(i));
    for (VertexId v = 0; v < g.size(); ++v) {
        const auto c = g.graph().coords(v);
        out.table.rows.emplace_back(c.begin(), c.end());
    }
    out.plot.xlabel = "x0";
    out.plot.ylabel = "x1";
    out.plot.series.push_back({1, 2, "dots", "cells"});
    return out;
}

ExperimentOutcome exp_vd(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    if (n < 2) throw ConfigError("vd: needs generations >= 2");
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const CarpetGraph prev = build_precarpet({dim, n - 1}, cfg.budget_cells);
    std::vector<double> radii = cfg.radii;
    if (radii.empty()) {
        for (double r = 9; r <= g.side() / 3.0; r *= 3) radii.push_back(r);
        if (radii.size() < 2) radii = {1, 3, 9};
    }
    const FitReport vol = volume_growth_fit(g.graph(), g.origin(), radii);
    std::vector<double> vd_radii;
    for (double r = 1; r <= prev.side() / 4.0; r *= 2) vd_radii.push_back(r);
    if (vd_radii.empty()) vd_radii = {1};
    const VdReport a = vd_scan(prev.graph(), 200, vd_radii, cfg.seed);
    const VdReport b = vd_scan(g.graph(), 200, vd_radii, cfg.seed);
    const double change = std::max(a.c_d_estimate, b.c_d_estimate) / std::min(a.c_d_estimate, b.c_d_estimate);
    const double df = fractal_dimension(dim);

    ExperimentOutcome out;
    out.claim = "volume growth V(x,r) ~ r^d_f and volume doubling with a generation-independent constant";
    out.report = {{"volume_fit", fit_json(vol)},
                  {"fractal_dimension", df},
                  {"vd_radii", vd_radii},
                  {"c_d", {{"generation", n - 1}, {"estimate", a.c_d_estimate}, {"samples", a.samples}}},
                  {"c_d_next", {{"generation", n}, {"estimate", b.c_d_estimate}, {"samples", b.samples}}},
                  {"c_d_change", change}};
    out.checks.push_back(check_le("|volume slope - d_f|", std::abs(vol.exponent - df), 0.1));
    out.checks.push_back(check_lt("C_D change between generations", change, 1.5));
    out.table.columns = {"r", "volume", "residual"};
    add_fit_rows(out.table, vol);
    out.plot = loglog_plot("r", "V(0,r)", vol, "volume");
    return out;
}

ExperimentOutcome exp_spectrum(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    std::vector<double> radii = cfg.radii;
    if (radii.empty()) {
        for (double r = 2; r <= g.side() / 2.0; r *= 2) radii.push_back(r);
    }
    ExperimentOutcome out;
    out.claim = "smallest Dirichlet eigenvalue of balls by Lanczos agrees with a dense solve and decays with r";
    out.table.columns = {"r", "ball_size", "lambda1", "lambda1_dense"};
    std::vector<double> rs, lams;
    double worst = 0.0;
    int compared = 0;
    for (double r : radii) {
        const Ball b = ball(g.graph(), g.origin(), r);
        if (b.vertices.size() >= static_cast<std::size_t>(g.size())) continue;
        const double lam = lambda1_dirichlet(df, b.vertices);
        double dense = kNan;
        if (b.vertices.size() <= 2000) {
            dense = lambda1_dirichlet_dense(df, b.vertices);
            worst = std::max(worst, std::abs(lam - dense) / dense);
            ++compared;
        }
        rs.push_back(r);
        lams.push_back(lam);
        out.table.rows.push_back({r, static_cast<double>(b.vertices.size()), lam, dense});
    }
    if (rs.size() < 2) throw ConfigError("spectrum: need at least 2 proper balls");
    const FitReport fit = loglog_fit(rs, lams);
    out.report = {{"fit", fit_json(fit)}, {"max_relative_difference", worst}, {"dense_compared", compared}};
    if (compared > 0) out.checks.push_back(check_le("max |lanczos - dense| / dense", worst, 1e-8));
    out.checks.push_back(check_lt("lambda1 decay exponent", fit.exponent, 0.0));
    out.plot = loglog_plot("r", "lambda1(B(0,r))", fit, "lambda1");
    out.plot.series.push_back({1, 4, "points", "dense"});
    return out;
}

ExperimentOutcome exp_exit_times(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    const std::vector<double> radii = cfg.radii.empty() ? exit_radii(g.side()) : cfg.radii;
    const FitReport fit = fit_walk_dimension(df, g.origin(), radii);
    const VertexId other = find_cell(g, {g.side() / 2});
    const FitReport fit2 = fit_walk_dimension(df, other, radii);
    const double df_ = fractal_dimension(dim);

    ExperimentOutcome out;
    out.claim = "mean exit times E tau_B(x,r) ~ r^d_w with 2 < d_w < d_f + 1";
    out.report = {{"fit", fit_json(fit)},
                  {"second_center", {{"coords", std::vector<std::int64_t>{g.side() / 2, 0}}, {"fit", fit_json(fit2)}}},
                  {"fractal_dimension", df_}};
    out.checks.push_back(check_in("walk dimension", fit.exponent, 2.0, df_ + 1.0));
    out.checks.push_back(check_le("|d_w(origin) - d_w(second center)|", std::abs(fit.exponent - fit2.exponent), 0.1));
    out.table.columns = {"r", "exit_time", "residual"};
    add_fit_rows(out.table, fit);
    out.plot = loglog_plot("r", "E tau", fit, "exit time");
    return out;
}

ExperimentOutcome exp_ondiag(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    std::vector<double> times = cfg.times;
    if (times.empty()) {
        for (double t = 10; t <= 4e5; t *= 2) times.push_back(t);
    }
    const OndiagReport rep = ondiag_fit(DirichletForm(g.graph_ptr()), g.origin(), times);
    const double target = -fractal_dimension(dim) / w.value;

    ExperimentOutcome out;
    out.claim = "on-diagonal heat kernel decay p_t(x,x) ~ t^(-d_f/d_w) before saturation";
    out.report = {{"fit", fit_json(rep.fit)},
                  {"walk_dimension", walk_json(w)},
                  {"target_slope", target},
                  {"saturation", rep.saturation},
                  {"times", rep.times},
                  {"density", rep.density}};
    out.checks.push_back(check_le("|ondiag slope + d_f/d_w|", std::abs(rep.fit.exponent - target), 0.1));
    out.table.columns = {"t", "density", "in_window", "residual"};
    std::size_t k = 0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        const bool in = rep.in_window[i];
        out.table.rows.push_back({rep.times[i], rep.density[i], in ? 1.0 : 0.0, in ? rep.fit.residuals[k++] : kNan});
    }
    out.plot = loglog_plot("t", "p_t(0,0)", rep.fit, "density");
    return out;
}

ExperimentOutcome exp_dg(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const ScalingFunction sf(2.0, w.value);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    std::vector<double> Rs = cfg.radii;
    if (Rs.empty()) {
        for (double f : {1.0, 4.0 / 3, 2.0, 8.0 / 3, 3.0}) Rs.push_back(std::round(f * g.side() / 9.0));
    }
    std::vector<double> targets;
    for (int i = 0; i < 8; ++i) targets.push_back(std::pow(10.0, i / 7.0));
    std::vector<DgPairSpec> pairs;
    for (double R : Rs) {
        const VertexId x1 = g.origin();
        const VertexId x2 = find_cell(g, {static_cast<std::int64_t>(R)});
        if (R < 1 || x2 < 0) throw ConfigError("dg: pair distance " + std::to_string(R) + " does not fit the graph");
        for (double f : targets) pairs.push_back({x1, x2, t_for_phi(sf, R, f)});
    }
    const DgReport rep = dg_check(df, sf, pairs, cfg.threads);

    ExperimentOutcome out;
    out.claim = "Davies-Gaffney: -log of the normalised overlap grows linearly in Phi(R,t)";
    json pj = json::array();
    for (const auto& p : rep.pairs) {
        pj.push_back({{"x1", p.x1}, {"x2", p.x2}, {"R", p.R}, {"t", p.t}, {"overlap", p.overlap},
                      {"norm_bound", p.norm_bound}, {"phi", p.phi_value}});
    }
    out.report = {{"walk_dimension", walk_json(w)}, {"fit", fit_json(rep.fit)}, {"excluded", rep.excluded}, {"pairs", pj}};
    out.checks.push_back(check_ge("pairs", static_cast<double>(rep.pairs.size() - rep.excluded), 30));
    out.checks.push_back(check_gt("slope", rep.slope, 0.0));
    out.checks.push_back(check_ge("r_squared", rep.r_squared, 0.9));
    out.table.columns = {"phi", "neg_log_ratio", "R", "t"};
    for (const auto& p : rep.pairs) {
        out.table.rows.push_back({p.phi_value, p.overlap > 0 ? -std::log(p.overlap / p.norm_bound) : kNan, p.R, p.t});
    }
    out.plot.xlabel = "Phi(R,t)";
    out.plot.ylabel = "-log(overlap / norm)";
    out.plot.series.push_back({1, 2, "points", "pairs"});
    out.plot.fit_line = true;
    out.plot.slope = rep.fit.exponent;
    out.plot.intercept = rep.fit.intercept;
    return out;
}

ExperimentOutcome exp_fk(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    if (n < 2) throw ConfigError("fk: needs generations >= 2");
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const ScalingFunction sf(2.0, w.value);
    const double nu = w.value / fractal_dimension(dim);
    std::vector<double> radii = cfg.radii;
    if (radii.empty()) {
        const CarpetGraph small = build_precarpet({dim, n - 1}, cfg.budget_cells);
        for (double r = 3; r <= small.side() / 3.0; r *= 2) radii.push_back(r);
    }
    ExperimentOutcome out;
    out.claim = "Faber-Krahn: lambda1(D) Psi(r) (m(D)/m(B))^nu bounded below, uniformly in the generation";
    out.table.columns = {"generation", "r", "domain_fraction", "value"};
    std::vector<double> estimates;
    json gens = json::array();
    for (int k : {n - 1, n}) {
        const CarpetGraph g = build_precarpet({dim, k}, cfg.budget_cells);
        const FkReport rep = fk_scan(DirichletForm(g.graph_ptr()), sf, nu, 200, cfg.seed, radii, cfg.threads);
        estimates.push_back(rep.c_f_estimate);
        gens.push_back({{"generation", k},
                        {"c_f", rep.c_f_estimate},
                        {"samples", rep.samples},
                        {"monotonicity_violations", rep.monotonicity_violations}});
        for (const auto& s : rep.details) {
            out.table.rows.push_back({static_cast<double>(k), s.r, s.domain_measure / s.ball_measure, s.value});
        }
    }
    const double ratio = std::max(estimates[0], estimates[1]) / std::min(estimates[0], estimates[1]);
    out.report = {{"walk_dimension", walk_json(w)}, {"nu", nu}, {"radii", radii}, {"generations", gens}, {"c_f_ratio", ratio}};
    out.checks.push_back(check_gt("min c_f", std::min(estimates[0], estimates[1]), 0.0));
    out.checks.push_back(check_le("c_f ratio across generations", ratio, 2.0));
    out.plot.xlabel = "m(D)/m(B)";
    out.plot.ylabel = "lambda1 Psi(r) (m(D)/m(B))^nu";
    out.plot.logx = out.plot.logy = true;
    out.plot.series.push_back({3, 4, "points", "samples"});
    return out;
}

json csa_json(const CsaScan& s) {
    json reps = json::array();
    for (const auto& r : s.reports) {
        reps.push_back({{"center", r.center}, {"R", r.R}, {"r", r.r}, {"theta_star", r.theta_star},
                        {"family_size", r.family_size}, {"annulus_size", r.annulus_size}});
    }
    return {{"widths", s.widths}, {"theta_max", s.theta_max}, {"cs_per_width", s.cs_per_width},
            {"fit", fit_json(s.fit)}, {"cs_estimate", s.cs_estimate}, {"cs_spread", s.cs_spread}, {"reports", reps}};
}

std::vector<VertexId> csa_centers(const CarpetGraph& g) {
    std::vector<VertexId> c;
    for (const auto& coords : {std::vector<std::int64_t>{20, 40}, std::vector<std::int64_t>{g.side() / 2, 0}}) {
        const VertexId v = find_cell(g, coords);
        if (v >= 0) c.push_back(v);
    }
    if (c.empty()) c.push_back(g.origin());
    return c;
}

ExperimentOutcome exp_csa(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const ScalingFunction sf(2.0, w.value);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    const auto centers = csa_centers(g);
    FamilySpec fam;
    fam.smooth_fields = 20;
    fam.seed = cfg.seed;
    const double s = g.side() / 243.0;
    const std::vector<double> lin_w = {9 * s, 27 * s, 81 * s}, res_w = {27 * s, 81 * s};
    if (res_w.front() < 10) throw ConfigError("csa: graph too small for resolvent cutoffs (needs side >= 243)");
    const CsaScan lin = csa_scan(df, sf, centers, {9 * s}, lin_w, linear_builder(g.graph()), fam, cfg.threads);
    const CsaScan res = csa_scan(df, sf, centers, {9 * s}, res_w, resolvent_builder(df, sf), fam, cfg.threads);

    ExperimentOutcome out;
    out.claim = "resolvent cutoffs give CSD constants theta ~ Psi(r)^-1, decaying faster than linear cutoffs";
    out.report = {{"walk_dimension", walk_json(w)}, {"linear", csa_json(lin)}, {"resolvent", csa_json(res)}};
    out.checks.push_back(
        check_le("resolvent exponent - linear exponent", res.fit.exponent - lin.fit.exponent, -0.1));
    out.checks.push_back(check_le("resolvent C_S spread", res.cs_spread, 4.0));
    out.table.columns = {"r", "theta_linear", "theta_resolvent"};
    for (std::size_t i = 0; i < lin.widths.size(); ++i) {
        double tr = kNan;
        for (std::size_t j = 0; j < res.widths.size(); ++j) {
            if (res.widths[j] == lin.widths[i]) tr = res.theta_max[j];
        }
        out.table.rows.push_back({lin.widths[i], lin.theta_max[i], tr});
    }
    out.plot.xlabel = "r";
    out.plot.ylabel = "max theta*";
    out.plot.logx = out.plot.logy = true;
    out.plot.series = {{1, 2, "linespoints", "linear"}, {1, 3, "linespoints", "resolvent"}};
    return out;
}

VertexId interior_center(const CarpetGraph& g) {
    const VertexId v = find_cell(g, {20, 40});
    return v >= 0 ? v : find_cell(g, {g.side() / 2, g.side() / 3});
}

ExperimentOutcome exp_cacciopoli(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const ScalingFunction sf(2.0, w.value);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    const VertexId x0 = interior_center(g);
    if (x0 < 0) throw ConfigError("cacciopoli: graph too small");
    struct Run {
        double R, level, T;
    };
    const double s = g.side() / 81.0;
    const std::vector<Run> runs = {{12 * s, 0.0, 5 * s * s}, {12 * s, 0.3, 50 * s * s}, {20 * s, 0.0, 50 * s * s},
                                   {20 * s, 0.3, 500 * s * s}};
    ExperimentOutcome out;
    out.claim = "Cacciopoli inequality for killed caloric functions with the measured CSD constant";
    out.table.columns = {"trial", "lhs", "rhs", "ratio"};
    json rj = json::array();
    double worst = 0.0;
    int trial = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const double R = std::round(runs[i].R), r = std::round(R / 2);
        const CutoffFn phi = cutoff_linear(g.graph(), x0, R - r, r);
        const VertexSet u = cutoff_annulus(g.graph(), phi);
        FamilySpec fam;
        fam.seed = cfg.seed;
        const auto family = default_test_family(df, u, sf(r) / 10, fam);
        const double theta = csd_theta(df, phi, family.fields, &u).theta_star;
        CacciopoliParams p;
        p.x0 = x0;
        p.R = R;
        p.r = r;
        p.T = runs[i].T;
        p.level = runs[i].level;
        p.trials = 5;
        p.seed = cfg.seed + i;
        const CacciopoliReport rep = cacciopoli_check(df, phi, theta, p);
        worst = std::max(worst, rep.max_ratio);
        rj.push_back({{"R", R}, {"r", r}, {"T", p.T}, {"level", p.level}, {"theta", theta}, {"K", rep.K},
                      {"max_ratio", rep.max_ratio}});
        for (std::size_t k = 0; k < rep.ratios.size(); ++k) {
            out.table.rows.push_back({static_cast<double>(trial++), rep.lhs[k], rep.rhs[k], rep.ratios[k]});
        }
    }
    out.report = {{"walk_dimension", walk_json(w)}, {"runs", rj}, {"trials", trial}, {"max_ratio", worst}};
    out.checks.push_back(check_le("max lhs/rhs", worst, 2.0));
    out.plot.xlabel = "trial";
    out.plot.ylabel = "lhs / rhs";
    out.plot.series.push_back({1, 4, "points", "ratio"});
    return out;
}

ExperimentOutcome exp_stability(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const ScalingFunction sf(2.0, w.value);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    const VertexId x0 = interior_center(g);
    if (x0 < 0) throw ConfigError("stability: graph too small");
    const double s = g.side() / 81.0;
    const double R = std::round(6 * s), r = std::round(9 * s);
    const CutoffFn phi = cutoff_linear(g.graph(), x0, R, r);
    const VertexSet u = cutoff_annulus(g.graph(), phi);
    FamilySpec fam;
    fam.seed = cfg.seed;
    const auto family = default_test_family(df, u, sf(r) / 10, fam);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> logf(-std::log(2.0), std::log(2.0));
    std::vector<double> factors(static_cast<std::size_t>(g.graph().edge_count()));
    for (auto& f : factors) f = std::exp(logf(rng));
    const StabilityReport rep = stability_check(df, factors, 2.0, phi, family.fields, sf(r));

    ExperimentOutcome out;
    out.claim = "weak cutoff-Sobolev constants are stable under conductance perturbations within [1/C, C]";
    out.report = {{"walk_dimension", walk_json(w)},
                  {"C", rep.factor_bound},
                  {"gamma_sandwich", rep.gamma_sandwich},
                  {"worst_c1_ratio", rep.worst_c1_ratio},
                  {"worst_c2_ratio", rep.worst_c2_ratio},
                  {"theta_original", rep.theta_original},
                  {"theta_perturbed", rep.theta_perturbed}};
    out.checks.push_back(check_true("energy measure sandwich", rep.gamma_sandwich));
    out.checks.push_back(check_le("c1' / (C^2 c1)", rep.worst_c1_ratio, 1.01));
    out.checks.push_back(check_le("c2' / (C c2)", rep.worst_c2_ratio, 1.01));
    out.table.columns = {"c1", "c2", "c2_perturbed", "c1_min", "c1_min_perturbed"};
    for (std::size_t i = 0; i < rep.c1_grid.size(); ++i) {
        out.table.rows.push_back({rep.c1_grid[i], rep.c2_original[i], rep.c2_perturbed[i], rep.c1_min_original[i],
                                  rep.c1_min_perturbed[i]});
    }
    out.plot.xlabel = "c1";
    out.plot.ylabel = "c2";
    out.plot.logx = out.plot.logy = true;
    out.plot.series = {{1, 2, "linespoints", "original"}, {1, 3, "linespoints", "perturbed"}};
    return out;
}

// Expected labels away from regime boundaries; empty when p is too close to call.
std::string expected_vgc(double p, double df) {
    constexpr double m = 0.01;
    if (p < 2 - m || p > df + m) return "holds";
    if (p > 2 + m && p < df - m) return "fails";
    return "";
}

std::string expected_green(double p, double dw) {
    if (p >= dw + 0.5) return "convergent";
    if (p <= dw - 0.5) return "divergent";
    return "";
}

json vgc_json(const VgcReport& v) {
    return {{"verdict", to_string(v.verdict)}, {"rho_exponent", v.rho_exponent}, {"rho_bounded", v.rho_bounded},
            {"mass_exponent", v.mass_exponent}, {"mass_regime", v.mass_regime}, {"integral", v.integral},
            {"rho_max", v.rho_max}, {"reason", v.reason}};
}

void add_vgc_checks(ExperimentOutcome& out, const std::vector<double>& ps, const CarpetGraph& g, json& vj) {
    const double df = fractal_dimension(g.dim());
    for (double p : ps) {
        const VgcReport v = vgc_classify(g, {p, g.origin()});
        vj.push_back({{"p", p}, {"report", vgc_json(v)}});
        const std::string want = expected_vgc(p, df);
        if (!want.empty()) {
            char name[96];
            std::snprintf(name, sizeof name, "vgc %s at p=%.4g", want.c_str(), p);
            out.checks.push_back(check_true(name, to_string(v.verdict) == want));
        }
    }
}

ExperimentOutcome exp_timechange2(const ExperimentConfig& cfg, int dim, int n) {
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const double df = fractal_dimension(dim);
    std::vector<double> radii = cfg.radii;
    if (radii.empty()) {
        for (double r = 9; r <= g.side() / 3.0; r *= 3) radii.push_back(r);
    }
    const std::vector<double> ps = cfg.p.empty() ? std::vector<double>{1.0, 3.0} : cfg.p;
    ExperimentOutcome out;
    out.claim = "intrinsic metric of the time change: rho_a ~ R^(1-p/2), finite radius for p > 2, and VGC";
    out.table.columns = {"p", "R", "shell_distance"};
    json shells = json::array();
    for (double p : ps) {
        const RhoShellReport rep = rho_shell_scan(g.graph(), {p, g.origin()}, radii);
        shells.push_back({{"p", p}, {"fit", fit_json(rep.fit)}, {"predicted", rep.predicted_exponent}});
        char name[64];
        std::snprintf(name, sizeof name, "|rho shell exponent - (1-p/2)| at p=%.4g", p);
        out.checks.push_back(check_le(name, std::abs(rep.fit.exponent - rep.predicted_exponent), 0.1));
        for (std::size_t i = 0; i < rep.radii.size(); ++i) out.table.rows.push_back({p, rep.radii[i], rep.shell_distance[i]});
    }
    const std::vector<int> gens = {std::max(1, n - 2), std::max(1, n - 1), n};
    const SequenceTrend rho4 = rho_truncation_sweep(dim, gens, 4.0, cfg.budget_cells);
    const SequenceTrend heavy = ma_total_sweep(dim, gens, df + 1, cfg.budget_cells);
    const SequenceTrend light = ma_total_sweep(dim, gens, 1.0, cfg.budget_cells);
    out.checks.push_back(check_true("rho_a(0, far shell) convergent at p=4", rho4.label == "convergent"));
    out.checks.push_back(check_true("m_a total convergent at p=d_f+1", heavy.label == "convergent"));
    json vj = json::array();
    std::vector<double> vgc_ps = ps;
    vgc_ps.push_back(df + 1);
    add_vgc_checks(out, vgc_ps, g, vj);
    out.report = {{"generations", gens},
                  {"rho_shells", shells},
                  {"rho_truncation_p4", trend_json(rho4)},
                  {"ma_total_p_df_plus_1", trend_json(heavy)},
                  {"ma_total_p1", trend_json(light)},
                  {"vgc", vj}};
    out.plot.xlabel = "R";
    out.plot.ylabel = "rho_a shell distance";
    out.plot.logx = out.plot.logy = true;
    out.plot.series.push_back({2, 3, "points", "shells"});
    return out;
}

std::vector<double> threshold_ps(const ExperimentConfig& cfg, double dw) {
    return cfg.p.empty() ? std::vector<double>{dw - 1, (2 + dw) / 2, dw + 1} : cfg.p;
}

ExperimentOutcome exp_timechange3(const ExperimentConfig& cfg, int n) {
    if (n < 3) throw ConfigError("timechange: d=3 needs generations >= 3");
    const std::vector<int> gens = {n - 2, n - 1, n};
    const GreenColumns local = gens == kSweep3 ? GreenColumns{} : green_columns(3, gens, cfg.budget_cells);
    const GreenColumns& cols = gens == kSweep3 ? reference_columns(cfg.budget_cells) : local;
    const WalkDim w = cfg.walk_dimension > 0.0
                          ? WalkDim{cfg.walk_dimension, cfg.walk_dimension, "configured"}
                          : WalkDim{std::max(2.0, cols.walk_dimension.back()), cols.walk_dimension.back(),
                                    "generation sweep of exit times"};
    const std::vector<double> ps = threshold_ps(cfg, w.value);
    const GreenSweep sw = a_infty_sums(cols, ps);
    const CarpetGraph g = build_precarpet({3, n}, cfg.budget_cells);

    ExperimentOutcome out;
    out.claim = "time-changed process on the 3-d carpet: E A_inf finite iff p > d_w; VGC fails for 2 < p < d_f";
    json gj = json::array();
    out.table.columns = {"p", "generation", "green_sum"};
    for (std::size_t i = 0; i < ps.size(); ++i) {
        gj.push_back({{"p", ps[i]}, {"trend", trend_json(sw.trends[i])}});
        for (std::size_t k = 0; k < gens.size(); ++k) out.table.rows.push_back({ps[i], double(gens[k]), sw.sums[i][k]});
        const std::string want = expected_green(ps[i], w.value);
        if (!want.empty()) {
            char name[64];
            std::snprintf(name, sizeof name, "green sweep %s at p=%.4g", want.c_str(), ps[i]);
            out.checks.push_back(check_true(name, sw.trends[i].label == want));
        }
    }
    json vj = json::array();
    add_vgc_checks(out, ps, g, vj);

    const double p_mc = w.value + 2;
    const DirichletForm df(g.graph_ptr());
    const McReport mc = a_infty_mc(df, {p_mc, g.origin()}, 10000, {3, 9, 27}, cfg.seed, cfg.threads);
    json mj = json::array();
    for (const auto& s : mc.shells) {
        mj.push_back({{"radius", s.radius}, {"median", s.median}, {"q10", s.q10}, {"q90", s.q90}});
    }
    const auto& inc = mc.median_trend.increments;
    out.checks.push_back(check_lt("monte carlo median increment ratio at p=d_w+2", inc[1] / inc[0], 1.0));

    out.report = {{"walk_dimension", walk_json(w)},
                  {"generations", gens},
                  {"exit_times", cols.exit_times},
                  {"walk_dimension_per_step", cols.walk_dimension},
                  {"green", gj},
                  {"vgc", vj},
                  {"monte_carlo", {{"p", p_mc}, {"walkers", mc.walkers}, {"seed", mc.seed}, {"shells", mj},
                                   {"median_trend", trend_json(mc.median_trend)}}}};
    out.plot.xlabel = "generation";
    out.plot.ylabel = "E A_inf on the truncation";
    out.plot.logy = true;
    out.plot.series.push_back({2, 3, "points", "green sums"});
    return out;
}

ExperimentOutcome exp_timechange(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    return dim == 3 ? exp_timechange3(cfg, n) : exp_timechange2(cfg, dim, n);
}

ExperimentOutcome exp_scom(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    const WalkDim w = resolve_walk_dimension(cfg, dim);
    const ScalingFunction sf(2.0, w.value);
    const CarpetGraph g = build_precarpet({dim, n}, cfg.budget_cells);
    const DirichletForm df(g.graph_ptr());
    const double ring = 2.0;
    int rings = 1;
    {
        const auto d = bfs_distances(g.graph(), g.origin());
        const int ecc = *std::max_element(d.begin(), d.end());
        while (std::pow(ring, rings + 2) <= ecc / 3.0) ++rings;
    }
    const double dfr = fractal_dimension(dim);
    const double growth = std::pow(ring, dfr - w.value);
    const std::vector<double> ps = threshold_ps(cfg, w.value);
    FamilySpec fam;
    fam.smooth_fields = 20;
    fam.seed = cfg.seed;

    std::unique_ptr<GreenSweep> green;
    if (dim == 3 && n == kSweep3.back()) {
        green = std::make_unique<GreenSweep>(a_infty_sums(reference_columns(cfg.budget_cells), ps));
    }

    ExperimentOutcome out;
    out.claim = "cutoff-Sobolev completeness criterion: theta_n m_a(U_n) / 4^n -> 0 for p <= d_w";
    out.checks.push_back(check_lt("R^(d_f - d_w)", growth, 4.0));
    out.table.columns = {"p", "n", "radius", "theta", "mass", "sequence"};
    json sj = json::array();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double p = ps[i];
        const ScomReport rep = scom_check(df, sf, {p, g.origin()}, ring, rings, fam);
        json entry = {{"p", p},
                      {"classification", rep.classification},
                      {"radii", rep.radii},
                      {"theta", rep.theta},
                      {"mass", rep.mass},
                      {"theta_fit", fit_json(rep.theta_fit)},
                      {"theta_bounded", rep.theta_bounded},
                      {"criterion_a", {{"sequence", rep.a.sequence}, {"log_slope", rep.a.log_slope},
                                       {"satisfied", rep.a.satisfied}}},
                      {"criterion_b", {{"theta_over_n2", rep.b.theta_over_n2}, {"b_needed", rep.b.b_needed},
                                       {"satisfied", rep.b.satisfied}}}};
        for (std::size_t k = 0; k < rep.radii.size(); ++k) {
            out.table.rows.push_back({p, double(k + 1), rep.radii[k], rep.theta[k], rep.mass[k], rep.a.sequence[k]});
        }
        char name[96];
        if (p <= w.value) {
            std::snprintf(name, sizeof name, "criterion (a) sequence decreasing at p=%.4g", p);
            out.checks.push_back(check_true(name, rep.a.satisfied));
            std::snprintf(name, sizeof name, "scom complete at p=%.4g", p);
            out.checks.push_back(check_true(name, rep.classification == "complete"));
        }
        if (green) {
            const std::string& label = green->trends[i].label;
            entry["green"] = trend_json(green->trends[i]);
            std::snprintf(name, sizeof name, "scom and green sweep consistent at p=%.4g", p);
            out.checks.push_back(check_true(name, !(rep.classification == "complete" && label == "convergent")));
        }
        if (cfg.p.empty() && i == 1 && dim == 3) {
            // p = (2 + d_w)/2: completeness evidence while VGC fails.
            const VgcReport v = vgc_classify(g, {p, g.origin()});
            entry["vgc"] = vgc_json(v);
            const bool evidence =
                rep.classification == "complete" && (!green || green->trends[i].label != "convergent");
            out.checks.push_back(check_true("vgc fails with completeness-consistent evidence at p=(2+d_w)/2",
                                            v.verdict == VgcVerdict::fails && evidence));
        }
        sj.push_back(entry);
    }
    out.report = {{"walk_dimension", walk_json(w)}, {"ring_ratio", ring}, {"rings", rings},
                  {"ring_growth", growth}, {"runs", sj}};
    out.plot.xlabel = "n";
    out.plot.ylabel = "theta_n m_a(U_n) / 4^n";
    out.plot.logy = true;
    out.plot.series.push_back({2, 6, "points", "sequence"});
    return out;
}

using Runner = std::function<ExperimentOutcome(const ExperimentConfig&)>;

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> m = {
        {"build", exp_build},           {"vd", exp_vd},       {"spectrum", exp_spectrum}, {"exit-times", exp_exit_times},
        {"ondiag", exp_ondiag},         {"dg", exp_dg},       {"fk", exp_fk},             {"csa", exp_csa},
        {"cacciopoli", exp_cacciopoli}, {"stability", exp_stability}, {"timechange", exp_timechange},
        {"scom", exp_scom},
    };
    return m;
}

std::int64_t largest_cells(const ExperimentConfig& cfg) {
    const int dim = dim_of(cfg), n = gen_of(cfg);
    std::int64_t cells = carpet_cell_count({dim, n});
    const bool needs_dw = cfg.walk_dimension <= 0.0 && cfg.experiment != "build" && cfg.experiment != "vd" &&
                          cfg.experiment != "spectrum" && cfg.experiment != "exit-times";
    if (needs_dw || (dim == 3 && cfg.experiment == "timechange")) {
        cells = std::max(cells, dim == 3 ? carpet_cell_count({3, 4}) : carpet_cell_count({dim, 6}));
    }
    return cells;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string describe(const Check& c) {
    std::string s = c.name + " = " + format_number(c.value) + " ";
    if (c.relation == "in") return s + "in (" + format_number(c.bound) + ", " + format_number(c.bound_hi) + ")";
    return s + c.relation + " " + format_number(c.bound);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"build", "vd", "spectrum", "exit-times", "ondiag", "dg", "fk",
                                                   "csa", "cacciopoli", "stability", "timechange", "scom", "all"};
    return names;
}

void validate(const ExperimentConfig& cfg) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    }
    if (cfg.dim != 0 && cfg.dim != 2 && cfg.dim != 3) throw ConfigError("dim must be 2 or 3");
    if (cfg.generations < 0 || cfg.generations > 12) throw ConfigError("gen must be in 1..12");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (cfg.budget_cells < 1) throw ConfigError("budget-cells must be positive");
    if (cfg.walk_dimension != 0.0 && !(cfg.walk_dimension >= 2.0)) throw ConfigError("walk dimension must be >= 2");
    if (cfg.out_dir.empty()) throw ConfigError("output directory must not be empty");
    for (double p : cfg.p) {
        if (!(p >= 0.0)) throw ConfigError("p must be >= 0");
    }
    for (double r : cfg.radii) {
        if (!(r > 0.0)) throw ConfigError("radii must be positive");
    }
    for (double t : cfg.times) {
        if (!(t > 0.0)) throw ConfigError("times must be positive");
    }
    if (cfg.experiment == "all") return;
    const std::int64_t cells = largest_cells(cfg);
    if (cells > cfg.budget_cells) {
        throw BudgetExceeded("experiment '" + cfg.experiment + "' needs " + std::to_string(cells) +
                             " cells, budget is " + std::to_string(cfg.budget_cells));
    }
}

json config_to_json(const ExperimentConfig& cfg) {
    return {{"experiment", cfg.experiment},
            {"dim", dim_of(cfg)},
            {"generations", cfg.experiment == "all" ? 0 : gen_of(cfg)},
            {"seed", cfg.seed},
            {"p", cfg.p},
            {"radii", cfg.radii},
            {"times", cfg.times},
            {"walk_dimension", cfg.walk_dimension},
            {"threads", cfg.threads},
            {"budget_cells", cfg.budget_cells}};
}

bool ExperimentOutcome::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json ExperimentOutcome::to_json() const {
    json cj = json::array();
    for (const auto& c : checks) {
        json e = {{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"bound", c.bound},
                  {"passed", c.passed}};
        if (c.relation == "in") e["bound_hi"] = c.bound_hi;
        cj.push_back(e);
    }
    return {{"experiment", name}, {"claim", claim}, {"config", config},
            {"passed", passed()}, {"checks", cj},  {"report", report}};
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.experiment == "all") throw ConfigError("run_experiment takes a single experiment");
    ExperimentOutcome out = runners().at(cfg.experiment)(cfg);
    out.name = cfg.experiment;
    out.config = config_to_json(cfg);
    return out;
}

void write_outputs(const ExperimentOutcome& out, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path base = fs::path(out_dir) / out.name;
    const std::string config_line = "# config: " + out.config.dump();
    {
        std::ofstream f(base.string() + ".json");
        f << out.to_json().dump(2) << '\n';
    }
    {
        std::ofstream f(base.string() + ".csv");
        f << config_line << '\n';
        for (std::size_t i = 0; i < out.table.columns.size(); ++i) f << (i ? "," : "") << out.table.columns[i];
        f << '\n';
        for (const auto& row : out.table.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_number(row[i]);
            f << '\n';
        }
    }
    {
        const PlotSpec& p = out.plot;
        std::ofstream f(base.string() + ".gp");
        f << config_line << '\n'
          << "set terminal pngcairo size 900,650\n"
          << "set output '" << out.name << ".png'\n"
          << "set datafile separator ','\n"
          << "set key autotitle columnhead\n"
          << "set title '" << out.claim << "' noenhanced\n"
          << "set xlabel '" << p.xlabel << "' noenhanced\n"
          << "set ylabel '" << p.ylabel << "' noenhanced\n";
        if (p.logx) f << "set logscale x\n";
        if (p.logy) f << "set logscale y\n";
        f << "plot ";
        for (std::size_t i = 0; i < p.series.size(); ++i) {
            const auto& s = p.series[i];
            f << (i ? ", \\\n     " : "") << "'" << out.name << ".csv' using " << s.x << ":" << s.y << " with "
              << s.style << " title '" << s.title << "' noenhanced";
        }
        if (p.fit_line) {
            if (p.logx && p.logy) {
                f << ", \\\n     exp(" << format_number(p.intercept) << ")*x**(" << format_number(p.slope)
                  << ") with lines title 'fit'";
            } else {
                f << ", \\\n     " << format_number(p.intercept) << " + " << format_number(p.slope)
                  << "*x with lines title 'fit'";
            }
        }
        f << '\n';
    }
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
    try {
        validate(cfg);
        std::vector<ExperimentConfig> jobs;
        std::vector<std::string> stems;
        if (cfg.experiment == "all") {
            for (const auto& name : experiment_names()) {
                if (name == "all") continue;
                ExperimentConfig c = cfg;
                c.experiment = name;
                c.dim = 0;
                c.generations = 0;
                c.p.clear();
                c.radii.clear();
                c.times.clear();
                jobs.push_back(c);
                stems.push_back(name);
                if (name == "timechange") {
                    c.dim = 3;
                    jobs.push_back(c);
                    stems.push_back("timechange-d3");
                }
            }
            for (const auto& j : jobs) validate(j);
        } else {
            jobs.push_back(cfg);
            stems.push_back(cfg.experiment);
        }
        bool all_passed = true;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            ExperimentOutcome out = run_experiment(jobs[i]);
            out.name = stems[i];
            write_outputs(out, cfg.out_dir);
            for (const auto& c : out.checks) log << (c.passed ? "PASS " : "FAIL ") << out.name << ": " << describe(c) << '\n';
            log << out.name << ": " << (out.passed() ? "passed" : "failed") << ", wrote " << out.name
                << ".{json,csv,gp} in " << cfg.out_dir << '\n';
            all_passed = all_passed && out.passed();
        }
        return all_passed ? 0 : 1;
    } catch (const BudgetExceeded& e) {
        log << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        log << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        log << "invalid configuration: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace carpetlab
